#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "multivar.hpp"

using namespace hhinvex;

namespace {

const std::vector<double> kOrigin2{0.0, 0.0};
const std::vector<double> kOnes2{1.0, 1.0};

VectorFunction exp_sum2() { return VectorFunction::from_expression("exp(x1 + x2)", 2); }

}  // namespace

TEST_CASE("path restriction substitutes the eta displacement") {
    VectorFunction f = exp_sum2();
    EtaMap eta = EtaMap::vector("v - u", 2);
    EtaPath path = path_restriction(f, kOrigin2, kOnes2, eta);
    CHECK(path.v == kOnes2);
    CHECK(path.phi(0.0) == doctest::Approx(1.0));                     // f(x)
    CHECK(path.phi(0.3) == doctest::Approx(std::exp(0.6)).epsilon(1e-15));
    CHECK(path.phi(1.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-15));

    // degenerate eta: phi is constant f(x)
    EtaPath flat = path_restriction(f, kOnes2, kOrigin2, EtaMap::vector("0*(v - u)", 2));
    CHECK(flat.phi(0.0) == flat.phi(0.7));
    CHECK(flat.phi(0.2) == doctest::Approx(std::exp(2.0)));

    // containment check reports the exit parameter
    Box small{{0.0, 0.0}, {0.5, 0.5}};
    CHECK_THROWS_WITH_AS(path_restriction(f, kOrigin2, kOnes2, eta, small),
                         doctest::Contains("exits the domain at t ="), DomainError);

    CHECK_THROWS_AS(path_restriction(f, std::vector<double>{0.0}, kOnes2, eta), ParameterError);
}

TEST_CASE("path bounding box covers base, target and endpoint") {
    VectorFunction f = exp_sum2();
    EtaMap eta = EtaMap::vector("2*(v - u)", 2);
    EtaPath path = path_restriction(f, kOrigin2, kOnes2, eta);
    Box box = path_bounding_box(path);
    CHECK(box.lo[0] == doctest::Approx(0.0));
    CHECK(box.hi[0] == doctest::Approx(2.0));  // v = x + 2(y - x)
}

TEST_CASE("path accumulator: cached cumulative quadrature") {
    auto phi = [](double t) { return std::exp(2.0 * t); };
    PathAccumulator acc(phi, 1e-10);
    CHECK(acc(0.0) == 0.0);
    auto closed = [](double t) { return (std::exp(2.0 * t) - 1.0) / 2.0; };
    for (double t : {0.1, 0.25, 0.5, 0.77, 1.0})
        CHECK(std::fabs(acc(t) - closed(t)) <= acc.total_error() + 1e-12);

    // additivity against direct quadrature
    for (auto [t1, t2] : std::vector<std::pair<double, double>>{{0.1, 0.9}, {0.33, 0.41}}) {
        QuadratureResult direct = integrate(phi, t1, t2, 1e-11);
        CHECK(std::fabs((acc(t2) - acc(t1)) - direct.value) <=
              2.0 * acc.total_error() + direct.error + 1e-12);
    }

    // nondecreasing for positive phi
    double prev = 0.0;
    for (int i = 1; i <= 16; ++i) {
        const double cur = acc(i / 16.0);
        CHECK(cur >= prev - 1e-12);
        prev = cur;
    }
    CHECK_THROWS_AS(acc(1.5), ParameterError);
}

TEST_CASE("log-convexity certification of path restrictions") {
    ClassCertificate affine =
        certify_log_convex([](double t) { return std::exp(2.0 * t); }, 33, 1e-9);
    CHECK(affine.certified);
    CHECK(std::fabs(affine.worst_margin) <= 1e-12);

    ClassCertificate convex =
        certify_log_convex([](double t) { return std::exp(t * t); }, 33, 1e-9);
    CHECK(convex.certified);

    ClassCertificate concave =
        certify_log_convex([](double t) { return std::exp(-t * t); }, 33, 1e-9);
    CHECK_FALSE(concave.certified);
    // worst violation sits around t1 = 0, t2 = 1, lambda = 1/2
    CHECK(concave.witness.u == doctest::Approx(0.0).epsilon(0.2));
    CHECK(concave.witness.v == doctest::Approx(1.0).epsilon(0.2));
    CHECK(concave.witness.t == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("proposition 5.1: path margins equal phi margins under condition C") {
    // 1-D instance with the canonical displacement
    VectorFunction f = VectorFunction::from_expression("exp(x1^2)", 1);
    const std::vector<double> x{0.2}, y{0.9};
    EtaMap eta = EtaMap::vector("v - u", 1);
    EtaPath path = path_restriction(f, x, y, eta);

    for (double t1 : {0.0, 0.25, 0.7}) {
        for (double t2 : {0.3, 0.6, 1.0}) {
            for (double lam : {0.0, 0.4, 1.0}) {
                // path-side margin at z1, z2
                const double z1 = x[0] + t1 * path.displacement[0];
                const double z2 = x[0] + t2 * path.displacement[0];
                const double zmid = z1 + lam * (z2 - z1);
                auto fe = [&](double z) { return std::exp(z * z); };
                const double path_margin =
                    fe(zmid) - std::pow(fe(z1), 1.0 - lam) * std::pow(fe(z2), lam);
                const double phi_margin =
                    path.phi((1.0 - lam) * t1 + lam * t2) -
                    std::pow(path.phi(t1), 1.0 - lam) * std::pow(path.phi(t2), lam);
                CHECK(path_margin == doctest::Approx(phi_margin).epsilon(1e-10));
            }
        }
    }

    ClassCertificate cert = check_path_logpreinvex(f, x, y, eta);
    CHECK(cert.certified);

    // Condition C gate: refuse when the eta map breaks it
    CHECK_THROWS_AS(check_path_logpreinvex(f, x, y, EtaMap::vector("v + u", 1)),
                    PreconditionError);
}

TEST_CASE("q-power equivalence of log-convexity") {
    QPowerReport both =
        check_q_power_equivalence([](double t) { return std::exp(2.0 * t); }, 3.0, 17);
    CHECK(both.phi_certified);
    CHECK(both.phi_q_certified);
    CHECK(both.consistent);
    CHECK(both.max_scale_mismatch <= 1e-10);

    QPowerReport neither =
        check_q_power_equivalence([](double t) { return std::exp(-t * t); }, 2.0, 17);
    CHECK_FALSE(neither.phi_certified);
    CHECK_FALSE(neither.phi_q_certified);
    CHECK(neither.consistent);
    CHECK(neither.max_scale_mismatch <= 1e-10);

    QPowerReport identity =
        check_q_power_equivalence([](double t) { return std::exp(t * t); }, 1.0, 17);
    CHECK(identity.worst_log_margin_phi == identity.worst_log_margin_phi_q);

    CHECK_THROWS_AS(
        check_q_power_equivalence([](double t) { return t - 0.5; }, 2.0, 9),
        PreconditionError);
}

TEST_CASE("Eq1 on the exp path spot instance reproduces the closed-form oracle") {
    VectorFunction f = exp_sum2();
    EtaMap eta = EtaMap::vector("v - u", 2);
    BoundEvaluation ev = verify_multivar(TheoremId::Eq1, f, kOrigin2, kOnes2, eta, 0.2, 0.8);
    // Phi(t) = (e^{2t} - 1)/2; LHS and RHS closed forms:
    CHECK(std::fabs(ev.lhs - 0.08302897191791258) <= 1e-8);
    CHECK(std::fabs(ev.rhs - 0.42012227713262277) <= 1e-12);
    CHECK(ev.verdict == Verdict::Holds);
    CHECK_FALSE(ev.as_printed);

    BoundEvaluation ev2 =
        verify_multivar(TheoremId::Eq2, f, kOrigin2, kOnes2, eta, 0.2, 0.8, {2.0, 2.0});
    CHECK(std::fabs(ev2.rhs - 0.35928801714078159) <= 1e-12);
    CHECK(ev2.verdict == Verdict::Holds);
    CHECK(ev2.as_printed);  // inherits the printed Tfd formula
}

TEST_CASE("Eq1 degenerate path: constant phi uses the analytic limit") {
    VectorFunction f = VectorFunction::from_expression("exp(x1)", 1);
    const std::vector<double> x{0.5}, y{0.9};
    EtaMap zero = EtaMap::vector("0*(v - u)", 1);
    BoundEvaluation ev = verify_multivar(TheoremId::Eq1, f, x, y, zero, 0.2, 0.8);
    const double fx = std::exp(0.5);
    CHECK(ev.rhs == doctest::Approx(0.6 * fx / 4.0).epsilon(1e-12));
    CHECK(ev.lhs <= 1e-9);
    CHECK(ev.verdict == Verdict::Holds);
}

TEST_CASE("Eq1/Eq2 preconditions") {
    VectorFunction f = exp_sum2();
    EtaMap eta = EtaMap::vector("v - u", 2);
    CHECK_THROWS_AS(verify_multivar(TheoremId::Eq1, f, kOrigin2, kOnes2, eta, 0.0, 0.8),
                    ParameterError);
    CHECK_THROWS_AS(verify_multivar(TheoremId::Eq1, f, kOrigin2, kOnes2, eta, 0.2, 1.0),
                    ParameterError);
    CHECK_THROWS_AS(verify_multivar(TheoremId::Eq1, f, kOrigin2, kOnes2, eta, 0.8, 0.2),
                    ParameterError);
    CHECK_THROWS_AS(verify_multivar(TheoremId::T31, f, kOrigin2, kOnes2, eta, 0.2, 0.8),
                    ParameterError);
    CHECK_THROWS_AS(verify_multivar(TheoremId::Eq2, f, kOrigin2, kOnes2, eta, 0.2, 0.8, {3.0, 3.0}),
                    ParameterError);

    // not log-preinvex on the path: refuse before verifying
    VectorFunction bump = VectorFunction::from_expression("exp(-(x1^2))", 1);
    CHECK_THROWS_AS(verify_multivar(TheoremId::Eq1, bump, std::vector<double>{0.0},
                                    std::vector<double>{1.0}, EtaMap::vector("v - u", 1), 0.2, 0.8),
                    PreconditionError);
}

TEST_CASE("dimension-1 consistency: Eq1 equals Tz applied to the accumulator") {
    VectorFunction f = VectorFunction::from_expression("exp(0.8*x1)", 1);
    const std::vector<double> x{0.1}, y{0.9};
    EtaMap eta = EtaMap::vector("v - u", 1);
    EtaPath path = path_restriction(f, x, y, eta);
    PathAccumulator acc(path.phi, 1e-10);

    ScalarFunction big_phi;
    big_phi.value = [&acc](double t) { return acc(t); };
    big_phi.deriv = path.phi;

    const double a = 0.2, b = 0.7;
    BoundEvaluation mv = verify_multivar(TheoremId::Eq1, f, x, y, eta, a, b);
    BoundEvaluation tz = verify(TheoremId::Tz, big_phi, EtaMap::scalar("v - u"), a, b);
    CHECK(std::fabs(mv.lhs - tz.lhs) <= mv.error_budget + tz.error_budget + 1e-9);
    CHECK(std::fabs(mv.rhs - tz.rhs) <= 1e-9 * std::max(1.0, tz.rhs));
    CHECK(mv.verdict == tz.verdict);
}
