#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "bounds.hpp"
#include "harness.hpp"  // SplitMix64

using namespace hhinvex;

namespace {

const EtaMap kCanonical = EtaMap::scalar("v - u");
const ScalarFunction kSquare = ScalarFunction::from_expression("x^2");
const ScalarFunction kExp = ScalarFunction::from_expression("exp(x)");

}  // namespace

TEST_CASE("midpoint gap spot values") {
    GapResult g = midpoint_gap(kSquare, kCanonical, 0.0, 1.0);
    CHECK(std::fabs(g.value - 1.0 / 12.0) <= 1e-11);
    CHECK(g.error <= 1e-10);

    ScalarFunction affine = ScalarFunction::from_expression("2*x + 1");
    CHECK(midpoint_gap(affine, kCanonical, -0.3, 1.7).value <= 1e-13);

    const double exp_gap = (std::exp(1.0) - 1.0) - std::exp(0.5);  // closed-form oracle
    GapResult ge = midpoint_gap(kExp, kCanonical, 0.0, 1.0);
    CHECK(std::fabs(ge.value - exp_gap) <= 1e-11);
    CHECK(std::fabs(ge.value - 0.06956055775891709) <= 1e-9);
}

TEST_CASE("orientation is enforced, never silently repaired") {
    CHECK_THROWS_AS(midpoint_gap(kSquare, kCanonical, 1.0, 0.0), OrientationError);
    CHECK_THROWS_AS(midpoint_gap(kSquare, kCanonical, 0.5, 0.5), OrientationError);
    CHECK_THROWS_AS(midpoint_gap_classical(kSquare, 1.0, 0.0), OrientationError);
    CHECK_THROWS_AS(rhs_classical(kSquare, 1.0, 0.0, TheoremId::T12), OrientationError);
}

TEST_CASE("RHS formulas reproduce the frozen oracle values for f = x^2") {
    CHECK(rhs_T31(kSquare, kCanonical, 0.0, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(rhs_T32(kSquare, kCanonical, 0.0, 1.0, 2.0) ==
          doctest::Approx(0.39433756729740644).epsilon(1e-12));
    CHECK(rhs_T33(kSquare, kCanonical, 0.0, 1.0, 2.0) ==
          doctest::Approx(0.39433756729740644).epsilon(1e-12));
    CHECK(rhs_T34(kSquare, kCanonical, 0.0, 1.0, 2.0) ==
          doctest::Approx(0.34846171252933795).epsilon(1e-12));
    CHECK(rhs_T35(kSquare, kCanonical, 0.0, 1.0, 2.0) ==
          doctest::Approx(0.34846171252933795).epsilon(1e-12));
    CHECK(rhs_T23(kSquare, kCanonical, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    // T2.2 as printed: (1/(2 sqrt 3)) (sup{0, 4})^2 = 16/(2 sqrt 3)
    CHECK(rhs_T22(kSquare, kCanonical, 0.0, 1.0, 2.0) ==
          doctest::Approx(16.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-12));
    CHECK(rhs_T22(kSquare, kCanonical, 0.0, 1.0, 2.0) ==
          doctest::Approx(4.618802153517006).epsilon(1e-12));
}

TEST_CASE("RHS formulas for f = exp(x) with the log-mean factors") {
    const double root_e = std::sqrt(std::exp(1.0));
    CHECK(rhs_Tz(kExp, kCanonical, 0.0, 1.0) ==
          doctest::Approx((root_e - 1.0) * (root_e - 1.0)).epsilon(1e-12));
    CHECK(rhs_Tz(kExp, kCanonical, 0.0, 1.0) == doctest::Approx(0.42083928705878894).epsilon(1e-12));
    CHECK(rhs_Tfd(kExp, kCanonical, 0.0, 1.0, 2.0, 2.0) ==
          doctest::Approx(std::sqrt(std::exp(1.0) - 1.0) / (2.0 * std::sqrt(3.0))).epsilon(1e-12));
    CHECK(rhs_Tfd(kExp, kCanonical, 0.0, 1.0, 2.0, 2.0) ==
          doctest::Approx(0.37840474676143678).epsilon(1e-12));
    CHECK(rhs_T31(kExp, kCanonical, 0.0, 1.0) ==
          doctest::Approx((1.0 + std::exp(1.0)) / 8.0).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(rhs_t32_formula(1.0, 1.0, 1.0, 1.0), ParameterError);
    CHECK_THROWS_AS(rhs_t32_formula(1.0, 1.0, 1.0, 0.5), ParameterError);
    CHECK_THROWS_AS(rhs_t34_formula(1.0, 1.0, 1.0, 0.9), ParameterError);
    CHECK_THROWS_AS(rhs_tfd_formula(1.0, 1.0, 2.0, 3.0, 3.0), ParameterError);  // not conjugate
    CHECK_THROWS_AS(rhs_tz_formula(1.0, 0.0, 1.0), DomainError);  // zero derivative endpoint
    CHECK_THROWS_AS(rhs_t22_formula(1.0, 1.0, 1.0, 1.0), ParameterError);
    CHECK_NOTHROW(rhs_tfd_formula(1.0, 1.0, 2.0, 2.0, 2.0));
}

TEST_CASE("algebraic identities of the formulas") {
    SplitMix64 rng(41u);
    for (int i = 0; i < 200; ++i) {
        const double e = rng.uniform(0.01, 3.0);
        const double A = rng.uniform(0.0, 10.0);
        const double B = rng.uniform(0.0, 10.0);

        // q = 1 reductions collapse to the T3.1 formula
        const double t31 = rhs_t31_formula(e, A, B);
        CHECK(std::fabs(rhs_t34_formula(e, A, B, 1.0) - t31) <= 1e-12 * std::max(1.0, t31));
        CHECK(std::fabs(rhs_t35_formula(e, A, B, 1.0) - t31) <= 1e-12 * std::max(1.0, t31));

        // relaxation order (power-sum subadditivity)
        const double p = rng.uniform(1.0001, 10.0);
        const double q = rng.uniform(1.0, 10.0);
        CHECK(rhs_t32_formula(e, A, B, p) <= rhs_t33_formula(e, A, B, p) * (1.0 + 1e-12) + 1e-15);
        CHECK(rhs_t34_formula(e, A, B, q) <= rhs_t35_formula(e, A, B, q) * (1.0 + 1e-12) + 1e-15);

        // equal endpoint magnitudes: T3.2 collapses to (e c / 2)(p+1)^(-1/p),
        // every T3.4 power mean equals c
        const double c = rng.uniform(0.1, 5.0);
        CHECK(rhs_t32_formula(e, c, c, p) ==
              doctest::Approx(0.5 * e * c * std::pow(p + 1.0, -1.0 / p)).epsilon(1e-12));
        CHECK(rhs_t34_formula(e, c, c, q) == doctest::Approx(e * c / 4.0).epsilon(1e-12));
    }
}

TEST_CASE("log-mean degenerate limits and continuity across the switch") {
    // |f'(a)| = |f'(b)| = c: the analytic limit is e c / 4
    CHECK(rhs_tz_formula(2.0, 3.0, 3.0) == doctest::Approx(1.5).epsilon(1e-15));
    // cross-check just off the limit
    CHECK(rhs_tz_formula(2.0, 3.0, 3.0 * (1.0 + 1e-6)) == doctest::Approx(1.5).epsilon(1e-5));

    // Tfd ratio limit: (q/2) A^(q/2); with A = B = c, q = 2, p = 2 the value
    // is e c / (2 sqrt 3)
    const double c = 1.7;
    CHECK(rhs_tfd_formula(1.0, c, c, 2.0, 2.0) ==
          doctest::Approx(c / (std::sqrt(2.0) * std::sqrt(3.0) * std::sqrt(2.0))).epsilon(1e-12));

    // acceptance-grade continuity ladder at |f'(a)| = 1
    struct Step {
        double delta, rel_tol;
    };
    for (const Step s : {Step{1e-4, 1e-3}, Step{1e-6, 1e-5}, Step{1e-10, 1e-9}}) {
        const double v = rhs_tz_formula(1.0, 1.0, 1.0 + s.delta);
        CHECK(std::isfinite(v));
        CHECK(std::fabs(v - 0.25) <= s.rel_tol * 0.25);
    }

    // values straddling the switch differ by < 1e-6 relative
    const double just_above = rhs_tz_formula(1.0, 1.0, std::exp(1.1e-8));
    const double just_below = rhs_tz_formula(1.0, 1.0, std::exp(0.9e-8));
    CHECK(std::fabs(just_above - just_below) <= 1e-6 * 0.25);
    const double fd_above = rhs_tfd_formula(1.0, 1.0, std::exp(1.1e-8), 2.0, 2.0);
    const double fd_below = rhs_tfd_formula(1.0, 1.0, std::exp(0.9e-8), 2.0, 2.0);
    CHECK(std::fabs(fd_above - fd_below) <= 1e-6 * std::fabs(fd_below));
}

TEST_CASE("classical variants equal the eta formulas at eta = v - u") {
    CHECK(rhs_classical(kSquare, 0.0, 1.0, TheoremId::T12) == doctest::Approx(0.25).epsilon(1e-15));
    SplitMix64 rng(5u);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.uniform(-1.0, 0.4);
        const double b = a + rng.uniform(0.05, 1.5);
        const double t12 = rhs_classical(kExp, a, b, TheoremId::T12);
        CHECK(std::fabs(rhs_T31(kExp, kCanonical, a, b) - t12) <= 1e-12 * t12);
        const double cq = rhs_classical(kExp, a, b, TheoremId::Cq);
        CHECK(std::fabs(rhs_Tz(kExp, kCanonical, a, b) - cq) <= 1e-12 * cq);
        const double cq1 = rhs_classical(kExp, a, b, TheoremId::Cq1, 2.0, 2.0);
        CHECK(std::fabs(rhs_Tfd(kExp, kCanonical, a, b, 2.0, 2.0) - cq1) <= 1e-12 * cq1);
    }
}

TEST_CASE("integration-by-parts identity residual") {
    GapResult linear = hh_identity_residual(ScalarFunction::from_expression("x"), kCanonical,
                                            -0.7, 1.3);
    CHECK(linear.value <= 1e-12);

    GapResult quad = hh_identity_residual(kSquare, kCanonical, 0.0, 1.0);
    CHECK(quad.value <= 1e-10);

    GapResult trig = hh_identity_residual(ScalarFunction::from_expression("sin(x)"), kCanonical,
                                          0.0, std::acos(-1.0) / 2.0);
    CHECK(trig.value <= 1e-8);

    // residual stays within 10x the propagated budget on smooth functions
    for (const char* src : {"x^3 - x", "exp(x)", "cos(x) + x^2"}) {
        GapResult r = hh_identity_residual(ScalarFunction::from_expression(src), kCanonical,
                                           -0.5, 0.9);
        CHECK(r.value <= 10.0 * r.error + 1e-12);
    }
}

TEST_CASE("tight kernel values and domination") {
    // |f'| = 2x on [0,1]: kernel = 1/12 + 1/6 = 1/4, equal to the T3.1 RHS
    GapResult k = tight_kernel(kSquare, kCanonical, 0.0, 1.0);
    CHECK(std::fabs(k.value - 0.25) <= 1e-10);

    // constant |f'| = c: kernel = e c / 4
    ScalarFunction slope = ScalarFunction::from_expression("3*x - 1");
    GapResult ks = tight_kernel(slope, kCanonical, -0.5, 1.5);
    CHECK(std::fabs(ks.value - 2.0 * 3.0 / 4.0) <= 1e-10);
    // matches the Tz degenerate limit for constant |f'|
    CHECK(std::fabs(ks.value - rhs_Tz(slope, kCanonical, -0.5, 1.5)) <= 1e-9);

    ScalarFunction flat = ScalarFunction::from_expression("5 + 0*x");
    CHECK(tight_kernel(flat, kCanonical, 0.0, 1.0).value <= 1e-12);

    // kernel domination for |f'|-preinvex instances:
    //   midpoint_gap <= kernel <= every midpoint-bound RHS
    struct Inst {
        const char* src;
        double lo, hi;
    };
    const Inst instances[] = {
        {"x^2", -1.0, 1.0},
        {"exp(x)", -1.0, 1.0},
        {"(exp(x) + exp(-x))/2", -1.0, 1.0},
        {"x^2 + 3*x", 0.0, 2.0},
    };
    SplitMix64 rng(11u);
    for (const Inst& inst : instances) {
        ScalarFunction f = ScalarFunction::from_expression(inst.src);
        auto habs = [&f](double x) { return std::fabs(f.deriv_at(x)); };
        const PowerCertRequest req[] = {{1.0, ConvexClass::Preinvex}};
        auto cert = classify_powers(habs, kCanonical, inst.lo, inst.hi, req, Grid3{33, 33, 17});
        REQUIRE(cert[0].cert.certified);
        for (int i = 0; i < 10; ++i) {
            const double a = rng.uniform(inst.lo, inst.hi - 0.05);
            const double b = a + rng.uniform(0.05, inst.hi - a);
            GapResult gap = midpoint_gap(f, kCanonical, a, b);
            GapResult kernel = tight_kernel(f, kCanonical, a, b);
            CHECK(gap.value <= kernel.value + gap.error + kernel.error + 1e-9);
            for (double p : {1.1, 2.0, 5.0, 10.0}) {
                CHECK(kernel.value <= rhs_T32(f, kCanonical, a, b, p) + kernel.error + 1e-9);
                CHECK(kernel.value <= rhs_T33(f, kCanonical, a, b, p) + kernel.error + 1e-9);
            }
            for (double q : {1.0, 2.0, 10.0}) {
                CHECK(kernel.value <= rhs_T34(f, kCanonical, a, b, q) + kernel.error + 1e-9);
                CHECK(kernel.value <= rhs_T35(f, kCanonical, a, b, q) + kernel.error + 1e-9);
            }
            CHECK(kernel.value <= rhs_T31(f, kCanonical, a, b) + kernel.error + 1e-9);
        }
    }
}

TEST_CASE("scale covariance in the displacement") {
    for (double c : {0.5, 2.0, 3.7}) {
        EtaMap scaled = EtaMap::scalar(std::to_string(c) + "*(v - u)");
        // T3.1 scales exactly for any f (endpoint derivatives are unchanged)
        const double base = rhs_T31(kExp, kCanonical, 0.1, 0.6);
        CHECK(std::fabs(rhs_T31(kExp, scaled, 0.1, 0.6) - c * base) <= 1e-12 * c * base);
        // the kernel scales for constant |f'|
        ScalarFunction slope = ScalarFunction::from_expression("2*x");
        const double k1 = tight_kernel(slope, kCanonical, 0.0, 0.4).value;
        const double kc = tight_kernel(slope, scaled, 0.0, 0.4).value;
        CHECK(std::fabs(kc - c * k1) <= 1e-9 * std::max(1.0, c * k1));
    }
}

TEST_CASE("the four-value chain") {
    ChainEvaluation c = hh_chain_check(kSquare, kCanonical, 0.0, 1.0);
    CHECK(c.midpoint_value == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(c.mean_value == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(c.trapezoid_value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c.endpoint_mean == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c.holds);

    ChainEvaluation ce = hh_chain_check(kExp, kCanonical, 0.0, 1.0);
    CHECK(ce.midpoint_value == doctest::Approx(1.6487212707001281).epsilon(1e-12));
    CHECK(ce.mean_value == doctest::Approx(1.7182818284590452).epsilon(1e-10));
    CHECK(ce.trapezoid_value == doctest::Approx(1.8591409142295226).epsilon(1e-12));
    CHECK(ce.endpoint_mean == doctest::Approx(1.8591409142295226).epsilon(1e-12));
    CHECK(ce.holds);

    ScalarFunction flat = ScalarFunction::from_expression("4 + 0*x");
    ChainEvaluation cf = hh_chain_check(flat, kCanonical, -1.0, 1.0);
    CHECK(cf.midpoint_value == cf.endpoint_mean);
    CHECK(std::fabs(cf.min_slack) <= 1e-10);
    CHECK(cf.holds);
}

TEST_CASE("verify composes LHS, RHS and the verdict rule") {
    BoundEvaluation t31 = verify(TheoremId::T31, kSquare, kCanonical, 0.0, 1.0);
    CHECK(t31.verdict == Verdict::Holds);
    CHECK(t31.lhs == doctest::Approx(1.0 / 12.0).epsilon(1e-9));
    CHECK(t31.rhs == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(t31.margin == doctest::Approx(0.25 - 1.0 / 12.0).epsilon(1e-9));
    CHECK_FALSE(t31.as_printed);

    BoundEvaluation t34 = verify(TheoremId::T34, kSquare, kCanonical, 0.0, 1.0, {{}, 2.0});
    CHECK(t34.verdict == Verdict::Holds);
    CHECK(t34.rhs == doctest::Approx(0.34846171252933795).epsilon(1e-12));

    BoundEvaluation tz = verify(TheoremId::Tz, kExp, kCanonical, 0.0, 1.0);
    CHECK(tz.verdict == Verdict::Holds);
    CHECK(tz.lhs == doctest::Approx(0.06956055775891709).epsilon(1e-9));
    CHECK(tz.rhs == doctest::Approx(0.42083928705878894).epsilon(1e-12));

    // trapezoid-side theorems carry the corrected-LHS note
    BoundEvaluation t23 = verify(TheoremId::T23, kSquare, kCanonical, 0.0, 1.0);
    CHECK(t23.lhs == doctest::Approx(1.0 / 6.0).epsilon(1e-9));
    CHECK(t23.rhs == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t23.verdict == Verdict::Holds);
    CHECK(t23.note.find("trapezoid") != std::string::npos);
    BoundEvaluation t22 = verify(TheoremId::T22, kSquare, kCanonical, 0.0, 1.0, {2.0, {}});
    CHECK(t22.as_printed);
    CHECK(t22.verdict == Verdict::Holds);

    // chain row: margin is the smallest pairwise slack
    BoundEvaluation chain = verify(TheoremId::HHchain, kSquare, kCanonical, 0.0, 1.0);
    CHECK(chain.verdict == Verdict::Holds);
    REQUIRE(chain.chain.has_value());
    CHECK(chain.margin == doctest::Approx(chain.chain->min_slack));

    // conjugate-parameter resolution
    BoundEvaluation fd = verify(TheoremId::Tfd, kExp, kCanonical, 0.0, 1.0, {{}, 2.0});
    CHECK(*fd.params.p == doctest::Approx(2.0));
    CHECK(fd.rhs == doctest::Approx(0.37840474676143678).epsilon(1e-12));
    CHECK_THROWS_AS(verify(TheoremId::T32, kSquare, kCanonical, 0.0, 1.0, {0.5, {}}),
                    ParameterError);
    CHECK_THROWS_AS(verify(TheoremId::T32, kSquare, kCanonical, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(verify(TheoremId::Eq1, kSquare, kCanonical, 0.0, 1.0), ParameterError);

    // a genuine as-printed violation: Tfd on exp(5x) over [0,1]
    ScalarFunction steep = ScalarFunction::from_expression("exp(5*x)");
    BoundEvaluation viol = verify(TheoremId::Tfd, steep, kCanonical, 0.0, 1.0, {2.0, 2.0});
    CHECK(viol.verdict == Verdict::Violated);
    CHECK(viol.as_printed);
    CHECK(viol.margin < 0.0);
    // the sound kernel reference still dominates the gap
    GapResult kernel = tight_kernel(steep, kCanonical, 0.0, 1.0);
    CHECK(viol.lhs <= kernel.value + kernel.error + viol.error_budget + 1e-9);
}
