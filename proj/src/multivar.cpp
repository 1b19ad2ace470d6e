#include "multivar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hhinvex {

namespace {

double grid_point(double lo, double hi, int i, int n) {
    if (n <= 1) return lo;
    if (i == n - 1) return hi;
    return lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(n - 1));
}

}  // namespace

VectorFunction VectorFunction::from_expression(const std::string& source, int dim) {
    if (dim < 1) throw ParameterError("function dimension must be >= 1");
    std::vector<std::string> names;
    for (int i = 1; i <= dim; ++i) names.push_back("x" + std::to_string(i));
    Expression e = Expression::parse(source, names);
    VectorFunction f;
    f.src = source;
    f.dim = dim;
    f.value = [e](std::span<const double> p) { return e.evaluate(p); };
    return f;
}

EtaPath path_restriction(const VectorFunction& f, std::span<const double> x,
                         std::span<const double> y, const EtaMap& eta,
                         const std::optional<Box>& domain, int containment_samples) {
    const int n = f.dim;
    if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n ||
        eta.dim() != n)
        throw ParameterError("point / eta / function dimension mismatch");

    EtaPath path;
    path.dim = n;
    path.x.assign(x.begin(), x.end());
    path.y.assign(y.begin(), y.end());
    path.displacement.resize(static_cast<std::size_t>(n));
    eta.eval(y, x, path.displacement);
    path.v.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        path.v[static_cast<std::size_t>(i)] =
            path.x[static_cast<std::size_t>(i)] + path.displacement[static_cast<std::size_t>(i)];

    if (domain) {
        const double tau = domain_tolerance(*domain);
        std::vector<double> p(static_cast<std::size_t>(n));
        for (int s = 0; s < containment_samples; ++s) {
            const double t = grid_point(0.0, 1.0, s, containment_samples);
            for (int i = 0; i < n; ++i)
                p[static_cast<std::size_t>(i)] =
                    path.x[static_cast<std::size_t>(i)] +
                    t * path.displacement[static_cast<std::size_t>(i)];
            for (int i = 0; i < n; ++i) {
                if (p[static_cast<std::size_t>(i)] < domain->lo[static_cast<std::size_t>(i)] - tau ||
                    p[static_cast<std::size_t>(i)] > domain->hi[static_cast<std::size_t>(i)] + tau)
                    throw DomainError("eta-path exits the domain at t = " + std::to_string(t));
            }
        }
    }

    auto base = path.x;
    auto disp = path.displacement;
    auto fv = f.value;
    path.phi = [base, disp, fv, n](double t) {
        std::vector<double> p(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            p[static_cast<std::size_t>(i)] =
                base[static_cast<std::size_t>(i)] + t * disp[static_cast<std::size_t>(i)];
        return fv(p);
    };
    return path;
}

Box path_bounding_box(const EtaPath& path, int samples) {
    const int n = path.dim;
    Box box;
    box.lo.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    box.hi.assign(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
    auto absorb = [&](const std::vector<double>& p) {
        for (int i = 0; i < n; ++i) {
            box.lo[static_cast<std::size_t>(i)] =
                std::min(box.lo[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i)]);
            box.hi[static_cast<std::size_t>(i)] =
                std::max(box.hi[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i)]);
        }
    };
    absorb(path.x);
    absorb(path.y);
    absorb(path.v);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int s = 0; s < samples; ++s) {
        const double t = grid_point(0.0, 1.0, s, samples);
        for (int i = 0; i < n; ++i)
            p[static_cast<std::size_t>(i)] = path.x[static_cast<std::size_t>(i)] +
                                             t * path.displacement[static_cast<std::size_t>(i)];
        absorb(p);
    }
    return box;
}

// ---------------------------------------------------------------------------
// PathAccumulator

PathAccumulator::PathAccumulator(std::function<double(double)> phi, double quad_tol, int cells)
    : phi_(std::move(phi)), cells_(cells) {
    if (cells_ < 1) throw ParameterError("accumulator needs at least one cell");
    cell_tol_ = quad_tol / cells_;
    prefix_.resize(static_cast<std::size_t>(cells_) + 1, 0.0);
    for (int k = 0; k < cells_; ++k) {
        const double lo = static_cast<double>(k) / cells_;
        const double hi = static_cast<double>(k + 1) / cells_;
        QuadratureResult q = integrate(phi_, lo, hi, cell_tol_);
        prefix_[static_cast<std::size_t>(k) + 1] = prefix_[static_cast<std::size_t>(k)] + q.value;
        total_error_ += q.error;
        converged_ = converged_ && q.converged;
    }
    // One partial-cell integration per lookup contributes at most cell_tol_.
    total_error_ += cell_tol_;
}

double PathAccumulator::operator()(double t) const {
    if (t < 0.0 || t > 1.0) throw ParameterError("accumulator argument outside [0,1]");
    if (t == 0.0) return 0.0;
    int k = std::min(static_cast<int>(t * cells_), cells_ - 1);
    const double cell_lo = static_cast<double>(k) / cells_;
    QuadratureResult q = integrate(phi_, cell_lo, t, cell_tol_);
    return prefix_[static_cast<std::size_t>(k)] + q.value;
}

// ---------------------------------------------------------------------------
// Log-convexity certification on [0,1]

ClassCertificate certify_log_convex(const std::function<double(double)>& phi, int grid,
                                    double tol) {
    if (grid < 2) throw ParameterError("certification grid must be >= 2");
    // Log-convexity of phi(t) on [0,1] is exactly log-preinvexity of phi with
    // respect to the canonical displacement on the unit interval:
    //   phi((1-l) t1 + l t2) <= phi(t1)^(1-l) phi(t2)^l.
    static const EtaMap canonical = EtaMap::scalar("v - u");
    Grid3 g{grid, grid, grid};
    return classify(phi, canonical, 0.0, 1.0, ConvexClass::LogPreinvex, g, tol);
}

ClassCertificate check_path_logpreinvex(const VectorFunction& f, std::span<const double> x,
                                        std::span<const double> y, const EtaMap& eta, int grid,
                                        double tol, int condition_c_grid) {
    EtaPath path = path_restriction(f, x, y, eta);
    Box box = path_bounding_box(path);
    ConditionCReport cc = check_condition_c(eta, box, condition_c_grid);
    if (!cc.pass)
        throw PreconditionError(
            "Condition C fails on the path bounding box (worst residual " +
            std::to_string(cc.worst_residual) +
            "); the path equivalence requires it, refusing to certify");
    return certify_log_convex(path.phi, grid, tol);
}

QPowerReport check_q_power_equivalence(const std::function<double(double)>& phi, double q,
                                       int grid, double tol) {
    if (!(q > 0.0)) throw ParameterError("q-power equivalence requires q > 0");
    if (grid < 2) throw ParameterError("equivalence grid must be >= 2");

    QPowerReport rep;
    rep.worst_log_margin_phi = -std::numeric_limits<double>::infinity();
    rep.worst_log_margin_phi_q = -std::numeric_limits<double>::infinity();

    for (int i1 = 0; i1 < grid; ++i1) {
        const double t1 = grid_point(0.0, 1.0, i1, grid);
        const double p1 = phi(t1);
        if (!(p1 > 0.0))
            throw PreconditionError("q-power equivalence requires phi > 0; phi(" +
                                    std::to_string(t1) + ") = " + std::to_string(p1));
        for (int i2 = 0; i2 < grid; ++i2) {
            const double t2 = grid_point(0.0, 1.0, i2, grid);
            const double p2 = phi(t2);
            for (int il = 0; il < grid; ++il) {
                const double l = grid_point(0.0, 1.0, il, grid);
                const double pm = phi((1.0 - l) * t1 + l * t2);
                const double m_phi = std::log(pm) - (1.0 - l) * std::log(p1) - l * std::log(p2);
                const double m_phi_q = std::log(std::pow(pm, q)) -
                                       (1.0 - l) * std::log(std::pow(p1, q)) -
                                       l * std::log(std::pow(p2, q));
                rep.max_scale_mismatch =
                    std::max(rep.max_scale_mismatch, std::fabs(m_phi_q - q * m_phi));
                if (m_phi > rep.worst_log_margin_phi) {
                    rep.worst_log_margin_phi = m_phi;
                    rep.witness_phi = {t1, t2, l};
                }
                if (m_phi_q > rep.worst_log_margin_phi_q) {
                    rep.worst_log_margin_phi_q = m_phi_q;
                    rep.witness_phi_q = {t1, t2, l};
                }
            }
        }
    }
    rep.phi_certified = rep.worst_log_margin_phi <= tol;
    rep.phi_q_certified = rep.worst_log_margin_phi_q <= q * tol + 1e-12;
    rep.consistent = rep.phi_certified == rep.phi_q_certified;
    return rep;
}

// ---------------------------------------------------------------------------
// Eq1 / Eq2

BoundEvaluation verify_multivar(TheoremId id, const VectorFunction& f, std::span<const double> x,
                                std::span<const double> y, const EtaMap& eta, double a, double b,
                                BoundParams params, double quad_tol, double tau_verify) {
    if (id != TheoremId::Eq1 && id != TheoremId::Eq2)
        throw ParameterError("verify_multivar handles Eq1 and Eq2 only");
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0))
        throw ParameterError("Eq1/Eq2 require a, b in the open interval (0,1)");
    if (!(a < b)) throw ParameterError("Eq1/Eq2 require a < b");
    if (id == TheoremId::Eq2) params = resolve_params(TheoremId::Eq2, params);

    // Certification gate (Proposition 5.1 route, Condition C included).
    ClassCertificate cert = check_path_logpreinvex(f, x, y, eta);
    if (!cert.certified)
        throw PreconditionError(
            "f is not log-preinvex-certified on the eta-path (worst margin " +
            std::to_string(cert.worst_margin) + ")");

    EtaPath path = path_restriction(f, x, y, eta);
    PathAccumulator accumulated(path.phi, quad_tol);

    const double mid = 0.5 * (a + b);
    QuadratureResult outer =
        integrate([&](double s) { return accumulated(s); }, a, b, quad_tol);
    const double lhs = std::fabs(outer.value / (b - a) - accumulated(mid));
    const double budget = outer.error / (b - a) + 2.0 * accumulated.total_error();

    const double phi_a = path.phi(a);
    const double phi_b = path.phi(b);
    double rhs;
    if (id == TheoremId::Eq1) {
        rhs = rhs_tz_formula(b - a, phi_a, phi_b);
    } else {
        rhs = rhs_tfd_formula(b - a, phi_a, phi_b, *params.p, *params.q);
    }

    BoundEvaluation ev;
    ev.id = id;
    ev.a = a;
    ev.b = b;
    ev.params = params;
    ev.eta_ba = b - a;
    ev.lhs = lhs;
    ev.rhs = rhs;
    ev.margin = rhs - lhs;
    ev.error_budget = budget;
    ev.as_printed = theorem_as_printed(id);
    ev.note = "LHS/RHS over the accumulated path integral Phi; phi(a), phi(b) stand in for "
              "|Phi'(a)|, |Phi'(b)|";
    if (!outer.converged || !accumulated.converged()) {
        ev.verdict = Verdict::Inconclusive;
        ev.note += "; quadrature did not converge";
        return ev;
    }
    ev.verdict = ev.margin >= -budget ? Verdict::Holds
                 : ev.margin < -budget - tau_verify ? Verdict::Violated
                                                    : Verdict::Inconclusive;
    return ev;
}

}  // namespace hhinvex
