#include "bounds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace hhinvex {

namespace {

struct TheoremInfo {
    TheoremId id;
    const char* name;
    bool needs_p, needs_q, classical, as_printed;
};

constexpr std::array<TheoremInfo, 15> kTheorems = {{
    {TheoremId::HHchain, "HHchain", false, false, false, false},
    {TheoremId::T12, "T1.2", false, false, true, false},
    {TheoremId::T22, "T2.2", true, false, false, true},
    {TheoremId::T23, "T2.3", false, false, false, false},
    {TheoremId::T31, "T3.1", false, false, false, false},
    {TheoremId::T32, "T3.2", true, false, false, false},
    {TheoremId::T33, "T3.3", true, false, false, false},
    {TheoremId::T34, "T3.4", false, true, false, false},
    {TheoremId::T35, "T3.5", false, true, false, false},
    {TheoremId::Tz, "Tz", false, false, false, false},
    {TheoremId::Tfd, "Tfd", true, true, false, true},
    {TheoremId::Cq, "Cq", false, false, true, false},
    {TheoremId::Cq1, "Cq1", true, true, true, true},
    {TheoremId::Eq1, "Eq1", false, false, false, false},
    {TheoremId::Eq2, "Eq2", true, true, false, true},
}};

const TheoremInfo& info(TheoremId id) {
    for (const auto& t : kTheorems)
        if (t.id == id) return t;
    throw ParameterError("unknown theorem id");
}

void require_positive_derivatives(double a_mag, double b_mag) {
    if (!(a_mag > 0.0) || !(b_mag > 0.0))
        throw DomainError("log-mean bound requires |f'| > 0 at both endpoints");
}

// log(B) - log(A), computed as log(B/A) to avoid cancellation near the
// degenerate-limit switch.
double log_gap(double a_mag, double b_mag) { return std::log(b_mag / a_mag); }

double check_finite_value(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string("non-finite ") + what);
    return v;
}

}  // namespace

const char* theorem_name(TheoremId id) { return info(id).name; }

TheoremId theorem_from_name(const std::string& name) {
    for (const auto& t : kTheorems)
        if (name == t.name) return t.id;
    throw ParameterError("unknown theorem '" + name + "'");
}

bool theorem_needs_p(TheoremId id) { return info(id).needs_p; }
bool theorem_needs_q(TheoremId id) { return info(id).needs_q; }
bool theorem_is_classical(TheoremId id) { return info(id).classical; }
bool theorem_as_printed(TheoremId id) { return info(id).as_printed; }

double eta_displacement(const EtaMap& eta, double a, double b) {
    const double e = eta.eval1(b, a);
    if (!(e > 0.0))
        throw OrientationError("eta(b,a) = " + std::to_string(e) +
                               " must be positive (the bounds integrate over [a, a + eta(b,a)])");
    return e;
}

// ---------------------------------------------------------------------------
// Gaps and kernel

namespace {

GapResult midpoint_gap_over(const ScalarFunction& f, double a, double e, double quad_tol) {
    QuadratureResult q = integrate(f.value, a, a + e, quad_tol);
    GapResult g;
    g.value = std::fabs(q.value / e - f.value(a + 0.5 * e));
    g.error = q.error / e;
    g.converged = q.converged;
    return g;
}

}  // namespace

GapResult midpoint_gap(const ScalarFunction& f, const EtaMap& eta, double a, double b,
                       double quad_tol) {
    return midpoint_gap_over(f, a, eta_displacement(eta, a, b), quad_tol);
}

GapResult midpoint_gap_classical(const ScalarFunction& f, double a, double b, double quad_tol) {
    if (!(a < b)) throw OrientationError("classical bounds require a < b");
    return midpoint_gap_over(f, a, b - a, quad_tol);
}

GapResult trapezoid_gap(const ScalarFunction& f, const EtaMap& eta, double a, double b,
                        double quad_tol) {
    const double e = eta_displacement(eta, a, b);
    QuadratureResult q = integrate(f.value, a, a + e, quad_tol);
    GapResult g;
    g.value = std::fabs(0.5 * (f.value(a) + f.value(a + e)) - q.value / e);
    g.error = q.error / e;
    g.converged = q.converged;
    return g;
}

GapResult tight_kernel(const ScalarFunction& f, const EtaMap& eta, double a, double b,
                       double quad_tol) {
    const double e = eta_displacement(eta, a, b);
    auto lower = [&](double t) { return t * std::fabs(f.deriv_at(a + t * e)); };
    auto upper = [&](double t) { return (1.0 - t) * std::fabs(f.deriv_at(a + t * e)); };
    QuadratureResult q1 = integrate(lower, 0.0, 0.5, quad_tol);
    QuadratureResult q2 = integrate(upper, 0.5, 1.0, quad_tol);
    GapResult g;
    g.value = e * (q1.value + q2.value);
    g.error = e * (q1.error + q2.error);
    g.converged = q1.converged && q2.converged;
    return g;
}

GapResult hh_identity_residual(const ScalarFunction& f, const EtaMap& eta, double a, double b,
                               double quad_tol) {
    const double e = eta_displacement(eta, a, b);
    auto lower = [&](double t) { return t * f.deriv_at(a + t * e); };
    auto upper = [&](double t) { return (t - 1.0) * f.deriv_at(a + t * e); };
    QuadratureResult q1 = integrate(lower, 0.0, 0.5, quad_tol);
    QuadratureResult q2 = integrate(upper, 0.5, 1.0, quad_tol);
    QuadratureResult qf = integrate(f.value, a, a + e, quad_tol);
    const double left = q1.value + q2.value;
    const double right = f.value(a + 0.5 * e) / e - qf.value / (e * e);
    GapResult g;
    g.value = std::fabs(left - right);
    g.error = q1.error + q2.error + qf.error / (e * e);
    g.converged = q1.converged && q2.converged && qf.converged;
    return g;
}

// ---------------------------------------------------------------------------
// RHS formulas

double rhs_t31_formula(double e, double a_mag, double b_mag) {
    return e / 8.0 * (a_mag + b_mag);
}

double rhs_t32_formula(double e, double a_mag, double b_mag, double p) {
    if (!(p > 1.0)) throw ParameterError("T3.2 requires p > 1");
    const double r = p / (p - 1.0);
    const double s = (p - 1.0) / p;
    const double ar = std::pow(a_mag, r), br = std::pow(b_mag, r);
    return e / 16.0 * std::pow(4.0 / (p + 1.0), 1.0 / p) *
           (std::pow(3.0 * ar + br, s) + std::pow(ar + 3.0 * br, s));
}

double rhs_t33_formula(double e, double a_mag, double b_mag, double p) {
    if (!(p > 1.0)) throw ParameterError("T3.3 requires p > 1");
    const double s = (p - 1.0) / p;
    return e / 16.0 * std::pow(4.0 / (p + 1.0), 1.0 / p) * (std::pow(3.0, s) + 1.0) *
           (a_mag + b_mag);
}

double rhs_t34_formula(double e, double a_mag, double b_mag, double q) {
    if (!(q >= 1.0)) throw ParameterError("T3.4 requires q >= 1");
    const double aq = std::pow(a_mag, q), bq = std::pow(b_mag, q);
    return e / 8.0 *
           (std::pow((2.0 * aq + bq) / 3.0, 1.0 / q) + std::pow((aq + 2.0 * bq) / 3.0, 1.0 / q));
}

double rhs_t35_formula(double e, double a_mag, double b_mag, double q) {
    if (!(q >= 1.0)) throw ParameterError("T3.5 requires q >= 1");
    return e / 8.0 * ((std::pow(2.0, 1.0 / q) + 1.0) / std::pow(3.0, 1.0 / q)) * (a_mag + b_mag);
}

double rhs_tz_formula(double e, double a_mag, double b_mag) {
    require_positive_derivatives(a_mag, b_mag);
    const double gap = log_gap(a_mag, b_mag);
    if (std::fabs(gap) < kLogMeanEps) return e * a_mag / 4.0;  // analytic limit
    const double ratio = (std::sqrt(b_mag) - std::sqrt(a_mag)) / gap;
    return e * ratio * ratio;
}

double rhs_tfd_formula(double e, double a_mag, double b_mag, double p, double q) {
    if (!(p > 1.0)) throw ParameterError("Tfd requires p > 1");
    if (!(q >= 1.0)) throw ParameterError("Tfd requires q >= 1");
    if (std::fabs(1.0 / p + 1.0 / q - 1.0) > 1e-12)
        throw ParameterError("Tfd requires conjugate exponents: 1/p + 1/q = 1");
    require_positive_derivatives(a_mag, b_mag);
    const double gap = log_gap(a_mag, b_mag);
    double ratio;
    if (std::fabs(gap) < kLogMeanEps) {
        ratio = 0.5 * q * std::pow(a_mag, 0.5 * q);  // limit of (B^{q/2}-A^{q/2})/(log B - log A)
    } else {
        ratio = (std::pow(b_mag, 0.5 * q) - std::pow(a_mag, 0.5 * q)) / gap;
    }
    const double denom =
        std::pow(2.0, 1.0 / p) * std::pow(p + 1.0, 1.0 / p) * std::pow(q, 1.0 / q);
    return e * std::sqrt(a_mag) / denom * std::pow(ratio, 1.0 / q);
}

double rhs_t22_formula(double e, double a_mag, double b_mag, double p) {
    if (!(p > 1.0)) throw ParameterError("T2.2 requires p > 1");
    const double r = p / (p - 1.0);
    // As printed: the sup of the r-th powers is itself raised to r again.
    const double sup = std::max(std::pow(a_mag, r), std::pow(b_mag, r));
    return e / (2.0 * std::pow(p + 1.0, 1.0 / p)) * std::pow(sup, r);
}

double rhs_t23_formula(double e, double a_mag, double b_mag) {
    return e / 4.0 * std::max(a_mag, b_mag);
}

// ---------------------------------------------------------------------------
// (f, eta, a, b) wrappers

namespace {

struct Endpoints {
    double e, a_mag, b_mag;
};

Endpoints endpoints(const ScalarFunction& f, const EtaMap& eta, double a, double b) {
    return {eta_displacement(eta, a, b), std::fabs(f.deriv_at(a)), std::fabs(f.deriv_at(b))};
}

}  // namespace

double rhs_T31(const ScalarFunction& f, const EtaMap& eta, double a, double b) {
    auto [e, am, bm] = endpoints(f, eta, a, b);
    return rhs_t31_formula(e, am, bm);
}
double rhs_T32(const ScalarFunction& f, const EtaMap& eta, double a, double b, double p) {
    auto [e, am, bm] = endpoints(f, eta, a, b);
    return rhs_t32_formula(e, am, bm, p);
}
double rhs_T33(const ScalarFunction& f, const EtaMap& eta, double a, double b, double p) {
    auto [e, am, bm] = endpoints(f, eta, a, b);
    return rhs_t33_formula(e, am, bm, p);
}
double rhs_T34(const ScalarFunction& f, const EtaMap& eta, double a, double b, double q) {
    auto [e, am, bm] = endpoints(f, eta, a, b);
    return rhs_t34_formula(e, am, bm, q);
}
double rhs_T35(const ScalarFunction& f, const EtaMap& eta, double a, double b, double q) {
    auto [e, am, bm] = endpoints(f, eta, a, b);
    return rhs_t35_formula(e, am, bm, q);
}
double rhs_Tz(const ScalarFunction& f, const EtaMap& eta, double a, double b) {
    auto [e, am, bm] = endpoints(f, eta, a, b);
    return rhs_tz_formula(e, am, bm);
}
double rhs_Tfd(const ScalarFunction& f, const EtaMap& eta, double a, double b, double p,
               double q) {
    auto [e, am, bm] = endpoints(f, eta, a, b);
    return rhs_tfd_formula(e, am, bm, p, q);
}
double rhs_T22(const ScalarFunction& f, const EtaMap& eta, double a, double b, double p) {
    auto [e, am, bm] = endpoints(f, eta, a, b);
    return rhs_t22_formula(e, am, bm, p);
}
double rhs_T23(const ScalarFunction& f, const EtaMap& eta, double a, double b) {
    auto [e, am, bm] = endpoints(f, eta, a, b);
    return rhs_t23_formula(e, am, bm);
}

double rhs_classical(const ScalarFunction& f, double a, double b, TheoremId variant,
                     std::optional<double> p, std::optional<double> q) {
    if (!(a < b)) throw OrientationError("classical bounds require a < b");
    const double e = b - a;
    const double am = std::fabs(f.deriv_at(a));
    const double bm = std::fabs(f.deriv_at(b));
    switch (variant) {
        case TheoremId::T12:
            // (b-a)/4 * (|f'(a)|+|f'(b)|)/2, identical to the T3.1 formula
            // with displacement b-a.
            return (b - a) / 4.0 * 0.5 * (am + bm);
        case TheoremId::Cq:
            return rhs_tz_formula(e, am, bm);
        case TheoremId::Cq1: {
            if (!p || !q) throw ParameterError("Cq1 requires p and q");
            return rhs_tfd_formula(e, am, bm, *p, *q);
        }
        default:
            throw ParameterError("not a classical variant");
    }
}

// ---------------------------------------------------------------------------
// Chain

ChainEvaluation hh_chain_check(const ScalarFunction& f, const EtaMap& eta, double a, double b,
                               double quad_tol) {
    const double e = eta_displacement(eta, a, b);
    QuadratureResult q = integrate(f.value, a, a + e, quad_tol);
    ChainEvaluation c;
    c.midpoint_value = f.value(a + 0.5 * e);
    c.mean_value = q.value / e;
    c.trapezoid_value = 0.5 * (f.value(a) + f.value(a + e));
    c.endpoint_mean = 0.5 * (f.value(a) + f.value(b));
    // Budget: quadrature on the mean value plus a rounding floor. The floor
    // matters at the t = 1 link, where a + eta(b,a) reaches b only up to an
    // ulp and the slack is exactly zero in the reals.
    const double scale = std::max({1.0, std::fabs(c.midpoint_value), std::fabs(c.mean_value),
                                   std::fabs(c.trapezoid_value), std::fabs(c.endpoint_mean)});
    c.quad_error =
        q.error / e + 64.0 * std::numeric_limits<double>::epsilon() * scale;
    c.min_slack = std::min({c.mean_value - c.midpoint_value, c.trapezoid_value - c.mean_value,
                            c.endpoint_mean - c.trapezoid_value});
    c.holds = c.min_slack >= -c.quad_error;
    return c;
}

// ---------------------------------------------------------------------------
// Verify

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "holds";
        case Verdict::Violated: return "violated";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

BoundParams resolve_params(TheoremId id, BoundParams params) {
    const bool needs_p = theorem_needs_p(id);
    const bool needs_q = theorem_needs_q(id);
    if (!needs_p) params.p.reset();
    if (!needs_q) params.q.reset();
    if (needs_p && needs_q) {
        // Conjugate pair: fill in the missing exponent.
        if (params.p && !params.q) {
            if (!(*params.p > 1.0)) throw ParameterError("conjugate exponents require p > 1");
            params.q = *params.p / (*params.p - 1.0);
        } else if (params.q && !params.p) {
            if (!(*params.q > 1.0)) throw ParameterError("conjugate exponents require q > 1");
            params.p = *params.q / (*params.q - 1.0);
        } else if (!params.p && !params.q) {
            throw ParameterError(std::string(theorem_name(id)) + " requires p and/or q");
        }
        if (std::fabs(1.0 / *params.p + 1.0 / *params.q - 1.0) > 1e-12)
            throw ParameterError("1/p + 1/q must equal 1");
        if (!(*params.p > 1.0)) throw ParameterError("p must exceed 1");
        if (!(*params.q >= 1.0)) throw ParameterError("q must be >= 1");
        return params;
    }
    if (needs_p) {
        if (!params.p) throw ParameterError(std::string(theorem_name(id)) + " requires p");
        if (!(*params.p > 1.0)) throw ParameterError("p must exceed 1");
    }
    if (needs_q) {
        if (!params.q) throw ParameterError(std::string(theorem_name(id)) + " requires q");
        if (!(*params.q >= 1.0)) throw ParameterError("q must be >= 1");
    }
    return params;
}

BoundEvaluation verify(TheoremId id, const ScalarFunction& f, const EtaMap& eta, double a,
                       double b, BoundParams params, double quad_tol, double tau_verify) {
    params = resolve_params(id, params);

    BoundEvaluation ev;
    ev.id = id;
    ev.a = a;
    ev.b = b;
    ev.params = params;
    ev.as_printed = theorem_as_printed(id);

    GapResult lhs{};
    double rhs = 0.0;
    switch (id) {
        case TheoremId::HHchain: {
            ChainEvaluation c = hh_chain_check(f, eta, a, b, quad_tol);
            ev.eta_ba = eta_displacement(eta, a, b);
            ev.chain = c;
            ev.lhs = c.midpoint_value;
            ev.rhs = c.endpoint_mean;
            ev.margin = c.min_slack;
            ev.error_budget = c.quad_error;
            ev.note = "margin is the smallest pairwise slack along the chain";
            ev.verdict = c.min_slack >= -c.quad_error ? Verdict::Holds
                         : c.min_slack < -c.quad_error - tau_verify ? Verdict::Violated
                                                                    : Verdict::Inconclusive;
            check_finite_value(ev.margin, "chain slack");
            return ev;
        }
        case TheoremId::T12:
        case TheoremId::Cq:
        case TheoremId::Cq1:
            lhs = midpoint_gap_classical(f, a, b, quad_tol);
            rhs = rhs_classical(f, a, b, id, params.p, params.q);
            ev.eta_ba = b - a;
            break;
        case TheoremId::T22:
            lhs = trapezoid_gap(f, eta, a, b, quad_tol);
            rhs = rhs_T22(f, eta, a, b, *params.p);
            ev.eta_ba = eta_displacement(eta, a, b);
            ev.note =
                "LHS is the corrected trapezoid-side gap; RHS keeps the printed double exponent";
            break;
        case TheoremId::T23:
            lhs = trapezoid_gap(f, eta, a, b, quad_tol);
            rhs = rhs_T23(f, eta, a, b);
            ev.eta_ba = eta_displacement(eta, a, b);
            ev.note = "LHS is the corrected trapezoid-side gap";
            break;
        case TheoremId::T31:
            lhs = midpoint_gap(f, eta, a, b, quad_tol);
            rhs = rhs_T31(f, eta, a, b);
            ev.eta_ba = eta_displacement(eta, a, b);
            break;
        case TheoremId::T32:
            lhs = midpoint_gap(f, eta, a, b, quad_tol);
            rhs = rhs_T32(f, eta, a, b, *params.p);
            ev.eta_ba = eta_displacement(eta, a, b);
            break;
        case TheoremId::T33:
            lhs = midpoint_gap(f, eta, a, b, quad_tol);
            rhs = rhs_T33(f, eta, a, b, *params.p);
            ev.eta_ba = eta_displacement(eta, a, b);
            break;
        case TheoremId::T34:
            lhs = midpoint_gap(f, eta, a, b, quad_tol);
            rhs = rhs_T34(f, eta, a, b, *params.q);
            ev.eta_ba = eta_displacement(eta, a, b);
            break;
        case TheoremId::T35:
            lhs = midpoint_gap(f, eta, a, b, quad_tol);
            rhs = rhs_T35(f, eta, a, b, *params.q);
            ev.eta_ba = eta_displacement(eta, a, b);
            break;
        case TheoremId::Tz:
            lhs = midpoint_gap(f, eta, a, b, quad_tol);
            rhs = rhs_Tz(f, eta, a, b);
            ev.eta_ba = eta_displacement(eta, a, b);
            break;
        case TheoremId::Tfd:
            lhs = midpoint_gap(f, eta, a, b, quad_tol);
            rhs = rhs_Tfd(f, eta, a, b, *params.p, *params.q);
            ev.eta_ba = eta_displacement(eta, a, b);
            break;
        case TheoremId::Eq1:
        case TheoremId::Eq2:
            throw ParameterError("Eq1/Eq2 take an eta-path; use verify_multivar");
    }

    ev.lhs = check_finite_value(lhs.value, "LHS");
    ev.rhs = check_finite_value(rhs, "RHS");
    ev.margin = ev.rhs - ev.lhs;
    ev.error_budget = lhs.error;
    if (!lhs.converged) {
        ev.verdict = Verdict::Inconclusive;
        ev.note += ev.note.empty() ? "" : "; ";
        ev.note += "quadrature did not converge";
        return ev;
    }
    ev.verdict = ev.margin >= -ev.error_budget ? Verdict::Holds
                 : ev.margin < -ev.error_budget - tau_verify ? Verdict::Violated
                                                             : Verdict::Inconclusive;
    return ev;
}

}  // namespace hhinvex
