#pragma once

#include <optional>
#include <string>

#include "invex.hpp"
#include "quadrature.hpp"

namespace hhinvex {

enum class TheoremId {
    HHchain,  // four-value chain: f(mid) <= mean <= trapezoid <= endpoint mean
    T12,      // classical midpoint bound, |f'| convex
    T22,      // trapezoid gap, |f'|^{p/(p-1)} prequasiinvex (RHS as printed)
    T23,      // trapezoid gap, |f'| prequasiinvex
    T31,      // midpoint gap, |f'| preinvex
    T32,      // midpoint gap, |f'|^{p/(p-1)} preinvex (Hoelder form)
    T33,      // relaxation of T32
    T34,      // midpoint gap, |f'|^q preinvex (power-mean form)
    T35,      // relaxation of T34
    Tz,       // midpoint gap, |f'| log-preinvex
    Tfd,      // midpoint gap, |f'|^q log-preinvex (RHS as printed)
    Cq,       // Tz with eta(b,a) = b - a
    Cq1,      // Tfd with eta(b,a) = b - a
    Eq1,      // several-variable eta-path bound from Cq applied to Phi
    Eq2,      // several-variable eta-path bound from Cq1 applied to Phi
};

const char* theorem_name(TheoremId id);
TheoremId theorem_from_name(const std::string& name);
bool theorem_needs_p(TheoremId id);
bool theorem_needs_q(TheoremId id);
bool theorem_is_classical(TheoremId id);  // uses eta(b,a) = b - a
// RHS implemented verbatim from a formula suspected of a typo; empirical
// violations of these are reported distinctly.
bool theorem_as_printed(TheoremId id);

inline constexpr double kDefaultVerifyTol = 1e-9;  // tau_verify
inline constexpr double kLogMeanEps = 1e-8;        // relative-gap switch for log-mean factors

// eta(b,a); throws OrientationError unless it is strictly positive.
double eta_displacement(const EtaMap& eta, double a, double b);

struct GapResult {
    double value = 0.0;
    double error = 0.0;  // propagated quadrature error budget
    bool converged = true;
};

// |(1/e) \int_a^{a+e} f - f(a + e/2)| with e = eta(b,a).
GapResult midpoint_gap(const ScalarFunction& f, const EtaMap& eta, double a, double b,
                       double quad_tol = kDefaultQuadTol);
// |(f(a) + f(a+e))/2 - (1/e) \int_a^{a+e} f| (corrected LHS for T2.2/T2.3).
GapResult trapezoid_gap(const ScalarFunction& f, const EtaMap& eta, double a, double b,
                        double quad_tol = kDefaultQuadTol);
// e * (\int_0^{1/2} t |f'(a+te)| dt + \int_{1/2}^1 (1-t) |f'(a+te)| dt):
// the pre-relaxation kernel that dominates the midpoint gap and is dominated
// by every theorem RHS under the matching class hypothesis.
GapResult tight_kernel(const ScalarFunction& f, const EtaMap& eta, double a, double b,
                       double quad_tol = kDefaultQuadTol);

// |left - right| of the integration-by-parts identity
//   \int_0^{1/2} t f'(a+te) dt + \int_{1/2}^1 (t-1) f'(a+te) dt
//     = (1/e) f(a + e/2) - (1/e^2) \int_a^{a+e} f.
GapResult hh_identity_residual(const ScalarFunction& f, const EtaMap& eta, double a, double b,
                               double quad_tol = kDefaultQuadTol);

// Classical variants evaluate over [a, b] directly (displacement b - a).
GapResult midpoint_gap_classical(const ScalarFunction& f, double a, double b,
                                 double quad_tol = kDefaultQuadTol);

// ---------------------------------------------------------------------------
// RHS formulas over the endpoint derivative magnitudes a_mag = |f'(a)|,
// b_mag = |f'(b)| and the displacement e = eta(b,a). Kept separate from the
// (f, eta, a, b) wrappers so tests can drive them directly.

double rhs_t31_formula(double e, double a_mag, double b_mag);
double rhs_t32_formula(double e, double a_mag, double b_mag, double p);
double rhs_t33_formula(double e, double a_mag, double b_mag, double p);
double rhs_t34_formula(double e, double a_mag, double b_mag, double q);
double rhs_t35_formula(double e, double a_mag, double b_mag, double q);
double rhs_tz_formula(double e, double a_mag, double b_mag);
double rhs_tfd_formula(double e, double a_mag, double b_mag, double p, double q);
double rhs_t22_formula(double e, double a_mag, double b_mag, double p);
double rhs_t23_formula(double e, double a_mag, double b_mag);

double rhs_T31(const ScalarFunction& f, const EtaMap& eta, double a, double b);
double rhs_T32(const ScalarFunction& f, const EtaMap& eta, double a, double b, double p);
double rhs_T33(const ScalarFunction& f, const EtaMap& eta, double a, double b, double p);
double rhs_T34(const ScalarFunction& f, const EtaMap& eta, double a, double b, double q);
double rhs_T35(const ScalarFunction& f, const EtaMap& eta, double a, double b, double q);
double rhs_Tz(const ScalarFunction& f, const EtaMap& eta, double a, double b);
double rhs_Tfd(const ScalarFunction& f, const EtaMap& eta, double a, double b, double p, double q);
double rhs_T22(const ScalarFunction& f, const EtaMap& eta, double a, double b, double p);
double rhs_T23(const ScalarFunction& f, const EtaMap& eta, double a, double b);

// T1.2 / Cq / Cq1: the eta-theorem RHS evaluated with eta(b,a) = b - a.
double rhs_classical(const ScalarFunction& f, double a, double b, TheoremId variant,
                     std::optional<double> p = std::nullopt,
                     std::optional<double> q = std::nullopt);

// ---------------------------------------------------------------------------
// Chain of Eq-(p) type: f((2a+e)/2) <= (1/e)\int <= (f(a)+f(a+e))/2 <= (f(a)+f(b))/2

struct ChainEvaluation {
    double midpoint_value = 0.0;
    double mean_value = 0.0;
    double trapezoid_value = 0.0;
    double endpoint_mean = 0.0;
    double quad_error = 0.0;
    double min_slack = 0.0;  // smallest pairwise slack along the chain
    bool holds = false;
};

ChainEvaluation hh_chain_check(const ScalarFunction& f, const EtaMap& eta, double a, double b,
                               double quad_tol = kDefaultQuadTol);

// ---------------------------------------------------------------------------
// One verified theorem instance

enum class Verdict { Holds, Violated, Inconclusive };
const char* verdict_name(Verdict v);

struct BoundParams {
    std::optional<double> p;
    std::optional<double> q;
};

// Fills in the conjugate exponent for theorems requiring 1/p + 1/q = 1 and
// validates ranges; throws ParameterError on violations.
BoundParams resolve_params(TheoremId id, BoundParams params);

struct BoundEvaluation {
    TheoremId id = TheoremId::T31;
    double a = 0.0, b = 0.0;
    BoundParams params;
    double eta_ba = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs - lhs
    double error_budget = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    bool as_printed = false;
    std::string note;
    std::optional<ChainEvaluation> chain;
};

// verdict: holds     iff margin >= -error_budget
//          violated  iff margin <  -error_budget - tau_verify
//          inconclusive otherwise
BoundEvaluation verify(TheoremId id, const ScalarFunction& f, const EtaMap& eta, double a,
                       double b, BoundParams params = {}, double quad_tol = kDefaultQuadTol,
                       double tau_verify = kDefaultVerifyTol);

}  // namespace hhinvex
