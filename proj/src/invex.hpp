#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expr.hpp"

namespace hhinvex {

// ---------------------------------------------------------------------------
// EtaMap: the bifunction eta(v, u) that replaces the displacement v - u of
// classical convexity. Scalar maps are expressions in (v, u); vector maps
// are ';'-separated component expressions in (v1..vn, u1..un), or a single
// scalar expression broadcast componentwise.

class EtaMap {
public:
    static EtaMap scalar(const std::string& source);
    static EtaMap vector(const std::string& source, int dim);

    int dim() const { return dim_; }
    const std::string& source() const { return source_; }

    double eval1(double v, double u) const;
    void eval(std::span<const double> v, std::span<const double> u,
              std::span<double> out) const;

private:
    int dim_ = 1;
    bool broadcast_ = true;
    std::string source_;
    std::vector<Expression> comps_;
};

// f with its derivative. deriv is empty when the expression contains a
// non-differentiable node and no user override was given; operations that
// need f' raise NonDifferentiableError lazily in that case.
struct ScalarFunction {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    std::string value_src;
    std::string deriv_src;

    static ScalarFunction from_expression(const std::string& f_src,
                                          const std::string& var = "x");
    static ScalarFunction from_expression_with_deriv(const std::string& f_src,
                                                     const std::string& fprime_src,
                                                     const std::string& var = "x");

    double deriv_at(double x) const;  // throws if no derivative is available
};

// ---------------------------------------------------------------------------
// Boxes and sampling grids

struct Box {
    std::vector<double> lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    double diameter() const;
    static Box interval(double lo, double hi) { return Box{{lo}, {hi}}; }
};

struct Grid3 {
    int nu = 64;
    int nv = 64;
    int nt = 33;
};

inline constexpr double kDefaultClassTol = 1e-9;

// tau_dom scales with the box so strict membership does not fail spuriously
// in floating point.
inline double domain_tolerance(const Box& box) { return 1e-12 * box.diameter(); }

// ---------------------------------------------------------------------------
// Condition C (Mohan & Neogy): eta(y, y+t eta(x,y)) = -t eta(x,y) and
// eta(x, y+t eta(x,y)) = (1-t) eta(x,y), plus the derived two-parameter
// identity eta(y+t2 eta(x,y), y+t1 eta(x,y)) = (t2-t1) eta(x,y).

struct ConditionCReport {
    bool pass = false;
    double worst_residual = 0.0;
    double tolerance = 0.0;
    std::vector<double> witness_x, witness_y;
    double witness_t = 0.0;
    std::optional<double> witness_t2;  // set when the worst residual came from the derived identity
    int identity = 0;                  // 0, 1: the two base identities; 2: derived
};

ConditionCReport check_condition_c(const EtaMap& eta, const Box& box, int grid_per_axis,
                                   double tau = -1.0 /* <0: domain_tolerance(box) */);

// Sampled invex-closure: u + t eta(v,u) stays inside the box inflated by tau.
struct ClosureReport {
    bool pass = false;
    double worst_excess = 0.0;  // how far outside the inflated box the worst point lands
    std::vector<double> witness_u, witness_v;
    double witness_t = 0.0;
};

ClosureReport check_invex_closure(const EtaMap& eta, const Box& box, int grid_per_axis,
                                  double tau = -1.0);

// ---------------------------------------------------------------------------
// Class certification by deterministic grid sampling

enum class ConvexClass { Prequasiinvex, Preinvex, LogPreinvex };

const char* class_name(ConvexClass c);
ConvexClass class_from_name(const std::string& name);

struct Witness {
    double u = 0.0, v = 0.0, t = 0.0;
};

// Sampled evidence, not proof. certified means the worst margin of the
// target class inequality over the sampled points is <= tolerance; claimed
// class is the target when certified and "none" otherwise.
struct ClassCertificate {
    ConvexClass target = ConvexClass::Preinvex;
    bool certified = false;
    Grid3 grid;
    double tolerance = kDefaultClassTol;
    double worst_margin = 0.0;
    Witness witness;
    bool refined = false;

    const char* claimed() const { return certified ? class_name(target) : "none"; }
};

// Margin of the defining inequality at one sample: positive means violated.
//   preinvex:      f(u + t eta(v,u)) - (1-t) f(u) - t f(v)
//   log-preinvex:  f(u + t eta(v,u)) - f(u)^(1-t) f(v)^t
//   prequasiinvex: f(u + t eta(v,u)) - max(f(u), f(v))
double class_margin(ConvexClass c, double f_mid, double f_u, double f_v, double t);

// Lexicographic (u, v, t) scan; worst margin and first witness achieving it.
// Two refinement rounds (10x zoom around the worst cell) sharpen the
// witness; when refine_on_refute_only is set, refinement runs only when the
// coarse scan already refutes (used by the harness for throughput).
ClassCertificate classify(const std::function<double(double)>& f, const EtaMap& eta,
                          double lo, double hi, ConvexClass target, Grid3 grid = {},
                          double tol = kDefaultClassTol, bool refine_on_refute_only = false);

// Batched variant: certifies h(x)^exponent for several exponents in one grid
// sweep (h >= 0; pass exponent 1 for h itself). Positivity failures for log
// targets are reported per-request instead of thrown.
struct PowerCertRequest {
    double exponent = 1.0;
    ConvexClass target = ConvexClass::Preinvex;
};

struct PowerCertOutcome {
    ClassCertificate cert;
    bool positivity_failed = false;
    double failure_point = 0.0;
};

std::vector<PowerCertOutcome> classify_powers(const std::function<double(double)>& h,
                                              const EtaMap& eta, double lo, double hi,
                                              std::span<const PowerCertRequest> requests,
                                              Grid3 grid = {}, double tol = kDefaultClassTol,
                                              bool refine_refuted = true);

// ---------------------------------------------------------------------------
// Pointwise chain geometric mean <= arithmetic mean <= max over sampled
// (f(u), f(v), t); slack is the right side minus the left side, so the worst
// slack is the minimum (>= -tol when the chain holds).

struct ChainCheckReport {
    bool pass = false;
    double worst_gm_am_slack = 0.0;
    double worst_am_max_slack = 0.0;
    Witness witness_gm_am, witness_am_max;
};

ChainCheckReport class_chain_check(const std::function<double(double)>& f, const EtaMap& eta,
                                   double lo, double hi, Grid3 grid = {},
                                   double tol = kDefaultClassTol);

}  // namespace hhinvex
