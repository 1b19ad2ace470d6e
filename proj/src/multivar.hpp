#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bounds.hpp"
#include "invex.hpp"

namespace hhinvex {

// n-variable scalar function; expression-backed functions use variables
// x1..xn.
struct VectorFunction {
    std::function<double(std::span<const double>)> value;
    std::string src;
    int dim = 1;

    static VectorFunction from_expression(const std::string& source, int dim);
};

// The eta-path P_xv = { x + t eta(y,x) : t in [0,1] } joining x to
// v = x + eta(y,x), together with the 1-D restriction phi(t) = f(x + t eta(y,x)).
struct EtaPath {
    int dim = 1;
    std::vector<double> x, y, v;
    std::vector<double> displacement;  // eta(y, x)
    std::function<double(double)> phi;
};

// Builds the path; when a domain box is given, samples the path and throws
// DomainError (with the witness t) if it exits the inflated box.
EtaPath path_restriction(const VectorFunction& f, std::span<const double> x,
                         std::span<const double> y, const EtaMap& eta,
                         const std::optional<Box>& domain = std::nullopt,
                         int containment_samples = 129);

// Smallest axis-aligned box containing x, y, v and the sampled path.
Box path_bounding_box(const EtaPath& path, int samples = 129);

// Phi(t) = \int_0^t phi(s) ds realized by cached cumulative quadrature on a
// fixed partition (64 cells, adaptive inside each). All cells are integrated
// at construction, so concurrent reads need no synchronization.
class PathAccumulator {
public:
    PathAccumulator(std::function<double(double)> phi, double quad_tol = kDefaultQuadTol,
                    int cells = 64);

    double operator()(double t) const;
    // Conservative bound on |Phi(t) - true value| for any t in [0,1].
    double total_error() const { return total_error_; }
    bool converged() const { return converged_; }

private:
    std::function<double(double)> phi_;
    std::vector<double> prefix_;  // prefix_[k] = integral over [0, k/cells]
    double cell_tol_;
    double total_error_ = 0.0;
    bool converged_ = true;
    int cells_;
};

// Proposition-5.1 certification: log-convexity of phi on a (t1, t2, lambda)
// grid, gated on Condition C for eta over the path's bounding box (refuses
// with PreconditionError when Condition C fails, since the equivalence
// requires it). The witness fields are (u, v, t) = (t1, t2, lambda).
ClassCertificate check_path_logpreinvex(const VectorFunction& f, std::span<const double> x,
                                        std::span<const double> y, const EtaMap& eta,
                                        int grid = 33, double tol = kDefaultClassTol,
                                        int condition_c_grid = 5);

// Log-convexity certification of a plain 1-D function on [0,1] (the phi side
// of Proposition 5.1); exposed for tests and the q-power equivalence check.
ClassCertificate certify_log_convex(const std::function<double(double)>& phi, int grid,
                                    double tol);

// Remark-5.2 equivalence: phi is log-convex iff phi^q is. Margins are
// compared in the log domain where the phi^q margin is exactly q times the
// phi margin.
struct QPowerReport {
    bool phi_certified = false;
    bool phi_q_certified = false;
    double worst_log_margin_phi = 0.0;
    double worst_log_margin_phi_q = 0.0;
    double max_scale_mismatch = 0.0;  // max |m_{phi^q} - q m_phi| over the grid
    bool consistent = false;
    Witness witness_phi, witness_phi_q;
};

QPowerReport check_q_power_equivalence(const std::function<double(double)>& phi, double q,
                                       int grid = 33, double tol = kDefaultClassTol);

// Eq1/Eq2: the 1-D log-mean bounds applied to the accumulated path integral
// Phi, with phi(a), phi(b) standing in for |Phi'(a)|, |Phi'(b)|.
// Requires a, b in (0,1) with a < b and a passing path certification.
BoundEvaluation verify_multivar(TheoremId id /* Eq1 or Eq2 */, const VectorFunction& f,
                                std::span<const double> x, std::span<const double> y,
                                const EtaMap& eta, double a, double b, BoundParams params = {},
                                double quad_tol = kDefaultQuadTol,
                                double tau_verify = kDefaultVerifyTol);

}  // namespace hhinvex
