#include "invex.hpp"

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

std::string point_str(std::span<const double> p) {
    std::string s = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(p[i]);
    }
    return s + ")";
}

// Odometer over an n-dimensional axis grid.
struct BoxGrid {
    const Box& box;
    int n;  // points per axis

    int axes() const { return box.dim(); }
    long long total() const {
        long long t = 1;
        for (int i = 0; i < axes(); ++i) t *= n;
        return t;
    }
    void point(long long index, std::vector<double>& out) const {
        out.resize(static_cast<std::size_t>(axes()));
        for (int a = axes() - 1; a >= 0; --a) {
            int i = static_cast<int>(index % n);
            index /= n;
            out[static_cast<std::size_t>(a)] =
                grid_point(box.lo[static_cast<std::size_t>(a)], box.hi[static_cast<std::size_t>(a)], i, n);
        }
    }
};

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// EtaMap

EtaMap EtaMap::scalar(const std::string& source) {
    EtaMap m;
    m.dim_ = 1;
    m.broadcast_ = true;
    m.source_ = source;
    m.comps_.push_back(Expression::parse(source, {"v", "u"}));
    return m;
}

EtaMap EtaMap::vector(const std::string& source, int dim) {
    if (dim < 1) throw ParameterError("eta map dimension must be >= 1");
    if (dim == 1 && source.find(';') == std::string::npos) return scalar(source);

    EtaMap m;
    m.dim_ = dim;
    m.source_ = source;
    if (source.find(';') == std::string::npos) {
        // Single scalar expression in (v, u), broadcast componentwise.
        m.broadcast_ = true;
        m.comps_.push_back(Expression::parse(source, {"v", "u"}));
        return m;
    }
    m.broadcast_ = false;
    std::vector<std::string> names;
    for (int i = 1; i <= dim; ++i) names.push_back("v" + std::to_string(i));
    for (int i = 1; i <= dim; ++i) names.push_back("u" + std::to_string(i));
    std::size_t start = 0;
    std::vector<std::string> parts;
    for (;;) {
        std::size_t semi = source.find(';', start);
        parts.push_back(source.substr(start, semi == std::string::npos ? semi : semi - start));
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    if (static_cast<int>(parts.size()) != dim)
        throw ParameterError("eta map has " + std::to_string(parts.size()) +
                             " component(s), expected " + std::to_string(dim));
    for (const auto& part : parts) m.comps_.push_back(Expression::parse(part, names));
    return m;
}

double EtaMap::eval1(double v, double u) const {
    if (dim_ != 1) throw ParameterError("scalar evaluation of a vector eta map");
    const double args[2] = {v, u};
    return comps_[0].evaluate(args);
}

void EtaMap::eval(std::span<const double> v, std::span<const double> u,
                  std::span<double> out) const {
    if (static_cast<int>(v.size()) != dim_ || static_cast<int>(u.size()) != dim_ ||
        static_cast<int>(out.size()) != dim_)
        throw ParameterError("eta map dimension mismatch");
    if (broadcast_) {
        for (int i = 0; i < dim_; ++i) {
            const double args[2] = {v[static_cast<std::size_t>(i)], u[static_cast<std::size_t>(i)]};
            out[static_cast<std::size_t>(i)] = comps_[0].evaluate(args);
        }
        return;
    }
    std::vector<double> args(static_cast<std::size_t>(2 * dim_));
    std::copy(v.begin(), v.end(), args.begin());
    std::copy(u.begin(), u.end(), args.begin() + dim_);
    for (int i = 0; i < dim_; ++i)
        out[static_cast<std::size_t>(i)] = comps_[static_cast<std::size_t>(i)].evaluate(args);
}

// ---------------------------------------------------------------------------
// ScalarFunction

ScalarFunction ScalarFunction::from_expression(const std::string& f_src, const std::string& var) {
    ScalarFunction fn;
    Expression f = Expression::parse(f_src, {var});
    fn.value = [f](double x) { return f.evaluate1(x); };
    fn.value_src = f_src;
    try {
        Expression d = f.differentiate(var);
        fn.deriv = [d](double x) { return d.evaluate1(x); };
        fn.deriv_src = d.render();
    } catch (const NonDifferentiableError&) {
        // deriv stays empty; deriv_at reports the problem when first needed
    }
    return fn;
}

ScalarFunction ScalarFunction::from_expression_with_deriv(const std::string& f_src,
                                                          const std::string& fprime_src,
                                                          const std::string& var) {
    ScalarFunction fn;
    Expression f = Expression::parse(f_src, {var});
    Expression d = Expression::parse(fprime_src, {var});
    fn.value = [f](double x) { return f.evaluate1(x); };
    fn.deriv = [d](double x) { return d.evaluate1(x); };
    fn.value_src = f_src;
    fn.deriv_src = fprime_src;
    return fn;
}

double ScalarFunction::deriv_at(double x) const {
    if (!deriv)
        throw NonDifferentiableError(
            "function has no derivative (non-differentiable expression and no override)");
    return deriv(x);
}

// ---------------------------------------------------------------------------
// Box

double Box::diameter() const {
    double s = 0.0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        double d = hi[i] - lo[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Condition C

ConditionCReport check_condition_c(const EtaMap& eta, const Box& box, int grid_per_axis,
                                   double tau) {
    if (grid_per_axis < 3) throw ParameterError("condition C grid must be >= 3 per axis");
    if (eta.dim() != box.dim()) throw ParameterError("eta map / box dimension mismatch");
    if (tau < 0.0) tau = domain_tolerance(box);

    const int n = box.dim();
    const BoxGrid grid{box, grid_per_axis};
    const int nt = grid_per_axis;

    ConditionCReport report;
    report.tolerance = tau;
    report.worst_residual = -std::numeric_limits<double>::infinity();

    std::vector<double> x, y;
    std::vector<double> e_xy(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n)),
        z2(static_cast<std::size_t>(n)), r(static_cast<std::size_t>(n)),
        tmp(static_cast<std::size_t>(n));

    auto note = [&](double residual, const std::vector<double>& wx, const std::vector<double>& wy,
                    double t, std::optional<double> t2, int identity) {
        if (residual > report.worst_residual) {
            report.worst_residual = residual;
            report.witness_x = wx;
            report.witness_y = wy;
            report.witness_t = t;
            report.witness_t2 = t2;
            report.identity = identity;
        }
    };

    try {
        for (long long xi = 0; xi < grid.total(); ++xi) {
            grid.point(xi, x);
            for (long long yi = 0; yi < grid.total(); ++yi) {
                grid.point(yi, y);
                eta.eval(x, y, e_xy);
                for (int ti = 0; ti < nt; ++ti) {
                    const double t = grid_point(0.0, 1.0, ti, nt);
                    for (int i = 0; i < n; ++i)
                        z[static_cast<std::size_t>(i)] =
                            y[static_cast<std::size_t>(i)] + t * e_xy[static_cast<std::size_t>(i)];

                    eta.eval(y, z, r);
                    for (int i = 0; i < n; ++i)
                        r[static_cast<std::size_t>(i)] += t * e_xy[static_cast<std::size_t>(i)];
                    note(max_abs(r), x, y, t, std::nullopt, 0);

                    eta.eval(x, z, r);
                    for (int i = 0; i < n; ++i)
                        r[static_cast<std::size_t>(i)] -= (1.0 - t) * e_xy[static_cast<std::size_t>(i)];
                    note(max_abs(r), x, y, t, std::nullopt, 1);
                }
                // Derived identity over (t1, t2).
                for (int t1i = 0; t1i < nt; ++t1i) {
                    const double t1 = grid_point(0.0, 1.0, t1i, nt);
                    for (int i = 0; i < n; ++i)
                        z[static_cast<std::size_t>(i)] =
                            y[static_cast<std::size_t>(i)] + t1 * e_xy[static_cast<std::size_t>(i)];
                    for (int t2i = 0; t2i < nt; ++t2i) {
                        const double t2 = grid_point(0.0, 1.0, t2i, nt);
                        for (int i = 0; i < n; ++i)
                            z2[static_cast<std::size_t>(i)] =
                                y[static_cast<std::size_t>(i)] + t2 * e_xy[static_cast<std::size_t>(i)];
                        eta.eval(z2, z, r);
                        for (int i = 0; i < n; ++i)
                            r[static_cast<std::size_t>(i)] -=
                                (t2 - t1) * e_xy[static_cast<std::size_t>(i)];
                        note(max_abs(r), x, y, t1, t2, 2);
                    }
                }
            }
        }
    } catch (const DomainError& e) {
        throw DomainError(std::string(e.what()) + " (condition C sample near x = " + point_str(x) +
                          ", y = " + point_str(y) + ")");
    }

    report.pass = report.worst_residual <= tau;
    return report;
}

ClosureReport check_invex_closure(const EtaMap& eta, const Box& box, int grid_per_axis,
                                  double tau) {
    if (grid_per_axis < 2) throw ParameterError("closure grid must be >= 2 per axis");
    if (eta.dim() != box.dim()) throw ParameterError("eta map / box dimension mismatch");
    if (tau < 0.0) tau = domain_tolerance(box);

    const int n = box.dim();
    const BoxGrid grid{box, grid_per_axis};
    const int nt = grid_per_axis;

    ClosureReport report;
    report.worst_excess = -std::numeric_limits<double>::infinity();

    std::vector<double> u, v;
    std::vector<double> e(static_cast<std::size_t>(n));
    for (long long ui = 0; ui < grid.total(); ++ui) {
        grid.point(ui, u);
        for (long long vi = 0; vi < grid.total(); ++vi) {
            grid.point(vi, v);
            eta.eval(v, u, e);
            for (int ti = 0; ti < nt; ++ti) {
                const double t = grid_point(0.0, 1.0, ti, nt);
                double excess = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double p = u[static_cast<std::size_t>(i)] + t * e[static_cast<std::size_t>(i)];
                    excess = std::max(excess, box.lo[static_cast<std::size_t>(i)] - p);
                    excess = std::max(excess, p - box.hi[static_cast<std::size_t>(i)]);
                }
                if (excess > report.worst_excess) {
                    report.worst_excess = excess;
                    report.witness_u = u;
                    report.witness_v = v;
                    report.witness_t = t;
                }
            }
        }
    }
    report.pass = report.worst_excess <= tau;
    return report;
}

// ---------------------------------------------------------------------------
// Classification

const char* class_name(ConvexClass c) {
    switch (c) {
        case ConvexClass::Prequasiinvex: return "prequasiinvex";
        case ConvexClass::Preinvex: return "preinvex";
        case ConvexClass::LogPreinvex: return "log-preinvex";
    }
    return "?";
}

ConvexClass class_from_name(const std::string& name) {
    if (name == "prequasiinvex") return ConvexClass::Prequasiinvex;
    if (name == "preinvex") return ConvexClass::Preinvex;
    if (name == "log-preinvex" || name == "logpreinvex") return ConvexClass::LogPreinvex;
    throw ParameterError("unknown class '" + name + "'");
}

double class_margin(ConvexClass c, double f_mid, double f_u, double f_v, double t) {
    switch (c) {
        case ConvexClass::Preinvex:
            return f_mid - (1.0 - t) * f_u - t * f_v;
        case ConvexClass::LogPreinvex:
            return f_mid - std::pow(f_u, 1.0 - t) * std::pow(f_v, t);
        case ConvexClass::Prequasiinvex:
            return f_mid - std::max(f_u, f_v);
    }
    return 0.0;
}

namespace {

struct ScanRange {
    double lo, hi;
    int n;
};

struct ScanResult {
    double worst = -std::numeric_limits<double>::infinity();
    Witness witness;
};

void require_positive(ConvexClass target, double value, double at) {
    if (target == ConvexClass::LogPreinvex && !(value > 0.0))
        throw PreconditionError("log-preinvex certification requires f > 0 on the grid; f(" +
                                std::to_string(at) + ") = " + std::to_string(value));
}

ScanResult scan(const std::function<double(double)>& f, const EtaMap& eta, ConvexClass target,
                const ScanRange& ur, const ScanRange& vr, const ScanRange& tr) {
    ScanResult res;
    for (int iu = 0; iu < ur.n; ++iu) {
        const double u = grid_point(ur.lo, ur.hi, iu, ur.n);
        const double fu = f(u);
        require_positive(target, fu, u);
        for (int iv = 0; iv < vr.n; ++iv) {
            const double v = grid_point(vr.lo, vr.hi, iv, vr.n);
            const double fv = f(v);
            require_positive(target, fv, v);
            const double e = eta.eval1(v, u);
            for (int it = 0; it < tr.n; ++it) {
                const double t = grid_point(tr.lo, tr.hi, it, tr.n);
                const double mid = u + t * e;
                const double fm = f(mid);
                require_positive(target, fm, mid);
                const double margin = class_margin(target, fm, fu, fv, t);
                if (margin > res.worst) {
                    res.worst = margin;
                    res.witness = {u, v, t};
                }
            }
        }
    }
    return res;
}

// Two rounds of 10x zoom around the worst cell.
ScanResult refine(const std::function<double(double)>& f, const EtaMap& eta, ConvexClass target,
                  double lo, double hi, const Grid3& grid, ScanResult best) {
    double su = (hi - lo) / std::max(1, grid.nu - 1);
    double sv = (hi - lo) / std::max(1, grid.nv - 1);
    double st = 1.0 / std::max(1, grid.nt - 1);
    for (int round = 0; round < 2; ++round) {
        const Witness& w = best.witness;
        ScanRange ur{std::max(lo, w.u - su), std::min(hi, w.u + su), 21};
        ScanRange vr{std::max(lo, w.v - sv), std::min(hi, w.v + sv), 21};
        ScanRange tr{std::max(0.0, w.t - st), std::min(1.0, w.t + st), 21};
        ScanResult local = scan(f, eta, target, ur, vr, tr);
        if (local.worst > best.worst) best = local;
        su /= 10.0;
        sv /= 10.0;
        st /= 10.0;
    }
    return best;
}

}  // namespace

ClassCertificate classify(const std::function<double(double)>& f, const EtaMap& eta, double lo,
                          double hi, ConvexClass target, Grid3 grid, double tol,
                          bool refine_on_refute_only) {
    if (!(lo < hi)) throw ParameterError("classification domain requires lo < hi");
    if (grid.nu < 2 || grid.nv < 2 || grid.nt < 2)
        throw ParameterError("classification grid must be >= 2 per axis");

    ScanResult best = scan(f, eta, target, {lo, hi, grid.nu}, {lo, hi, grid.nv}, {0.0, 1.0, grid.nt});

    ClassCertificate cert;
    cert.target = target;
    cert.grid = grid;
    cert.tolerance = tol;
    const bool refuted_coarse = best.worst > tol;
    if (!refine_on_refute_only || refuted_coarse) {
        best = refine(f, eta, target, lo, hi, grid, best);
        cert.refined = true;
    }
    cert.worst_margin = best.worst;
    cert.witness = best.witness;
    cert.certified = best.worst <= tol;
    return cert;
}

std::vector<PowerCertOutcome> classify_powers(const std::function<double(double)>& h,
                                              const EtaMap& eta, double lo, double hi,
                                              std::span<const PowerCertRequest> requests,
                                              Grid3 grid, double tol, bool refine_refuted) {
    if (!(lo < hi)) throw ParameterError("classification domain requires lo < hi");

    std::vector<PowerCertOutcome> out(requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i) {
        out[i].cert.target = requests[i].target;
        out[i].cert.grid = grid;
        out[i].cert.tolerance = tol;
        out[i].cert.worst_margin = -std::numeric_limits<double>::infinity();
    }

    auto needs_positive = [&](std::size_t i) {
        return requests[i].target == ConvexClass::LogPreinvex;
    };

    std::vector<double> worst(requests.size(), -std::numeric_limits<double>::infinity());
    std::vector<Witness> witness(requests.size());
    std::vector<char> alive(requests.size(), 1);

    for (int iu = 0; iu < grid.nu; ++iu) {
        const double u = grid_point(lo, hi, iu, grid.nu);
        const double hu = h(u);
        for (int iv = 0; iv < grid.nv; ++iv) {
            const double v = grid_point(lo, hi, iv, grid.nv);
            const double hv = h(v);
            const double e = eta.eval1(v, u);
            for (int it = 0; it < grid.nt; ++it) {
                const double t = grid_point(0.0, 1.0, it, grid.nt);
                const double mid = u + t * e;
                const double hm = h(mid);
                for (std::size_t i = 0; i < requests.size(); ++i) {
                    if (!alive[i]) continue;
                    if (needs_positive(i) && !(hu > 0.0 && hv > 0.0 && hm > 0.0)) {
                        out[i].positivity_failed = true;
                        out[i].failure_point = hu > 0.0 ? (hv > 0.0 ? mid : v) : u;
                        alive[i] = 0;
                        continue;
                    }
                    const double ex = requests[i].exponent;
                    const double margin = class_margin(requests[i].target, std::pow(hm, ex),
                                                       std::pow(hu, ex), std::pow(hv, ex), t);
                    if (margin > worst[i]) {
                        worst[i] = margin;
                        witness[i] = {u, v, t};
                    }
                }
            }
        }
    }

    for (std::size_t i = 0; i < requests.size(); ++i) {
        if (out[i].positivity_failed) {
            out[i].cert.certified = false;
            continue;
        }
        ScanResult best{worst[i], witness[i]};
        if (best.worst > tol && refine_refuted) {
            const double ex = requests[i].exponent;
            auto g = [&h, ex](double x) { return std::pow(h(x), ex); };
            best = refine(g, eta, requests[i].target, lo, hi, grid, best);
            out[i].cert.refined = true;
        }
        out[i].cert.worst_margin = best.worst;
        out[i].cert.witness = best.witness;
        out[i].cert.certified = best.worst <= tol;
    }
    return out;
}

ChainCheckReport class_chain_check(const std::function<double(double)>& f, const EtaMap& eta,
                                   double lo, double hi, Grid3 grid, double tol) {
    (void)eta;  // the chain compares value combinations only
    ChainCheckReport rep;
    rep.worst_gm_am_slack = std::numeric_limits<double>::infinity();
    rep.worst_am_max_slack = std::numeric_limits<double>::infinity();

    for (int iu = 0; iu < grid.nu; ++iu) {
        const double u = grid_point(lo, hi, iu, grid.nu);
        const double fu = f(u);
        if (!(fu > 0.0))
            throw PreconditionError("chain check requires f > 0 on the grid; f(" +
                                    std::to_string(u) + ") = " + std::to_string(fu));
        for (int iv = 0; iv < grid.nv; ++iv) {
            const double v = grid_point(lo, hi, iv, grid.nv);
            const double fv = f(v);
            if (!(fv > 0.0))
                throw PreconditionError("chain check requires f > 0 on the grid; f(" +
                                        std::to_string(v) + ") = " + std::to_string(fv));
            for (int it = 0; it < grid.nt; ++it) {
                const double t = grid_point(0.0, 1.0, it, grid.nt);
                const double gm = std::pow(fu, 1.0 - t) * std::pow(fv, t);
                const double am = (1.0 - t) * fu + t * fv;
                const double mx = std::max(fu, fv);
                if (am - gm < rep.worst_gm_am_slack) {
                    rep.worst_gm_am_slack = am - gm;
                    rep.witness_gm_am = {u, v, t};
                }
                if (mx - am < rep.worst_am_max_slack) {
                    rep.worst_am_max_slack = mx - am;
                    rep.witness_am_max = {u, v, t};
                }
            }
        }
    }
    rep.pass = rep.worst_gm_am_slack >= -tol && rep.worst_am_max_slack >= -tol;
    return rep;
}

}  // namespace hhinvex
