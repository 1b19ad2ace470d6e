#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "json.hpp"
#include "report.hpp"

namespace hhinvex {

// ---------------------------------------------------------------------------
// RNG

std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double SplitMix64::next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::uint64_t trial_seed(std::uint64_t seed, long long trial) {
    return splitmix64_mix(seed ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(trial) + 1)));
}

// ---------------------------------------------------------------------------
// Config

const std::vector<std::string>& known_families() {
    static const std::vector<std::string> families = {
        "poly-convex", "exp-affine", "exp-convex", "abs-kink", "custom-expression"};
    return families;
}

namespace {

using nlohmann::json;

double require_positive_tol(const json& j, const char* name) {
    double v = j.get<double>();
    if (!(v > 0.0)) throw ConfigError(std::string("tolerances.") + name + " must be positive");
    return v;
}

std::string num_str(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return std::to_string(v);
    return std::string(buf, ptr);
}

}  // namespace

CampaignConfig CampaignConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    static const std::vector<std::string> allowed = {
        "families", "theorems", "trials",    "seed",        "p_values", "q_values",
        "domain",   "eta",      "tolerances", "cert_grid",  "custom_expr"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown config key '" + it.key() + "'");
    }

    CampaignConfig cfg;
    try {
        if (!j.contains("families") || !j["families"].is_array() || j["families"].empty())
            throw ConfigError("config requires a non-empty 'families' array");
        for (const auto& f : j["families"]) {
            std::string name = f.get<std::string>();
            if (std::find(known_families().begin(), known_families().end(), name) ==
                known_families().end())
                throw ConfigError("unknown family '" + name + "'");
            cfg.families.push_back(name);
        }
        if (!j.contains("theorems") || !j["theorems"].is_array() || j["theorems"].empty())
            throw ConfigError("config requires a non-empty 'theorems' array");
        for (const auto& t : j["theorems"]) {
            TheoremId id = theorem_from_name(t.get<std::string>());
            if (id == TheoremId::Eq1 || id == TheoremId::Eq2)
                throw ConfigError("campaigns cover the scalar theorems; Eq1/Eq2 take an eta-path");
            cfg.theorems.push_back(id);
        }
        if (!j.contains("trials")) throw ConfigError("config requires 'trials'");
        cfg.trials = j["trials"].get<long long>();
        if (cfg.trials < 0) throw ConfigError("'trials' must be >= 0");
        if (!j.contains("seed")) throw ConfigError("config requires 'seed'");
        cfg.seed = j["seed"].get<std::uint64_t>();

        if (j.contains("p_values")) {
            cfg.p_values.clear();
            for (const auto& v : j["p_values"]) {
                double p = v.get<double>();
                if (!(p > 1.0)) throw ConfigError("p_values entries must exceed 1");
                cfg.p_values.push_back(p);
            }
        }
        if (j.contains("q_values")) {
            cfg.q_values.clear();
            for (const auto& v : j["q_values"]) {
                double q = v.get<double>();
                if (!(q >= 1.0)) throw ConfigError("q_values entries must be >= 1");
                cfg.q_values.push_back(q);
            }
        }
        if (j.contains("domain")) {
            cfg.domain_lo = j["domain"].at("lo").get<double>();
            cfg.domain_hi = j["domain"].at("hi").get<double>();
            if (!(cfg.domain_lo < cfg.domain_hi)) throw ConfigError("domain requires lo < hi");
        }
        if (j.contains("eta")) cfg.eta_src = j["eta"].get<std::string>();
        if (j.contains("tolerances")) {
            const auto& t = j["tolerances"];
            if (t.contains("quad_tol"))
                cfg.tolerances.quad_tol = require_positive_tol(t["quad_tol"], "quad_tol");
            if (t.contains("tau_verify"))
                cfg.tolerances.tau_verify = require_positive_tol(t["tau_verify"], "tau_verify");
            if (t.contains("tau_class"))
                cfg.tolerances.tau_class = require_positive_tol(t["tau_class"], "tau_class");
        }
        if (j.contains("cert_grid")) {
            cfg.cert_grid = j["cert_grid"].get<int>();
            if (cfg.cert_grid < 4) throw ConfigError("cert_grid must be >= 4");
        }
        if (j.contains("custom_expr")) cfg.custom_expr = j["custom_expr"].get<std::string>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config validation failed: ") + e.what());
    }

    try {
        EtaMap::scalar(cfg.eta_src);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config eta does not parse: ") + e.what());
    }
    if (std::find(cfg.families.begin(), cfg.families.end(), "custom-expression") !=
        cfg.families.end()) {
        if (cfg.custom_expr.empty())
            throw ConfigError("family custom-expression requires 'custom_expr'");
        try {
            ScalarFunction::from_expression(cfg.custom_expr);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("custom_expr does not parse: ") + e.what());
        }
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Families

namespace {

struct Instance {
    std::string f_src;
    ScalarFunction f;
};

Instance sample_family(const std::string& family, SplitMix64& rng, double lo, double hi,
                       const std::string& custom_expr) {
    Instance inst;
    if (family == "poly-convex") {
        // Affine part plus nonnegative even powers: convex by construction.
        const double c0 = rng.uniform(-2.0, 2.0);
        const double c1 = rng.uniform(-2.0, 2.0);
        std::string src = num_str(c0) + " + " + num_str(c1) + "*x";
        for (int k = 1; k <= 3; ++k) {
            const double g = rng.next_double() < 0.5 ? 0.0 : rng.uniform(0.0, 1.5);
            if (g > 0.0) src += " + " + num_str(g) + "*x^" + std::to_string(2 * k);
        }
        inst.f_src = src;
    } else if (family == "exp-affine") {
        const double mag = rng.uniform(0.2, 2.0);
        const double alpha = rng.next_double() < 0.5 ? mag : -mag;
        const double beta = rng.uniform(-1.0, 1.0);
        inst.f_src = "exp(" + num_str(alpha) + "*x + " + num_str(beta) + ")";
    } else if (family == "exp-convex") {
        // exp(g) with g convex and g' > 0 on [lo, hi], so |f'| stays positive.
        const double g2 = rng.uniform(0.0, 1.0);
        const double slope_floor = 2.0 * g2 * std::max(std::fabs(lo), std::fabs(hi));
        const double g1 = slope_floor + rng.uniform(0.1, 1.5);
        const double g0 = rng.uniform(-1.0, 0.5);
        inst.f_src = "exp(" + num_str(g0) + " + " + num_str(g1) + "*x + " + num_str(g2) + "*x^2)";
    } else if (family == "abs-kink") {
        const double c = rng.uniform(0.2, 2.0);
        const double m = rng.next_double() < 0.5 ? 0.0 : rng.uniform(-0.5, 0.5);
        const double d = rng.uniform(0.5, 2.0);
        inst.f_src = num_str(c) + "*abs(x) + " + num_str(m) + "*x + " + num_str(d);
    } else if (family == "custom-expression") {
        inst.f_src = custom_expr;
    } else {
        throw ConfigError("unknown family '" + family + "'");
    }
    inst.f = ScalarFunction::from_expression(inst.f_src);
    return inst;
}

// ---------------------------------------------------------------------------
// Theorem hypothesis bookkeeping

struct Hypothesis {
    double exponent = 1.0;
    ConvexClass cls = ConvexClass::Preinvex;
    bool classical = false;  // certified against eta(v,u) = v - u
    bool whole_f = false;    // HHchain certifies f itself, not a power of |f'|
};

Hypothesis hypothesis_for(TheoremId id, std::optional<double> p, std::optional<double> q) {
    switch (id) {
        case TheoremId::HHchain: return {1.0, ConvexClass::Preinvex, false, true};
        case TheoremId::T12: return {1.0, ConvexClass::Preinvex, true, false};
        case TheoremId::T22: return {*p / (*p - 1.0), ConvexClass::Prequasiinvex, false, false};
        case TheoremId::T23: return {1.0, ConvexClass::Prequasiinvex, false, false};
        case TheoremId::T31: return {1.0, ConvexClass::Preinvex, false, false};
        case TheoremId::T32:
        case TheoremId::T33: return {*p / (*p - 1.0), ConvexClass::Preinvex, false, false};
        case TheoremId::T34:
        case TheoremId::T35: return {*q, ConvexClass::Preinvex, false, false};
        case TheoremId::Tz: return {1.0, ConvexClass::LogPreinvex, false, false};
        case TheoremId::Tfd: return {*q, ConvexClass::LogPreinvex, false, false};
        case TheoremId::Cq: return {1.0, ConvexClass::LogPreinvex, true, false};
        case TheoremId::Cq1: return {*q, ConvexClass::LogPreinvex, true, false};
        default: throw ParameterError("no campaign hypothesis for this theorem");
    }
}

std::string hypothesis_desc(const Hypothesis& h) {
    std::string base = h.whole_f ? "f" : (h.exponent == 1.0 ? "|f'|" : "|f'|^" + num_str(h.exponent));
    return base + " " + class_name(h.cls) + (h.classical ? " (eta = v - u)" : "");
}

struct CertStore {
    // keyed by (exponent bits, class, classical flag)
    struct Key {
        std::uint64_t exponent_bits;
        int cls;
        bool classical;
        bool operator<(const Key& o) const {
            if (exponent_bits != o.exponent_bits) return exponent_bits < o.exponent_bits;
            if (cls != o.cls) return cls < o.cls;
            return classical < o.classical;
        }
    };
    std::map<Key, PowerCertOutcome> certs;
    std::optional<ClassCertificate> whole_f_cert;
    std::string derivative_error;  // non-empty when |f'| is unavailable

    static Key key_of(const Hypothesis& h) {
        return {std::bit_cast<std::uint64_t>(h.exponent), static_cast<int>(h.cls), h.classical};
    }
};

struct RowSpec {
    TheoremId id;
    std::optional<double> p, q;
    std::string key;
};

std::string row_key(TheoremId id, std::optional<double> p, std::optional<double> q) {
    std::string key = theorem_name(id);
    if (theorem_needs_p(id) && theorem_needs_q(id)) {
        key += "(q=" + num_str(*q) + ")";
    } else if (theorem_needs_p(id)) {
        key += "(p=" + num_str(*p) + ")";
    } else if (theorem_needs_q(id)) {
        key += "(q=" + num_str(*q) + ")";
    }
    return key;
}

// Stable enumeration of theorem x parameter rows (config order, sweep order).
std::vector<RowSpec> enumerate_rows(const CampaignConfig& cfg) {
    std::vector<RowSpec> rows;
    for (TheoremId id : cfg.theorems) {
        const bool np = theorem_needs_p(id), nq = theorem_needs_q(id);
        if (np && nq) {
            for (double q : cfg.q_values)
                rows.push_back({id, std::nullopt, q, row_key(id, std::nullopt, q)});
        } else if (np) {
            for (double p : cfg.p_values) rows.push_back({id, p, std::nullopt, row_key(id, p, std::nullopt)});
        } else if (nq) {
            for (double q : cfg.q_values) rows.push_back({id, std::nullopt, q, row_key(id, std::nullopt, q)});
        } else {
            rows.push_back({id, std::nullopt, std::nullopt, row_key(id, std::nullopt, std::nullopt)});
        }
    }
    return rows;
}

struct TrialContext {
    const CampaignConfig& cfg;
    const std::vector<RowSpec>& rows;
    const EtaMap& eta;        // from config
    const EtaMap& canonical;  // v - u, for the classical corollaries
};

bool sample_interval(const TrialContext& ctx, SplitMix64& rng, double& a, double& b) {
    const double lo = ctx.cfg.domain_lo, hi = ctx.cfg.domain_hi;
    const double span = hi - lo;
    for (int tries = 0; tries < 100; ++tries) {
        const double ca = rng.uniform(lo, hi);
        const double cb = rng.uniform(lo, hi);
        double e;
        try {
            e = ctx.eta.eval1(cb, ca);
        } catch (const DomainError&) {
            continue;
        }
        if (!(e > 1e-12 * span)) continue;
        const double end = ca + e;
        if (end < lo - 1e-12 * span || end > hi + 1e-12 * span) continue;
        a = ca;
        b = cb;
        return true;
    }
    return false;
}

Grid3 cert_grid_of(const CampaignConfig& cfg) {
    return Grid3{cfg.cert_grid, cfg.cert_grid, cfg.cert_grid / 2 + 1};
}

// Resolve all hypothesis certificates this trial needs, batched per eta.
CertStore certify_trial(const TrialContext& ctx, const Instance& inst) {
    CertStore store;
    const Grid3 grid = cert_grid_of(ctx.cfg);
    const double tol = ctx.cfg.tolerances.tau_class;

    std::vector<Hypothesis> needed;
    bool whole_f = false;
    for (const RowSpec& row : ctx.rows) {
        if (theorem_needs_q(row.id) && row.q && !(*row.q > 1.0) && theorem_needs_p(row.id))
            continue;  // conjugate pair needs q > 1; row is skipped later anyway
        Hypothesis h = hypothesis_for(row.id, row.p, row.q);
        if (h.whole_f) {
            whole_f = true;
            continue;
        }
        CertStore::Key key = CertStore::key_of(h);
        bool seen = store.certs.count(key) > 0;
        if (!seen) {
            store.certs[key] = PowerCertOutcome{};  // placeholder, filled below
            needed.push_back(h);
        }
    }

    if (whole_f) {
        store.whole_f_cert = classify(inst.f.value, ctx.eta, ctx.cfg.domain_lo, ctx.cfg.domain_hi,
                                      ConvexClass::Preinvex, grid, tol,
                                      /*refine_on_refute_only=*/true);
    }

    if (!needed.empty() && !inst.f.deriv) {
        store.derivative_error = "f has no usable derivative";
        return store;
    }

    auto h_abs = [&inst](double x) { return std::fabs(inst.f.deriv_at(x)); };
    for (int classical = 0; classical < 2; ++classical) {
        std::vector<PowerCertRequest> reqs;
        std::vector<CertStore::Key> keys;
        for (const Hypothesis& h : needed) {
            if (h.classical != static_cast<bool>(classical)) continue;
            reqs.push_back({h.exponent, h.cls});
            keys.push_back(CertStore::key_of(h));
        }
        if (reqs.empty()) continue;
        const EtaMap& eta = classical ? ctx.canonical : ctx.eta;
        // skip-gating only needs the verdict, not a sharpened witness
        auto outcomes = classify_powers(h_abs, eta, ctx.cfg.domain_lo, ctx.cfg.domain_hi, reqs,
                                        grid, tol, /*refine_refuted=*/false);
        for (std::size_t i = 0; i < keys.size(); ++i) store.certs[keys[i]] = outcomes[i];
    }
    return store;
}

TrialResult run_trial(const TrialContext& ctx, long long index) {
    TrialResult trial;
    trial.index = index;
    trial.sub_seed = trial_seed(ctx.cfg.seed, index);
    SplitMix64 rng(trial.sub_seed);

    const auto& families = ctx.cfg.families;
    trial.family = families[static_cast<std::size_t>(rng.next() % families.size())];
    Instance inst = sample_family(trial.family, rng, ctx.cfg.domain_lo, ctx.cfg.domain_hi,
                                  ctx.cfg.custom_expr);
    trial.f_src = inst.f_src;
    trial.fprime_src = inst.f.deriv_src;

    trial.sampled = sample_interval(ctx, rng, trial.a, trial.b);
    if (!trial.sampled) {
        for (const RowSpec& row : ctx.rows)
            trial.skips.push_back({row.key, "precondition-unmet: no admissible (a, b) sample "
                                            "with eta(b,a) > 0 after 100 rejections"});
        return trial;
    }

    CertStore certs = certify_trial(ctx, inst);
    if (certs.whole_f_cert)
        trial.certificates.push_back({"f preinvex", certs.whole_f_cert->certified,
                                      certs.whole_f_cert->worst_margin});
    for (const auto& [key, outcome] : certs.certs) {
        Hypothesis h{std::bit_cast<double>(key.exponent_bits),
                     static_cast<ConvexClass>(key.cls), key.classical, false};
        trial.certificates.push_back({hypothesis_desc(h),
                                      !outcome.positivity_failed && outcome.cert.certified,
                                      outcome.cert.worst_margin});
    }

    for (const RowSpec& row : ctx.rows) {
        if (theorem_needs_p(row.id) && theorem_needs_q(row.id) && row.q && !(*row.q > 1.0)) {
            trial.skips.push_back(
                {row.key, "precondition-unmet: conjugate exponents require q > 1"});
            continue;
        }

        Hypothesis h = hypothesis_for(row.id, row.p, row.q);
        if (h.whole_f) {
            if (!certs.whole_f_cert || !certs.whole_f_cert->certified) {
                trial.skips.push_back({row.key, "precondition-unmet: " + hypothesis_desc(h) +
                                                    " not certified"});
                continue;
            }
        } else {
            if (!certs.derivative_error.empty()) {
                trial.skips.push_back(
                    {row.key, "precondition-unmet: " + certs.derivative_error});
                continue;
            }
            const auto& outcome = certs.certs.at(CertStore::key_of(h));
            if (outcome.positivity_failed) {
                trial.skips.push_back({row.key, "precondition-unmet: positivity of " +
                                                    hypothesis_desc(h) + " fails on the grid"});
                continue;
            }
            if (!outcome.cert.certified) {
                trial.skips.push_back({row.key, "precondition-unmet: " + hypothesis_desc(h) +
                                                    " not certified (worst margin " +
                                                    num_str(outcome.cert.worst_margin) + ")"});
                continue;
            }
        }

        TrialRow out;
        out.key = row.key;
        BoundParams params{row.p, row.q};
        const double quad_tol = ctx.cfg.tolerances.quad_tol;
        const double tau = ctx.cfg.tolerances.tau_verify;
        try {
            out.eval = verify(row.id, inst.f, ctx.eta, trial.a, trial.b, params, quad_tol, tau);
        } catch (const Error& e) {
            trial.skips.push_back({row.key, std::string("precondition-unmet: ") + e.what()});
            continue;
        }

        if (out.eval.verdict == Verdict::Violated) {
            // Soundness gate: recompute at 10x tighter quadrature tolerance.
            out.gate_checked = true;
            try {
                BoundEvaluation tight =
                    verify(row.id, inst.f, ctx.eta, trial.a, trial.b, params, quad_tol / 10.0, tau);
                out.eval = tight;
                out.gate_passed = tight.verdict == Verdict::Violated;
            } catch (const Error&) {
                out.gate_passed = false;
            }
            if (out.gate_passed) {
                out.failure = out.eval.as_printed ? FailureClass::PaperAsPrintedViolation
                                                  : FailureClass::Violation;
            } else {
                out.failure = FailureClass::NumericalInconclusive;
            }
        } else if (out.eval.verdict == Verdict::Inconclusive) {
            out.failure = FailureClass::NumericalInconclusive;
        }
        trial.rows.push_back(std::move(out));
    }
    return trial;
}

}  // namespace

// ---------------------------------------------------------------------------
// Campaign driver

const char* failure_class_name(FailureClass c) {
    switch (c) {
        case FailureClass::None: return "none";
        case FailureClass::PreconditionUnmet: return "precondition-unmet";
        case FailureClass::NumericalInconclusive: return "numerical-inconclusive";
        case FailureClass::PaperAsPrintedViolation: return "paper-as-printed-violation";
        case FailureClass::Violation: return "violation";
    }
    return "?";
}

int margin_histogram_bin(double margin) {
    if (!(margin > 1e-12)) return 0;
    if (margin >= 1e3) return 63;
    // 64 log-spaced bins across the 15 decades [1e-12, 1e+3].
    const double idx = (std::log10(margin) + 12.0) / 15.0 * 64.0;
    return std::clamp(static_cast<int>(idx), 0, 63);
}

unsigned effective_thread_count() {
    unsigned n = 0;
    if (const char* env = std::getenv("HHINVEX_THREADS"); env && *env) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0) n = static_cast<unsigned>(v);
    }
    if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

CampaignResult run_campaign(const CampaignConfig& config) {
    CampaignResult result;
    result.config = config;
    result.trials.resize(static_cast<std::size_t>(config.trials));

    const std::vector<RowSpec> rows = enumerate_rows(config);
    const EtaMap eta = EtaMap::scalar(config.eta_src);
    const EtaMap canonical = EtaMap::scalar("v - u");
    const TrialContext ctx{config, rows, eta, canonical};

    const unsigned threads =
        std::min<unsigned>(effective_thread_count(),
                           static_cast<unsigned>(std::max<long long>(1, config.trials)));
    std::atomic<long long> next{0};
    auto worker = [&]() {
        for (;;) {
            const long long i = next.fetch_add(1);
            if (i >= config.trials) return;
            result.trials[static_cast<std::size_t>(i)] = run_trial(ctx, i);
        }
    };
    if (threads <= 1 || config.trials <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // Deterministic aggregation in trial order; the reducers (count, min,
    // histogram merge) are order-insensitive anyway.
    for (const RowSpec& row : rows) result.per_theorem[row.key];
    for (const TrialResult& trial : result.trials) {
        for (const TrialRow& row : trial.rows) {
            TheoremStat& stat = result.per_theorem[row.key];
            ++stat.evaluated;
            switch (row.eval.verdict) {
                case Verdict::Holds: ++stat.holds; break;
                case Verdict::Violated: ++stat.violated; break;
                case Verdict::Inconclusive: ++stat.inconclusive; break;
            }
            if (!stat.has_margin || row.eval.margin < stat.min_margin) {
                stat.min_margin = row.eval.margin;
                stat.has_margin = true;
            }
            ++stat.histogram[static_cast<std::size_t>(margin_histogram_bin(row.eval.margin))];
            if (row.failure == FailureClass::Violation ||
                row.failure == FailureClass::PaperAsPrintedViolation) {
                ++result.violations;
                if (row.failure == FailureClass::PaperAsPrintedViolation) ++result.paper_violations;
            }
        }
        for (const TrialSkip& skip : trial.skips) {
            ++result.per_theorem[skip.key].skipped;
            ++result.skipped_rows;
        }
    }
    return result;
}

std::vector<ConfirmedViolation> search_counterexamples(const CampaignConfig& config) {
    CampaignResult campaign = run_campaign(config);
    const EtaMap eta = EtaMap::scalar(config.eta_src);
    const EtaMap canonical = EtaMap::scalar("v - u");
    const double lo = config.domain_lo, hi = config.domain_hi;
    const double span = hi - lo;
    const double quad_tol = config.tolerances.quad_tol;
    const double tau = config.tolerances.tau_verify;

    std::vector<ConfirmedViolation> confirmed;
    for (const TrialResult& trial : campaign.trials) {
        ScalarFunction f;
        bool have_f = false;
        for (std::size_t ri = 0; ri < trial.rows.size(); ++ri) {
            const TrialRow& row = trial.rows[ri];
            if (!(row.eval.margin < 10.0 * tau)) continue;
            if (!have_f) {
                f = ScalarFunction::from_expression(trial.f_src);
                have_f = true;
            }

            // Local perturbation descent on the margin: 100 steps, halving
            // the step every 10.
            SplitMix64 rng(splitmix64_mix(trial.sub_seed ^ (0xC2B2AE3D27D4EB4Full * (ri + 1))));
            const TheoremId id = row.eval.id;
            BoundParams params = row.eval.params;
            double best_a = trial.a, best_b = trial.b;
            BoundEvaluation best = row.eval;
            double step0 = 0.01 * span;
            for (int stepi = 0; stepi < 100; ++stepi) {
                const double step = step0 * std::pow(0.5, stepi / 10);
                const double ca = std::clamp(best_a + step * rng.uniform(-1.0, 1.0), lo, hi);
                const double cb = std::clamp(best_b + step * rng.uniform(-1.0, 1.0), lo, hi);
                try {
                    const double e = theorem_is_classical(id) ? cb - ca : eta.eval1(cb, ca);
                    if (!(e > 0.0)) continue;
                    const double end = ca + e;
                    if (end < lo - 1e-12 * span || end > hi + 1e-12 * span) continue;
                    BoundEvaluation cand = verify(id, f, eta, ca, cb, params, quad_tol, tau);
                    if (cand.margin < best.margin) {
                        best = cand;
                        best_a = ca;
                        best_b = cb;
                    }
                } catch (const Error&) {
                    continue;
                }
            }

            if (!(best.margin < -best.error_budget - tau)) continue;
            BoundEvaluation tight;
            try {
                tight = verify(id, f, eta, best_a, best_b, params, quad_tol / 10.0, tau);
            } catch (const Error&) {
                continue;
            }
            if (tight.verdict != Verdict::Violated) continue;

            ConfirmedViolation v;
            v.trial = trial.index;
            v.key = row.key;
            v.family = trial.family;
            v.f_src = trial.f_src;
            v.classification = tight.as_printed ? FailureClass::PaperAsPrintedViolation
                                                : FailureClass::Violation;
            v.eval = tight;
            try {
                GapResult kernel = theorem_is_classical(id)
                                       ? tight_kernel(f, canonical, best_a, best_b, quad_tol)
                                       : tight_kernel(f, eta, best_a, best_b, quad_tol);
                v.kernel_value = kernel.value;
                v.kernel_error = kernel.error;
            } catch (const Error&) {
                v.kernel_value = std::numeric_limits<double>::quiet_NaN();
            }
            confirmed.push_back(std::move(v));
        }
    }
    return confirmed;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

Json config_json(const CampaignConfig& cfg) {
    Json j = Json::object();
    Json fams = Json::array();
    for (const auto& f : cfg.families) fams.push_back(Json(f));
    j["families"] = fams;
    Json theorems = Json::array();
    for (TheoremId id : cfg.theorems) theorems.push_back(Json(theorem_name(id)));
    j["theorems"] = theorems;
    j["trials"] = Json(cfg.trials);
    j["seed"] = Json(static_cast<long long>(cfg.seed));
    Json pv = Json::array();
    for (double p : cfg.p_values) pv.push_back(Json(p));
    j["p_values"] = pv;
    Json qv = Json::array();
    for (double q : cfg.q_values) qv.push_back(Json(q));
    j["q_values"] = qv;
    Json dom = Json::object();
    dom["lo"] = Json(cfg.domain_lo);
    dom["hi"] = Json(cfg.domain_hi);
    j["domain"] = dom;
    j["eta"] = Json(cfg.eta_src);
    Json tol = Json::object();
    tol["quad_tol"] = Json(cfg.tolerances.quad_tol);
    tol["tau_verify"] = Json(cfg.tolerances.tau_verify);
    tol["tau_class"] = Json(cfg.tolerances.tau_class);
    j["tolerances"] = tol;
    j["cert_grid"] = Json(cfg.cert_grid);
    if (!cfg.custom_expr.empty()) j["custom_expr"] = Json(cfg.custom_expr);
    return j;
}

}  // namespace

std::string summary_json(const CampaignResult& result) {
    Json j = Json::object();
    j["schema_version"] = Json(kSchemaVersion);
    j["tool_version"] = Json(kToolVersion);
    j["config"] = config_json(result.config);
    j["trials"] = Json(static_cast<long long>(result.trials.size()));
    j["violations"] = Json(result.violations);
    j["paper_as_printed_violations"] = Json(result.paper_violations);
    j["skipped_rows"] = Json(result.skipped_rows);

    Json per = Json::object();
    for (const auto& [key, stat] : result.per_theorem) {
        Json s = Json::object();
        s["evaluated"] = Json(stat.evaluated);
        s["holds"] = Json(stat.holds);
        s["violated"] = Json(stat.violated);
        s["inconclusive"] = Json(stat.inconclusive);
        s["skipped"] = Json(stat.skipped);
        s["min_margin"] = stat.has_margin ? Json(stat.min_margin) : Json();
        Json hist = Json::array();
        for (long long c : stat.histogram) hist.push_back(Json(c));
        s["margin_histogram"] = hist;
        per[key] = s;
    }
    j["per_theorem"] = per;
    return j.dump(2);
}

std::string trials_csv(const CampaignResult& result) {
    std::string out = "seed,trial,theorem,lhs,rhs,margin,verdict\n";
    const std::string seed = std::to_string(result.config.seed);
    for (const TrialResult& trial : result.trials) {
        for (const TrialRow& row : trial.rows) {
            out += seed;
            out += ',';
            out += std::to_string(trial.index);
            out += ',';
            out += row.key;
            out += ',';
            out += format_double(row.eval.lhs);
            out += ',';
            out += format_double(row.eval.rhs);
            out += ',';
            out += format_double(row.eval.margin);
            out += ',';
            out += verdict_name(row.eval.verdict);
            out += '\n';
        }
    }
    return out;
}

}  // namespace hhinvex
