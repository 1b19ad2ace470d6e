#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bounds.hpp"
#include "invex.hpp"

namespace hhinvex {

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64): fully specified so campaign outputs are
// byte-identical across platforms and thread counts.

std::uint64_t splitmix64_mix(std::uint64_t z);

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    double next_double();  // uniform in [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

private:
    std::uint64_t state_;
};

// Per-trial sub-seed: hash(seed, trial index).
std::uint64_t trial_seed(std::uint64_t seed, long long trial);

// ---------------------------------------------------------------------------
// Campaign configuration (JSON; see docs/campaign.example.json)

struct CampaignTolerances {
    double quad_tol = kDefaultQuadTol;
    double tau_verify = kDefaultVerifyTol;
    double tau_class = kDefaultClassTol;
};

struct CampaignConfig {
    std::vector<std::string> families;
    std::vector<TheoremId> theorems;
    long long trials = 0;
    std::uint64_t seed = 0;
    std::vector<double> p_values = {1.1, 1.5, 2.0, 3.0, 5.0, 10.0};
    std::vector<double> q_values = {1.0, 1.5, 2.0, 3.0, 5.0, 10.0};
    double domain_lo = -1.0;
    double domain_hi = 1.0;
    std::string eta_src = "v - u";
    CampaignTolerances tolerances;
    // Hypothesis-certification grid per axis (t axis uses cert_grid/2 + 1).
    // Smaller than the classify default: campaigns re-certify every trial.
    int cert_grid = 16;
    std::string custom_expr;  // used by the custom-expression family

    static CampaignConfig from_json_text(const std::string& text);
};

const std::vector<std::string>& known_families();

// ---------------------------------------------------------------------------
// Results

enum class FailureClass {
    None,
    PreconditionUnmet,
    NumericalInconclusive,
    PaperAsPrintedViolation,
    Violation,
};

const char* failure_class_name(FailureClass c);

struct TrialRow {
    std::string key;  // theorem with its swept parameter, e.g. "T3.4(q=2)"
    BoundEvaluation eval;
    FailureClass failure = FailureClass::None;
    bool gate_checked = false;  // 10x-tighter quadrature soundness gate ran
    bool gate_passed = false;
};

struct TrialSkip {
    std::string key;
    std::string reason;  // always classified precondition-unmet
};

struct TrialCert {
    std::string hypothesis;  // e.g. "|f'|^2 preinvex"
    bool certified = false;
    double worst_margin = 0.0;
};

struct TrialResult {
    long long index = 0;
    std::uint64_t sub_seed = 0;
    std::string family;
    std::string f_src;
    std::string fprime_src;
    double a = 0.0, b = 0.0;
    bool sampled = false;  // (a, b) sampling succeeded
    std::vector<TrialCert> certificates;
    std::vector<TrialRow> rows;
    std::vector<TrialSkip> skips;
};

struct TheoremStat {
    long long evaluated = 0;
    long long holds = 0;
    long long violated = 0;
    long long inconclusive = 0;
    long long skipped = 0;
    double min_margin = 0.0;
    bool has_margin = false;
    std::array<long long, 64> histogram{};  // log-spaced bins over [1e-12, 1e+3]
};

int margin_histogram_bin(double margin);

struct CampaignResult {
    CampaignConfig config;
    std::vector<TrialResult> trials;
    std::map<std::string, TheoremStat> per_theorem;
    long long violations = 0;        // confirmed violations (soundness gate passed)
    long long paper_violations = 0;  // subset tagged paper-as-printed
    long long skipped_rows = 0;
};

CampaignResult run_campaign(const CampaignConfig& config);

// Campaign plus local perturbation descent on the margin (100 steps, step
// decay 0.5) around any row with margin < 10 tau_verify; returns only
// violations confirmed by the 10x-tighter quadrature gate.
struct ConfirmedViolation {
    long long trial = 0;
    std::string key;
    std::string family;
    std::string f_src;
    FailureClass classification = FailureClass::Violation;
    BoundEvaluation eval;        // at the refined (a, b)
    double kernel_value = 0.0;   // tight-kernel cross-check at the refined point
    double kernel_error = 0.0;
};

std::vector<ConfirmedViolation> search_counterexamples(const CampaignConfig& config);

// Deterministic serializations (byte-identical for identical config + seed).
std::string summary_json(const CampaignResult& result);
std::string trials_csv(const CampaignResult& result);

// Thread cap from HHINVEX_THREADS (0 or unset = hardware concurrency).
unsigned effective_thread_count();

}  // namespace hhinvex
