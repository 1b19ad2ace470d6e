#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <set>
#include <string>

#include "harness.hpp"

using namespace hhinvex;

namespace {

std::string base_config(const std::string& families, const std::string& theorems, int trials,
                        const std::string& extra = "") {
    return std::string("{\"families\":[") + families + "],\"theorems\":[" + theorems +
           "],\"trials\":" + std::to_string(trials) + ",\"seed\":42" + extra + "}";
}

}  // namespace

TEST_CASE("trial seeds are deterministic and well spread") {
    CHECK(trial_seed(42, 0) == trial_seed(42, 0));
    std::set<std::uint64_t> seen;
    for (long long i = 0; i < 1000; ++i) seen.insert(trial_seed(42, i));
    CHECK(seen.size() == 1000);
    CHECK(trial_seed(42, 0) != trial_seed(43, 0));

    SplitMix64 rng(7u);
    for (int i = 0; i < 1000; ++i) {
        const double d = rng.next_double();
        CHECK(d >= 0.0);
        CHECK(d < 1.0);
    }
}

TEST_CASE("config validation accepts the documented schema and rejects everything else") {
    CampaignConfig cfg = CampaignConfig::from_json_text(base_config(
        "\"exp-affine\"", "\"Tz\",\"Tfd\"", 10,
        ",\"p_values\":[2],\"q_values\":[2,3],\"domain\":{\"lo\":-1,\"hi\":1},"
        "\"eta\":\"v - u\",\"tolerances\":{\"quad_tol\":1e-10},\"cert_grid\":8"));
    CHECK(cfg.trials == 10);
    CHECK(cfg.seed == 42);
    CHECK(cfg.theorems.size() == 2);
    CHECK(cfg.q_values == std::vector<double>{2.0, 3.0});
    CHECK(cfg.cert_grid == 8);
    CHECK(cfg.tolerances.quad_tol == 1e-10);
    CHECK(cfg.tolerances.tau_verify == 1e-9);  // default preserved

    // defaults for the sweep values match the design ledger
    CampaignConfig defaults =
        CampaignConfig::from_json_text(base_config("\"poly-convex\"", "\"T3.1\"", 1));
    CHECK(defaults.p_values == std::vector<double>{1.1, 1.5, 2.0, 3.0, 5.0, 10.0});
    CHECK(defaults.q_values == std::vector<double>{1.0, 1.5, 2.0, 3.0, 5.0, 10.0});

    CHECK_THROWS_AS(CampaignConfig::from_json_text("not json"), ConfigError);
    CHECK_THROWS_AS(CampaignConfig::from_json_text("[]"), ConfigError);
    CHECK_THROWS_AS(CampaignConfig::from_json_text(
                        base_config("\"poly-convex\"", "\"T9.9\"", 1)),
                    ConfigError);  // unknown theorem
    CHECK_THROWS_AS(CampaignConfig::from_json_text(base_config("\"no-such\"", "\"T3.1\"", 1)),
                    ConfigError);  // unknown family
    CHECK_THROWS_AS(CampaignConfig::from_json_text(base_config("\"poly-convex\"", "\"Eq1\"", 1)),
                    ConfigError);  // path theorems are not campaign theorems
    CHECK_THROWS_AS(CampaignConfig::from_json_text(
                        base_config("\"poly-convex\"", "\"T3.1\"", 1, ",\"bogus\":1")),
                    ConfigError);  // unknown key
    CHECK_THROWS_AS(CampaignConfig::from_json_text(base_config("\"poly-convex\"", "\"T3.1\"", -1)),
                    ConfigError);
    CHECK_THROWS_AS(CampaignConfig::from_json_text(base_config(
                        "\"poly-convex\"", "\"T3.1\"", 1, ",\"eta\":\"w - u\"")),
                    ConfigError);  // eta does not parse
    CHECK_THROWS_AS(CampaignConfig::from_json_text(base_config(
                        "\"poly-convex\"", "\"T3.2\"", 1, ",\"p_values\":[1]")),
                    ConfigError);  // p must exceed 1
    CHECK_THROWS_AS(CampaignConfig::from_json_text(
                        base_config("\"custom-expression\"", "\"T3.1\"", 1)),
                    ConfigError);  // custom family without custom_expr
}

TEST_CASE("single-trial campaign rows reproduce direct verification") {
    CampaignConfig cfg = CampaignConfig::from_json_text(base_config(
        "\"custom-expression\"", "\"T3.1\"", 1,
        ",\"domain\":{\"lo\":0,\"hi\":1},\"custom_expr\":\"x^2\",\"cert_grid\":8"));
    CampaignResult result = run_campaign(cfg);
    REQUIRE(result.trials.size() == 1);
    const TrialResult& trial = result.trials[0];
    REQUIRE(trial.rows.size() == 1);
    CHECK(trial.f_src == "x^2");
    CHECK(trial.rows[0].key == "T3.1");
    CHECK(trial.rows[0].eval.verdict == Verdict::Holds);

    // re-evaluating at the trial's sampled (a, b) gives identical numbers
    ScalarFunction f = ScalarFunction::from_expression(trial.f_src);
    EtaMap eta = EtaMap::scalar(cfg.eta_src);
    BoundEvaluation direct = verify(TheoremId::T31, f, eta, trial.a, trial.b, {},
                                    cfg.tolerances.quad_tol, cfg.tolerances.tau_verify);
    CHECK(direct.lhs == trial.rows[0].eval.lhs);
    CHECK(direct.rhs == trial.rows[0].eval.rhs);
    CHECK(direct.margin == trial.rows[0].eval.margin);
}

TEST_CASE("preinvex families hold across a small campaign") {
    CampaignConfig cfg = CampaignConfig::from_json_text(base_config(
        "\"poly-convex\",\"exp-affine\",\"abs-kink\"",
        "\"HHchain\",\"T3.1\",\"T3.2\",\"T3.3\",\"T3.4\",\"T3.5\"", 150, ",\"cert_grid\":8"));
    CampaignResult result = run_campaign(cfg);
    CHECK(result.violations == 0);
    long long evaluated = 0;
    for (const auto& [key, stat] : result.per_theorem) {
        CHECK(stat.violated == 0);
        evaluated += stat.evaluated;
    }
    CHECK(evaluated > 0);
}

TEST_CASE("log-preinvex campaign: Tz clean, Tfd violations tagged as-printed and gated") {
    // [-2, 2] makes the effective exponent alpha*(b-a) large enough that the
    // printed Tfd bound is genuinely exceeded on a fraction of the trials.
    CampaignConfig cfg = CampaignConfig::from_json_text(base_config(
        "\"exp-affine\"", "\"Tz\",\"Tfd\",\"Cq\",\"Cq1\"", 300,
        ",\"domain\":{\"lo\":-2,\"hi\":2},\"cert_grid\":8"));
    CampaignResult result = run_campaign(cfg);
    long long tfd_violations = 0;
    for (const TrialResult& trial : result.trials) {
        for (const TrialRow& row : trial.rows) {
            const bool is_z = row.key.rfind("Tz", 0) == 0 || row.key.rfind("Cq(", 0) == 0 ||
                              row.key == "Cq";
            if (is_z) {
                CHECK(row.eval.verdict == Verdict::Holds);
            }
            if (row.failure == FailureClass::PaperAsPrintedViolation) {
                ++tfd_violations;
                CHECK(row.eval.as_printed);
                CHECK(row.gate_checked);
                CHECK(row.gate_passed);
            }
            // nothing may be counted violated without the gate
            if (row.eval.verdict == Verdict::Violated) CHECK(row.gate_checked);
        }
    }
    CHECK(result.paper_violations == tfd_violations);
    // the steep exp-affine instances do trip the printed Tfd bound
    CHECK(tfd_violations > 0);
}

TEST_CASE("mis-scoped runs skip with precondition-unmet instead of claiming") {
    // |f'| = |cos| is concave around its maximum, so the T3.1 hypothesis
    // fails certification and every trial is skipped.
    CampaignConfig cfg = CampaignConfig::from_json_text(base_config(
        "\"custom-expression\"", "\"T3.1\"", 20,
        ",\"domain\":{\"lo\":0,\"hi\":3},\"custom_expr\":\"sin(x)\",\"cert_grid\":8"));
    CampaignResult result = run_campaign(cfg);
    CHECK(result.violations == 0);
    const TheoremStat& stat = result.per_theorem.at("T3.1");
    CHECK(stat.evaluated == 0);
    CHECK(stat.skipped == 20);
    for (const TrialResult& trial : result.trials) {
        REQUIRE(trial.skips.size() == 1);
        CHECK(trial.skips[0].reason.find("precondition-unmet") == 0);
    }
}

TEST_CASE("empty campaign") {
    CampaignConfig cfg =
        CampaignConfig::from_json_text(base_config("\"poly-convex\"", "\"T3.1\"", 0));
    CampaignResult result = run_campaign(cfg);
    CHECK(result.violations == 0);
    CHECK(trials_csv(result) == "seed,trial,theorem,lhs,rhs,margin,verdict\n");
    CHECK(summary_json(result).find("\"trials\": 0") != std::string::npos);
}

TEST_CASE("campaign outputs are byte-identical across thread schedules") {
    const std::string config = base_config(
        "\"poly-convex\",\"exp-affine\"", "\"T3.1\",\"T3.4\",\"Tz\"", 60, ",\"cert_grid\":8");
    CampaignConfig cfg = CampaignConfig::from_json_text(config);

    setenv("HHINVEX_THREADS", "1", 1);
    CampaignResult serial = run_campaign(cfg);
    setenv("HHINVEX_THREADS", "7", 1);
    CampaignResult parallel = run_campaign(cfg);
    unsetenv("HHINVEX_THREADS");

    CHECK(summary_json(serial) == summary_json(parallel));
    CHECK(trials_csv(serial) == trials_csv(parallel));
}

TEST_CASE("margin histogram bins") {
    CHECK(margin_histogram_bin(0.0) == 0);
    CHECK(margin_histogram_bin(-5.0) == 0);
    CHECK(margin_histogram_bin(1e-13) == 0);
    CHECK(margin_histogram_bin(1e4) == 63);
    CHECK(margin_histogram_bin(1.0) == 51);  // (log10(1)+12)/15*64
    CHECK(margin_histogram_bin(999.0) == 63);
}

TEST_CASE("counterexample search: proven theorems yield nothing, printed Tfd confirms") {
    CampaignConfig clean = CampaignConfig::from_json_text(base_config(
        "\"poly-convex\"", "\"T3.1\",\"T3.2\",\"T3.3\",\"T3.4\",\"T3.5\"", 80,
        ",\"cert_grid\":8"));
    CHECK(search_counterexamples(clean).empty());

    CampaignConfig printed = CampaignConfig::from_json_text(base_config(
        "\"exp-affine\"", "\"Tfd\"", 150, ",\"domain\":{\"lo\":-2,\"hi\":2},\"cert_grid\":8"));
    auto found = search_counterexamples(printed);
    CHECK(!found.empty());
    for (const ConfirmedViolation& v : found) {
        CHECK(v.classification == FailureClass::PaperAsPrintedViolation);
        CHECK(v.eval.verdict == Verdict::Violated);
        CHECK(v.eval.as_printed);
        // the sound kernel reference dominates the measured gap
        CHECK(v.eval.lhs <= v.kernel_value + v.kernel_error + v.eval.error_budget + 1e-9);
        // and the printed RHS genuinely sits below the gap
        CHECK(v.eval.rhs < v.eval.lhs);
    }
}

TEST_CASE("trial reports are reproducible") {
    CampaignConfig cfg = CampaignConfig::from_json_text(
        base_config("\"exp-convex\"", "\"T3.1\",\"Tz\"", 25, ",\"cert_grid\":8"));
    CampaignResult first = run_campaign(cfg);
    CampaignResult second = run_campaign(cfg);
    REQUIRE(first.trials.size() == second.trials.size());
    for (std::size_t i = 0; i < first.trials.size(); ++i) {
        CHECK(first.trials[i].f_src == second.trials[i].f_src);
        CHECK(first.trials[i].a == second.trials[i].a);
        CHECK(first.trials[i].b == second.trials[i].b);
        REQUIRE(first.trials[i].rows.size() == second.trials[i].rows.size());
        for (std::size_t r = 0; r < first.trials[i].rows.size(); ++r) {
            CHECK(first.trials[i].rows[r].eval.margin == second.trials[i].rows[r].eval.margin);
        }
    }
}
