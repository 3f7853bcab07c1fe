#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgg/io.hpp"

namespace pgg {

// Orchestration shared by the CLI and the end-to-end tests. Every stage
// writes its declared outputs plus a manifest.json recording the tool
// version, master seed, and input/output digests; outputs are byte-identical
// across reruns with the same inputs and seed.

struct DesignSobolOptions {
    int n = 256;
    bool scramble = false;
    std::uint64_t seed = 0;
    std::string out_csv;
};

struct DesignRandomOptions {
    int n = 40;
    std::uint64_t seed = 0;
    std::string exclude_csv;  // optional: designs whose parameter combinations to avoid
    std::string out_csv;
};

void run_design_sobol(const DesignSobolOptions& opt);
void run_design_random(const DesignRandomOptions& opt);

// Seat policies for simulated games: either a positional roster (cycled to
// each game's group size) or a weighted mix drawn per seat from the game's
// roster stream. agents.json format:
//   {"roster": [{"policy": "norm_enforcer", "threshold": 10, "budget": 2}, ...]}
// or
//   {"mix": [{"policy": "always_cooperate", "weight": 2}, ...]}
struct RosterSpec {
    std::vector<PolicySpec> positional;
    std::vector<std::pair<PolicySpec, int>> mix;
};

RosterSpec default_roster_spec();
RosterSpec load_roster_spec(const std::string& agents_json_path);
std::vector<PolicySpec> build_roster(const RosterSpec& spec, int group_size, Rng& rng);

struct SimulateOptions {
    std::string designs_csv;
    std::string agents_json;  // empty = default mix
    std::uint64_t master_seed = 0;
    std::string outdir;
    int trials = 1;             // games per arm per configuration
    double dropout_prob = 0.0;  // per-player chance of dropping at a uniform round
    bool any_time_dropout = false;  // alternative 18%-filter reading
};

struct SimulateSummary {
    int games = 0;
    int included = 0;
};

// Expands each configuration into treatment/control arms x trials, runs the
// engine, and writes games/decisions/sanctions/balances/outcomes CSVs. Game
// seeds derive from (master_seed, "game", fnv(game_id)), so the batch is
// independent of execution order.
SimulateSummary run_simulate(const SimulateOptions& opt);

struct IngestOptions {
    std::string src_dir;
    std::string schema_json;  // empty = canonical identity schema
    std::string outdir;
};

FilterReport run_ingest(const IngestOptions& opt);

struct OlsSummary {
    double intercept = 0.0;
    double coefficient = 0.0;  // punishment indicator
    double se_intercept = 0.0;
    double se_coefficient = 0.0;
    int n = 0;
};

struct AnalyzeOptions {
    std::string outcomes_csv;
    std::string designs_csv;  // required for group_by == "cluster"
    std::string group_by = "experiment";
    int clusters = 20;
    std::uint64_t seed = 0;
    bool run_frt = true;
    FrtOptions frt;
    std::string out_json;
};

// Builds per-group punishment-effect estimates from included games with
// defined normalized efficiency, runs Cochran's Q / I^2, the game-level OLS
// of normalized efficiency on the punishment indicator, and (optionally) the
// pooled FRT.
HeterogeneityReport analyze_heterogeneity(const AnalyzeOptions& opt, OlsSummary* ols_out = nullptr);

// Arm-mean experiment records (standard efficiency, percentage points).
std::vector<ExperimentRecord> records_from_outcomes(const std::vector<OutcomeRow>& outcomes,
                                                    const std::vector<PggConfig>& configs,
                                                    Wave wave);

struct PredictFitOptions {
    std::string train_records_csv;
    std::string model_kind = "enet";  // "enet" | "ols"
    double alpha = 0.07;
    double l1_ratio = 0.15;
    bool with_interactions = true;
    bool cross_validate = false;  // pick (alpha, l1) by grid CV before fitting
    std::vector<double> alpha_grid;
    std::vector<double> l1_grid;
    int folds = 10;
    std::uint64_t seed = 0;
    std::string out_model_json;
};

struct PredictFitSummary {
    double alpha = 0.0;
    double l1_ratio = 0.0;
    std::optional<double> cv_rmse;
};

PredictFitSummary run_predict_fit(const PredictFitOptions& opt);

struct PredictEvalOptions {
    std::string model_json;
    std::string validation_records_csv;
    std::uint64_t seed = 0;
    int bootstrap_resamples = 1000;
    int importance_repeats = 30;
    std::string out_report_json;
};

PredictionReport run_predict_eval(const PredictEvalOptions& opt);

struct ReportOptions {
    std::string outcomes_csv;          // optional
    std::string hetero_json;           // optional, copied through
    std::string prediction_json;       // optional, copied through
    std::string outdir;
};

// Emits summary.json plus outcome summary tables.
void run_report(const ReportOptions& opt);

}  // namespace pgg
