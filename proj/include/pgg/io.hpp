#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pgg/engine.hpp"
#include "pgg/metrics.hpp"
#include "pgg/predict.hpp"
#include "pgg/stats.hpp"

namespace pgg {

constexpr const char* kToolVersion = "1.0.0";

// ---- designs.csv ----------------------------------------------------------
// Columns: config_id, wave, then one column per design parameter in the
// documented order (see kDesignParameterNames). Booleans are 0/1; the named
// enums use their Table-style vocabulary (variable/all_or_nothing,
// opt_in/opt_out, hidden/revealed).
void write_designs_csv(const std::string& path, const std::vector<PggConfig>& configs);
std::vector<PggConfig> read_designs_csv(const std::string& path);

// ---- game tables ----------------------------------------------------------
// games.csv:     game_id, config_id, arm, intended_size, started_size, seed
// decisions.csv: game_id, round, player_id, contribution
// sanctions.csv: game_id, round, actor, target, units, kind
// balances.csv:  game_id, round, player_id, net, balance
// Integers exact; reals with 12 significant digits.
struct BatchGame {
    std::string game_id;
    GameLog log;
};

void write_game_tables(const std::string& dir, const std::vector<BatchGame>& games);

// Reconstructs logs from decisions + sanctions + the configuration: per-round
// active counts come from decision rows, shares and nets are recomputed from
// the game mechanics. balances.csv is not needed for reconstruction.
std::vector<BatchGame> read_game_tables(const std::string& dir,
                                        const std::vector<PggConfig>& configs);

// ---- outcomes.csv ---------------------------------------------------------
struct OutcomeRow {
    std::string game_id;
    std::string config_id;
    bool treatment_arm = false;
    double efficiency = 0.0;
    std::optional<double> normalized_efficiency;  // empty field when undefined
    double mean_contribution_fraction = 0.0;
    bool included = true;
};

void write_outcomes_csv(const std::string& path, const std::vector<OutcomeRow>& rows);
std::vector<OutcomeRow> read_outcomes_csv(const std::string& path);

// ---- experiment records ---------------------------------------------------
void write_records_csv(const std::string& path, const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> read_records_csv(const std::string& path);

// ---- schema-mapped ingestion ----------------------------------------------
// Adapter from a source dataset's layout onto the canonical tables. Each
// table maps canonical column names to source column names and optionally
// translates source values (e.g. boolean encodings). The canonical identity
// map reads back this tool's own outputs.
struct TableMap {
    std::string file;
    std::map<std::string, std::string> columns;                          // canonical -> source
    std::map<std::string, std::map<std::string, std::string>> values;    // canonical col -> src -> canonical value
};

struct SchemaMap {
    TableMap configs;
    TableMap games;
    TableMap decisions;
    TableMap sanctions;  // optional: empty file name = no sanctions table
    std::vector<std::string> exclude_game_ids;    // technical-issue exclusions
    double outlier_normalized_efficiency = 10.0;  // content filter threshold
    bool drop_multiplier_one = true;
    bool any_time_dropout = false;  // alternative 18%-filter reading (sensitivity rerun)
};

SchemaMap default_schema_map();
SchemaMap load_schema_map(const std::string& path);

struct FilterReport {
    int input_games = 0;
    int technical_excluded = 0;
    int multiplier_one_excluded = 0;
    int outlier_excluded = 0;
    int recruitment_excluded = 0;  // 18% insufficient-recruitment filter
    int retained = 0;              // rows usable by downstream analyses
    int parse_failures = 0;        // malformed rows, collected not fatal
};

struct IngestResult {
    std::vector<PggConfig> configs;
    std::vector<BatchGame> games;      // games surviving technical/content filters
    std::vector<OutcomeRow> outcomes;  // same games; `included` carries the 18% filter
    FilterReport report;
};

// Throws Error(ingestion) naming the first missing mapped column; malformed
// rows are counted in the report instead of aborting the run.
IngestResult ingest_dataset(const std::string& dir, const SchemaMap& schema);

// ---- run manifest -----------------------------------------------------------
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command;
    std::uint64_t master_seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;   // path -> fnv1a64 hex digest
    std::vector<std::pair<std::string, std::string>> outputs;
};

std::string file_digest_hex(const std::string& path);
void write_manifest(const std::string& path, const RunManifest& manifest);

// ---- analysis artifacts -----------------------------------------------------
struct HeterogeneityReport {
    std::string wave;
    std::string group_by;  // "experiment" | "cluster"
    std::uint64_t seed = 0;
    std::vector<EffectEstimate> estimates;
    CochranResult cochran;
    double i2 = 0.0;
    std::optional<FrtResult> frt;
};

void write_hetero_json(const std::string& path, const HeterogeneityReport& report);

struct PredictionReport {
    std::string model_kind;
    std::vector<std::string> config_ids;
    std::vector<double> truths;
    std::vector<double> predictions;
    EvalMetrics metrics;
    BaselineRmse baseline_rmse;
    std::vector<std::string> bootstrap_names;
    BootstrapReport bootstrap;
    std::vector<FeatureImportance> importance;
    double shap_base_value = 0.0;
    std::vector<std::vector<double>> shap_per_base;  // [record][base feature]
};

void write_prediction_report_json(const std::string& path, const PredictionReport& report);

void save_model_json(const std::string& path, const LinearModel& model);
LinearModel load_model_json(const std::string& path);

}  // namespace pgg
