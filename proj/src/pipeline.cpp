#include "pgg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <json.hpp>

#include "pgg/csv.hpp"
#include "pgg/errors.hpp"

namespace pgg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Manifests record file basenames, not paths, so identical runs rooted at
// different directories produce byte-identical artifacts.
RunManifest make_manifest(const std::string& command, std::uint64_t seed,
                          const std::vector<std::string>& inputs,
                          const std::vector<std::string>& outputs) {
    RunManifest m;
    m.command = command;
    m.master_seed = seed;
    for (const auto& p : inputs) {
        if (!p.empty() && fs::exists(p))
            m.inputs.emplace_back(fs::path(p).filename().string(), file_digest_hex(p));
    }
    for (const auto& p : outputs) {
        if (fs::exists(p))
            m.outputs.emplace_back(fs::path(p).filename().string(), file_digest_hex(p));
    }
    return m;
}

}  // namespace

void run_design_sobol(const DesignSobolOptions& opt) {
    auto configs = sobol_designs(opt.n, opt.scramble, opt.seed);
    write_designs_csv(opt.out_csv, configs);
    const std::string manifest_path = opt.out_csv + ".manifest.json";
    write_manifest(manifest_path, make_manifest("design sobol", opt.seed, {}, {opt.out_csv}));
}

void run_design_random(const DesignRandomOptions& opt) {
    std::vector<PggConfig> exclusions;
    if (!opt.exclude_csv.empty()) exclusions = read_designs_csv(opt.exclude_csv);
    auto configs = random_generate(opt.n, ParameterBounds{}, opt.seed, exclusions);
    write_designs_csv(opt.out_csv, configs);
    const std::string manifest_path = opt.out_csv + ".manifest.json";
    write_manifest(manifest_path,
                   make_manifest("design random", opt.seed, {opt.exclude_csv}, {opt.out_csv}));
}

RosterSpec default_roster_spec() {
    RosterSpec spec;
    PolicySpec coop{PolicyName::always_cooperate, 1.0, 10, 1};
    PolicySpec defect{PolicyName::always_defect, 0.0, 10, 1};
    PolicySpec half{PolicyName::fractional, 0.5, 10, 1};
    PolicySpec conditional{PolicyName::conditional_cooperator, 1.0, 10, 1};
    PolicySpec enforcer{PolicyName::norm_enforcer, 1.0, 10, 2};
    PolicySpec reciprocator{PolicyName::reciprocator, 1.0, 10, 1};
    PolicySpec random_policy{PolicyName::random_uniform, 1.0, 10, 1};
    spec.mix = {{coop, 2},      {defect, 2},       {half, 1}, {conditional, 3},
                {enforcer, 2},  {reciprocator, 1}, {random_policy, 1}};
    return spec;
}

namespace {

PolicySpec policy_from_json(const json& j) {
    PolicySpec p;
    p.policy = policy_from_string(j.at("policy").get<std::string>());
    if (j.contains("fraction")) p.fraction = j.at("fraction").get<double>();
    if (j.contains("threshold")) p.punish_threshold = j.at("threshold").get<int>();
    if (j.contains("budget")) p.sanction_budget = j.at("budget").get<int>();
    if (p.fraction < 0.0 || p.fraction > 1.0) {
        throw Error(ErrorCode::usage, "policy fraction must be within [0,1]");
    }
    return p;
}

}  // namespace

RosterSpec load_roster_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open agents file " + path);
    json j;
    in >> j;
    RosterSpec spec;
    if (j.contains("roster")) {
        for (const auto& item : j.at("roster")) spec.positional.push_back(policy_from_json(item));
    }
    if (j.contains("mix")) {
        for (const auto& item : j.at("mix")) {
            spec.mix.emplace_back(policy_from_json(item),
                                  item.contains("weight") ? item.at("weight").get<int>() : 1);
        }
    }
    if (spec.positional.empty() && spec.mix.empty()) {
        throw Error(ErrorCode::usage, path + " defines neither \"roster\" nor \"mix\"");
    }
    return spec;
}

std::vector<PolicySpec> build_roster(const RosterSpec& spec, int group_size, Rng& rng) {
    std::vector<PolicySpec> roster;
    roster.reserve(static_cast<std::size_t>(group_size));
    if (!spec.positional.empty()) {
        for (int i = 0; i < group_size; ++i) {
            roster.push_back(spec.positional[static_cast<std::size_t>(i) % spec.positional.size()]);
        }
        return roster;
    }
    int total_weight = 0;
    for (const auto& [_, w] : spec.mix) total_weight += w;
    for (int i = 0; i < group_size; ++i) {
        int pick = static_cast<int>(rng.uniform_int(0, total_weight - 1));
        for (const auto& [policy, w] : spec.mix) {
            if (pick < w) {
                roster.push_back(policy);
                break;
            }
            pick -= w;
        }
    }
    return roster;
}

SimulateSummary run_simulate(const SimulateOptions& opt) {
    const auto configs = read_designs_csv(opt.designs_csv);
    const RosterSpec roster_spec =
        opt.agents_json.empty() ? default_roster_spec() : load_roster_spec(opt.agents_json);

    std::vector<BatchGame> games;
    std::vector<OutcomeRow> outcomes;
    SimulateSummary summary;

    for (const auto& base_config : configs) {
        for (int trial = 0; trial < opt.trials; ++trial) {
            // the same roster plays both arms of a pair
            Rng roster_rng(derive_seed(opt.master_seed, "roster",
                                       fnv1a64(base_config.config_id) ^
                                           static_cast<std::uint64_t>(trial)));
            const auto roster = build_roster(roster_spec, base_config.group_size, roster_rng);
            for (bool treatment : {false, true}) {
                GameSpec spec;
                spec.config = base_config;
                spec.config.punishment_enabled = treatment;
                spec.intended_size = base_config.group_size;
                spec.roster = roster;

                const std::string game_id = base_config.config_id +
                                            (treatment ? "-treatment-" : "-control-") +
                                            std::to_string(trial);
                spec.seed = derive_seed(opt.master_seed, "game", fnv1a64(game_id));

                if (opt.dropout_prob > 0.0) {
                    Rng drop_rng(derive_seed(opt.master_seed, "dropout", fnv1a64(game_id)));
                    for (int pid = 0; pid < spec.intended_size; ++pid) {
                        if (drop_rng.uniform() < opt.dropout_prob) {
                            spec.dropout_schedule.push_back(
                                {pid, static_cast<int>(drop_rng.uniform_int(
                                          1, spec.config.game_length))});
                        }
                    }
                }

                GameLog log = run_game(spec);
                if (log.rounds.empty()) continue;  // all players dropped before round 1
                GameOutcome outcome = compute_outcome(log, opt.any_time_dropout);
                OutcomeRow row;
                row.game_id = game_id;
                row.config_id = base_config.config_id;
                row.treatment_arm = treatment;
                row.efficiency = outcome.efficiency;
                row.normalized_efficiency = outcome.normalized_efficiency;
                row.mean_contribution_fraction = outcome.mean_contribution_fraction;
                row.included = outcome.included;
                outcomes.push_back(row);
                games.push_back({game_id, std::move(log)});
                ++summary.games;
                summary.included += row.included ? 1 : 0;
            }
        }
    }

    fs::create_directories(opt.outdir);
    write_game_tables(opt.outdir, games);
    write_outcomes_csv(opt.outdir + "/outcomes.csv", outcomes);
    write_manifest(opt.outdir + "/manifest.json",
                   make_manifest("simulate", opt.master_seed, {opt.designs_csv, opt.agents_json},
                                 {opt.outdir + "/games.csv", opt.outdir + "/decisions.csv",
                                  opt.outdir + "/sanctions.csv", opt.outdir + "/balances.csv",
                                  opt.outdir + "/outcomes.csv"}));
    return summary;
}

FilterReport run_ingest(const IngestOptions& opt) {
    const SchemaMap schema =
        opt.schema_json.empty() ? default_schema_map() : load_schema_map(opt.schema_json);
    IngestResult result = ingest_dataset(opt.src_dir, schema);

    fs::create_directories(opt.outdir);
    write_designs_csv(opt.outdir + "/designs.csv", result.configs);
    write_game_tables(opt.outdir, result.games);
    write_outcomes_csv(opt.outdir + "/outcomes.csv", result.outcomes);

    json rep;
    rep["input_games"] = result.report.input_games;
    rep["technical_excluded"] = result.report.technical_excluded;
    rep["multiplier_one_excluded"] = result.report.multiplier_one_excluded;
    rep["outlier_excluded"] = result.report.outlier_excluded;
    rep["recruitment_excluded"] = result.report.recruitment_excluded;
    rep["retained"] = result.report.retained;
    rep["parse_failures"] = result.report.parse_failures;
    std::ofstream out(opt.outdir + "/filter_report.json", std::ios::binary);
    out << rep.dump(2) << "\n";

    write_manifest(opt.outdir + "/manifest.json",
                   make_manifest("ingest", 0, {opt.schema_json},
                                 {opt.outdir + "/designs.csv", opt.outdir + "/outcomes.csv",
                                  opt.outdir + "/filter_report.json"}));
    return result.report;
}

namespace {

struct ArmValues {
    std::vector<double> treatment;
    std::vector<double> control;
};

}  // namespace

HeterogeneityReport analyze_heterogeneity(const AnalyzeOptions& opt, OlsSummary* ols_out) {
    const auto outcomes = read_outcomes_csv(opt.outcomes_csv);

    // analysis set: included games with a defined normalized efficiency
    std::vector<const OutcomeRow*> usable;
    for (const auto& o : outcomes) {
        if (o.included && o.normalized_efficiency.has_value()) usable.push_back(&o);
    }
    if (usable.size() < 4) {
        throw Error(ErrorCode::usage, "not enough usable games for heterogeneity analysis");
    }

    HeterogeneityReport report;
    report.group_by = opt.group_by;
    report.seed = opt.seed;

    std::map<std::string, ArmValues> groups;
    if (opt.group_by == "experiment") {
        for (const auto* o : usable) {
            auto& g = groups[o->config_id];
            (o->treatment_arm ? g.treatment : g.control).push_back(*o->normalized_efficiency);
        }
    } else if (opt.group_by == "cluster") {
        if (opt.designs_csv.empty()) {
            throw Error(ErrorCode::usage, "--group-by cluster requires --designs");
        }
        auto all_configs = read_designs_csv(opt.designs_csv);
        // cluster only configurations that actually have usable games
        std::set<std::string> with_games;
        for (const auto* o : usable) with_games.insert(o->config_id);
        std::vector<PggConfig> configs;
        for (auto& c : all_configs) {
            if (with_games.count(c.config_id)) configs.push_back(c);
        }
        if (configs.empty()) throw Error(ErrorCode::usage, "no designs match the outcome rows");
        const Matrix features = config_cluster_features(configs);
        const KmeansResult km =
            kmeans(features, std::min<int>(opt.clusters, static_cast<int>(configs.size())),
                   opt.seed);
        std::map<std::string, int> cluster_of;
        for (std::size_t i = 0; i < configs.size(); ++i)
            cluster_of[configs[i].config_id] = km.assignment[i];
        for (const auto* o : usable) {
            auto it = cluster_of.find(o->config_id);
            if (it == cluster_of.end()) continue;
            auto& g = groups["cluster_" + std::to_string(it->second)];
            (o->treatment_arm ? g.treatment : g.control).push_back(*o->normalized_efficiency);
        }
    } else {
        throw Error(ErrorCode::usage, "--group-by must be experiment or cluster");
    }

    for (const auto& [label, arms] : groups) {
        if (arms.treatment.size() < 2 || arms.control.size() < 2) {
            std::cerr << "[pgg] skipping group " << label
                      << ": needs at least 2 games per arm for a standard error\n";
            continue;
        }
        report.estimates.push_back(diff_means_effect(arms.treatment, arms.control, label));
    }
    if (report.estimates.size() < 2) {
        throw Error(ErrorCode::usage,
                    "fewer than 2 groups have enough games per arm; try --group-by cluster");
    }
    report.cochran = cochran_q(report.estimates);
    report.i2 = i_squared(report.cochran.q, static_cast<int>(report.estimates.size()));

    if (opt.run_frt) {
        std::vector<double> control;
        std::vector<double> treatment;
        for (const auto* o : usable) {
            (o->treatment_arm ? treatment : control).push_back(*o->normalized_efficiency);
        }
        FrtOptions frt_opt = opt.frt;
        frt_opt.seed = derive_seed(opt.seed, "analyze.frt");
        report.frt = frt_max_p(control, treatment, frt_opt);
    }

    if (ols_out) {
        Matrix x;
        std::vector<double> y;
        for (const auto* o : usable) {
            x.push_back({o->treatment_arm ? 1.0 : 0.0});
            y.push_back(*o->normalized_efficiency);
        }
        const OlsResult ols = ols_fit(x, y, /*add_intercept=*/true);
        ols_out->intercept = ols.coef[0];
        ols_out->coefficient = ols.coef[1];
        ols_out->se_intercept = ols.se[0];
        ols_out->se_coefficient = ols.se[1];
        ols_out->n = static_cast<int>(y.size());
    }

    if (!opt.out_json.empty()) {
        write_hetero_json(opt.out_json, report);
        write_manifest(opt.out_json + ".manifest.json",
                       make_manifest("analyze heterogeneity", opt.seed,
                                     {opt.outcomes_csv, opt.designs_csv}, {opt.out_json}));
    }
    return report;
}

std::vector<ExperimentRecord> records_from_outcomes(const std::vector<OutcomeRow>& outcomes,
                                                    const std::vector<PggConfig>& configs,
                                                    Wave wave) {
    std::vector<GameOutcomeRow> rows;
    rows.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        rows.push_back({o.game_id, o.config_id, o.treatment_arm, o.efficiency, o.included});
    }
    return build_matched_dataset(rows, configs, wave);
}

PredictFitSummary run_predict_fit(const PredictFitOptions& opt) {
    const auto learning = read_records_csv(opt.train_records_csv);
    PredictFitSummary summary;
    double alpha = opt.alpha;
    double l1 = opt.l1_ratio;
    if (opt.cross_validate && opt.model_kind == "enet") {
        std::vector<double> alpha_grid = opt.alpha_grid;
        std::vector<double> l1_grid = opt.l1_grid;
        if (alpha_grid.empty())
            alpha_grid = {0.001, 0.003, 0.01, 0.03, 0.05, 0.07, 0.1};
        if (l1_grid.empty()) l1_grid = {0.0, 0.05, 0.15, 0.3, 0.5, 0.7, 0.9, 1.0};
        const CvResult cv = cross_validate_grid(learning, alpha_grid, l1_grid, opt.folds,
                                                opt.seed, opt.with_interactions);
        alpha = cv.best_alpha;
        l1 = cv.best_l1_ratio;
        summary.cv_rmse = cv.best_rmse;
    }
    const LinearModel model =
        train_model(learning, opt.model_kind, alpha, l1, opt.with_interactions);
    save_model_json(opt.out_model_json, model);
    write_manifest(opt.out_model_json + ".manifest.json",
                   make_manifest("predict fit", opt.seed, {opt.train_records_csv},
                                 {opt.out_model_json}));
    summary.alpha = alpha;
    summary.l1_ratio = l1;
    return summary;
}

PredictionReport run_predict_eval(const PredictEvalOptions& opt) {
    const LinearModel model = load_model_json(opt.model_json);
    const auto validation = read_records_csv(opt.validation_records_csv);
    if (validation.empty()) throw Error(ErrorCode::usage, "no validation records");

    PredictionReport report;
    report.model_kind = model.kind;
    report.predictions = predict(model, validation);
    for (const auto& r : validation) {
        report.config_ids.push_back(r.config_id);
        report.truths.push_back(r.treatment_efficiency);
    }
    report.metrics = evaluate(report.predictions, report.truths, model.learning_treatment_mean);
    report.baseline_rmse =
        baselines(validation, model.ate_learning, model.learning_treatment_mean);

    // bootstrap over experiments: the model against the three baselines
    Matrix errors;
    errors.push_back({});
    for (std::size_t i = 0; i < validation.size(); ++i)
        errors[0].push_back(report.truths[i] - report.predictions[i]);
    std::vector<double> e1, e2, e3;
    for (const auto& r : validation) {
        e1.push_back(r.treatment_efficiency - r.control_efficiency);
        e2.push_back(r.treatment_efficiency - (r.control_efficiency + model.ate_learning));
        e3.push_back(r.treatment_efficiency - model.learning_treatment_mean);
    }
    errors.push_back(e1);
    errors.push_back(e2);
    errors.push_back(e3);
    report.bootstrap_names = {model.kind, "baseline_no_effect", "baseline_control_plus_ate",
                              "baseline_constant_mean"};
    report.bootstrap =
        bootstrap_rmse_ci(errors, opt.bootstrap_resamples, derive_seed(opt.seed, "eval.bootstrap"));

    report.importance = permutation_importance(model, validation, opt.importance_repeats,
                                               derive_seed(opt.seed, "eval.pfi"));

    for (const auto& r : validation) {
        const ShapReport shap = linear_shap(model, r);
        report.shap_base_value = shap.base_value;
        std::vector<double> row;
        row.reserve(shap.per_base_feature.size());
        for (const auto& entry : shap.per_base_feature) row.push_back(entry.phi);
        report.shap_per_base.push_back(std::move(row));
    }

    if (!opt.out_report_json.empty()) {
        write_prediction_report_json(opt.out_report_json, report);
        write_manifest(opt.out_report_json + ".manifest.json",
                       make_manifest("predict eval", opt.seed,
                                     {opt.model_json, opt.validation_records_csv},
                                     {opt.out_report_json}));
    }
    return report;
}

void run_report(const ReportOptions& opt) {
    fs::create_directories(opt.outdir);
    json summary;
    summary["tool_version"] = kToolVersion;

    if (!opt.outcomes_csv.empty()) {
        const auto outcomes = read_outcomes_csv(opt.outcomes_csv);
        struct Acc {
            int games = 0;
            int included = 0;
            double eff_sum = 0.0;
            double norm_sum = 0.0;
            int norm_count = 0;
        };
        std::map<std::string, Acc> by_arm;
        for (const auto& o : outcomes) {
            Acc& a = by_arm[o.treatment_arm ? "treatment" : "control"];
            ++a.games;
            if (!o.included) continue;
            ++a.included;
            a.eff_sum += o.efficiency;
            if (o.normalized_efficiency) {
                a.norm_sum += *o.normalized_efficiency;
                ++a.norm_count;
            }
        }
        std::vector<std::vector<std::string>> rows;
        json arms = json::object();
        for (const auto& [arm, a] : by_arm) {
            const double mean_eff = a.included ? a.eff_sum / a.included : 0.0;
            const double mean_norm = a.norm_count ? a.norm_sum / a.norm_count : 0.0;
            arms[arm] = {{"games", a.games},
                         {"included", a.included},
                         {"mean_efficiency", mean_eff},
                         {"mean_normalized_efficiency", mean_norm}};
            rows.push_back({arm, std::to_string(a.games), std::to_string(a.included),
                            fmt_real(mean_eff), fmt_real(mean_norm)});
        }
        summary["outcomes"] = arms;
        write_csv(opt.outdir + "/outcomes_summary.csv",
                  {"arm", "games", "included", "mean_efficiency", "mean_normalized_efficiency"},
                  rows);
    }

    auto copy_json = [&](const std::string& path, const char* key) {
        if (path.empty()) return;
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::io, "cannot open " + path);
        json j;
        in >> j;
        summary[key] = j;
    };
    copy_json(opt.hetero_json, "heterogeneity");
    copy_json(opt.prediction_json, "prediction");

    std::ofstream out(opt.outdir + "/summary.json", std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write summary.json");
    out << summary.dump(2) << "\n";
    write_manifest(opt.outdir + "/summary.manifest.json",
                   make_manifest("report", 0,
                                 {opt.outcomes_csv, opt.hetero_json, opt.prediction_json},
                                 {opt.outdir + "/summary.json"}));
}

}  // namespace pgg
