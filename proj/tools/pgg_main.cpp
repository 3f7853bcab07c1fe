// pgg — design, simulate, ingest, and analyze parameterized public goods
// game experiments. See README.md for the file formats each stage reads and
// writes.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pgg/errors.hpp"
#include "pgg/pipeline.hpp"

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("PGG_OUT_DIR");
    return env ? env : ".";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"integrative public goods game experiment toolkit"};
    app.require_subcommand(1);

    // ---- design ----
    auto* design = app.add_subcommand("design", "generate design-space samples");
    design->require_subcommand(1);

    pgg::DesignSobolOptions sobol_opt;
    auto* design_sobol = design->add_subcommand("sobol", "Sobol-sequence learning designs");
    design_sobol->add_option("--n", sobol_opt.n, "number of configurations")->default_val(256);
    design_sobol->add_flag("--scramble", sobol_opt.scramble, "Owen-scramble the sequence");
    design_sobol->add_option("--seed", sobol_opt.seed, "scramble seed")->required();
    design_sobol->add_option("--out", sobol_opt.out_csv, "output designs.csv")->required();

    pgg::DesignRandomOptions random_opt;
    auto* design_random = design->add_subcommand("random", "uniform random validation designs");
    design_random->add_option("--n", random_opt.n, "number of configurations")->default_val(40);
    design_random->add_option("--seed", random_opt.seed, "sampling seed")->required();
    design_random->add_option("--exclude", random_opt.exclude_csv,
                              "designs.csv with configurations to avoid");
    design_random->add_option("--out", random_opt.out_csv, "output csv")->required();

    // ---- simulate ----
    pgg::SimulateOptions sim_opt;
    auto* simulate = app.add_subcommand("simulate", "run scripted-agent games over designs");
    simulate->add_option("--designs", sim_opt.designs_csv, "designs.csv")->required();
    simulate->add_option("--agents", sim_opt.agents_json, "agents.json roster/mix spec");
    simulate->add_option("--seed", sim_opt.master_seed, "master seed")->required();
    simulate->add_option("--outdir", sim_opt.outdir, "output directory")
        ->default_val(default_out_dir());
    simulate->add_option("--trials", sim_opt.trials, "games per arm per configuration")
        ->default_val(1);
    simulate->add_option("--dropout-prob", sim_opt.dropout_prob,
                         "per-player probability of dropping at a uniform round");
    simulate->add_flag("--any-time-dropout", sim_opt.any_time_dropout,
                       "use the any-time reading of the 18% inclusion filter");

    // ---- ingest ----
    pgg::IngestOptions ingest_opt;
    auto* ingest = app.add_subcommand("ingest", "ingest a dataset through a schema map");
    ingest->add_option("--src", ingest_opt.src_dir, "source directory")->required();
    ingest->add_option("--schema", ingest_opt.schema_json, "schema-map json (default: canonical)");
    ingest->add_option("--outdir", ingest_opt.outdir, "output directory")
        ->default_val(default_out_dir());

    // ---- analyze ----
    auto* analyze = app.add_subcommand("analyze", "statistical analyses over outcomes");
    analyze->require_subcommand(1);
    pgg::AnalyzeOptions an_opt;
    auto* hetero = analyze->add_subcommand("heterogeneity",
                                           "punishment-effect heterogeneity tests");
    hetero->add_option("--in", an_opt.outcomes_csv, "outcomes.csv")->required();
    hetero->add_option("--designs", an_opt.designs_csv, "designs.csv (for cluster grouping)");
    hetero->add_option("--group-by", an_opt.group_by, "experiment|cluster")
        ->default_val("experiment");
    hetero->add_option("--clusters", an_opt.clusters, "k for k-means grouping")->default_val(20);
    hetero->add_option("--seed", an_opt.seed, "seed for clustering and the FRT")->required();
    hetero->add_option("--out", an_opt.out_json, "output hetero.json")->required();
    bool no_frt = false;
    hetero->add_flag("--no-frt", no_frt, "skip the randomization test");
    hetero->add_option("--frt-grid", an_opt.frt.grid_size, "FRT effect-grid size")
        ->default_val(300);
    hetero->add_option("--frt-permutations", an_opt.frt.permutations, "FRT permutations")
        ->default_val(1000);

    // ---- predict ----
    auto* predict_cmd = app.add_subcommand("predict", "prediction dataset, models, evaluation");
    predict_cmd->require_subcommand(1);

    struct RecordsArgs {
        std::string outcomes;
        std::string designs;
        std::string wave = "learning";
        std::string out;
    } rec_args;
    auto* records = predict_cmd->add_subcommand("records",
                                                "build experiment records from outcomes");
    records->add_option("--outcomes", rec_args.outcomes, "outcomes.csv")->required();
    records->add_option("--designs", rec_args.designs, "designs.csv")->required();
    records->add_option("--wave", rec_args.wave, "learning|validation")->default_val("learning");
    records->add_option("--out", rec_args.out, "output records.csv")->required();

    pgg::PredictFitOptions fit_opt;
    auto* fit = predict_cmd->add_subcommand("fit", "fit a model on learning records");
    fit->add_option("--train", fit_opt.train_records_csv, "learning records.csv")->required();
    fit->add_option("--model", fit_opt.model_kind, "enet|ols")->default_val("enet");
    fit->add_option("--alpha", fit_opt.alpha, "elastic net alpha")->default_val(0.07);
    fit->add_option("--l1", fit_opt.l1_ratio, "elastic net l1_ratio")->default_val(0.15);
    bool no_interactions = false;
    fit->add_flag("--interactions,!--no-interactions", fit_opt.with_interactions,
                  "pairwise interaction features (default on)");
    (void)no_interactions;
    fit->add_flag("--cv", fit_opt.cross_validate, "grid cross-validation for (alpha, l1)");
    fit->add_option("--folds", fit_opt.folds, "CV folds")->default_val(10);
    fit->add_option("--alpha-grid", fit_opt.alpha_grid, "CV alpha grid");
    fit->add_option("--l1-grid", fit_opt.l1_grid, "CV l1 grid");
    fit->add_option("--seed", fit_opt.seed, "fold-split seed")->required();
    fit->add_option("--out", fit_opt.out_model_json, "output model.json")->required();

    pgg::PredictEvalOptions eval_opt;
    auto* eval = predict_cmd->add_subcommand("eval", "evaluate a model out of sample");
    eval->add_option("--model", eval_opt.model_json, "model.json")->required();
    eval->add_option("--validation", eval_opt.validation_records_csv, "validation records.csv")
        ->required();
    eval->add_option("--seed", eval_opt.seed, "bootstrap/importance seed")->required();
    eval->add_option("--bootstrap", eval_opt.bootstrap_resamples, "bootstrap resamples")
        ->default_val(1000);
    eval->add_option("--importance-repeats", eval_opt.importance_repeats,
                     "permutation importance repeats")
        ->default_val(30);
    eval->add_option("--out", eval_opt.out_report_json, "output report.json")->required();

    // ---- report ----
    pgg::ReportOptions report_opt;
    auto* report = app.add_subcommand("report", "combine artifacts into a single summary");
    report->add_option("--outcomes", report_opt.outcomes_csv, "outcomes.csv");
    report->add_option("--hetero", report_opt.hetero_json, "hetero.json");
    report->add_option("--prediction", report_opt.prediction_json, "report.json");
    report->add_option("--outdir", report_opt.outdir, "output directory")
        ->default_val(default_out_dir());

    CLI11_PARSE(app, argc, argv);

    try {
        if (design_sobol->parsed()) {
            run_design_sobol(sobol_opt);
            std::cout << "wrote " << sobol_opt.out_csv << " (" << sobol_opt.n << " configs)\n";
        } else if (design_random->parsed()) {
            run_design_random(random_opt);
            std::cout << "wrote " << random_opt.out_csv << " (" << random_opt.n << " configs)\n";
        } else if (simulate->parsed()) {
            const auto summary = run_simulate(sim_opt);
            std::cout << "simulated " << summary.games << " games (" << summary.included
                      << " included) into " << sim_opt.outdir << "\n";
        } else if (ingest->parsed()) {
            const auto rep = run_ingest(ingest_opt);
            std::cout << "ingested " << rep.input_games << " games: retained " << rep.retained
                      << ", technical " << rep.technical_excluded << ", multiplier-1 "
                      << rep.multiplier_one_excluded << ", outlier " << rep.outlier_excluded
                      << ", recruitment " << rep.recruitment_excluded << ", parse failures "
                      << rep.parse_failures << "\n";
        } else if (hetero->parsed()) {
            an_opt.run_frt = !no_frt;
            pgg::OlsSummary ols;
            const auto rep = analyze_heterogeneity(an_opt, &ols);
            std::cout << "groups " << rep.estimates.size() << ": Q(" << rep.cochran.df
                      << ") = " << rep.cochran.q << ", p = " << rep.cochran.p
                      << ", I^2 = " << rep.i2;
            if (rep.frt) std::cout << ", FRT max p = " << rep.frt->max_p;
            std::cout << "\nOLS: intercept " << ols.intercept << " (" << ols.se_intercept
                      << "), punishment " << ols.coefficient << " (" << ols.se_coefficient
                      << "), n = " << ols.n << "\n";
        } else if (records->parsed()) {
            const auto outcomes = pgg::read_outcomes_csv(rec_args.outcomes);
            const auto configs = pgg::read_designs_csv(rec_args.designs);
            const auto recs = pgg::records_from_outcomes(outcomes, configs,
                                                         pgg::wave_from_string(rec_args.wave));
            pgg::write_records_csv(rec_args.out, recs);
            std::cout << "wrote " << rec_args.out << " (" << recs.size() << " records)\n";
        } else if (fit->parsed()) {
            const auto summary = run_predict_fit(fit_opt);
            std::cout << "fit " << fit_opt.model_kind << " (alpha " << summary.alpha << ", l1 "
                      << summary.l1_ratio << ")";
            if (summary.cv_rmse) std::cout << ", cv rmse " << *summary.cv_rmse;
            std::cout << " -> " << fit_opt.out_model_json << "\n";
        } else if (eval->parsed()) {
            const auto rep = run_predict_eval(eval_opt);
            std::cout << "rmse " << rep.metrics.rmse << ", r2 " << rep.metrics.r2
                      << " (baselines " << rep.baseline_rmse.no_effect << " / "
                      << rep.baseline_rmse.control_plus_ate << " / "
                      << rep.baseline_rmse.constant_mean << ") -> " << eval_opt.out_report_json
                      << "\n";
        } else if (report->parsed()) {
            run_report(report_opt);
            std::cout << "wrote " << report_opt.outdir << "/summary.json\n";
        }
    } catch (const pgg::Error& e) {
        nlohmann::json err = {{"error",
                               {{"code", pgg::error_code_name(e.code())}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        nlohmann::json err = {{"error", {{"code", "internal"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    }
    return 0;
}
