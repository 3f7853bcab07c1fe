#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgg/design_space.hpp"
#include "pgg/stats.hpp"

namespace pgg {

// One matched experiment: a configuration with arm-mean standard efficiencies
// in percentage points (0-100). Learning records are 1-trial-per-arm matched
// pairs; validation records average 8-12 trials per arm.
struct ExperimentRecord {
    std::string config_id;
    Wave wave = Wave::learning;
    PggConfig config;
    double control_efficiency = 0.0;    // percentage points
    double treatment_efficiency = 0.0;  // percentage points (the prediction target)
    int n_control = 0;
    int n_treatment = 0;
};

// Game-level row consumed by build_matched_dataset.
struct GameOutcomeRow {
    std::string game_id;
    std::string config_id;
    bool treatment_arm = false;
    double efficiency = 0.0;  // standard efficiency in [0,~1.x]
    bool included = true;
};

// Averages efficiency within each configuration's arms (excluded games
// dropped first); configurations lacking a valid game in either arm are
// dropped with a note on stderr.
std::vector<ExperimentRecord> build_matched_dataset(const std::vector<GameOutcomeRow>& games,
                                                    const std::vector<PggConfig>& configs,
                                                    Wave wave);

// Model feature space: 14 base features in fixed order — the 13 design
// parameters relevant to every experiment (reward_impact is excluded;
// punishment availability is retained and is constant across experiments, so
// it standardizes to zero) plus the control-arm efficiency. With
// interactions, all C(14,2)=91 distinct pairwise products of the
// standardized features follow, for 105 features total.
constexpr int kBaseFeatures = 14;
constexpr int kInteractionFeatures = kBaseFeatures * (kBaseFeatures - 1) / 2;

std::vector<std::string> base_feature_names();
std::vector<std::string> model_feature_names(bool with_interactions);
std::vector<double> base_features(const ExperimentRecord& r);

// Per-feature centering/scaling parameters, fit on learning data only.
// sd is the population standard deviation; zero-variance features are
// flagged and standardize to 0 (with a warning at fit time).
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<bool> zero_variance;
};

Standardizer fit_standardizer(const Matrix& base_rows);
std::vector<double> standardize(const Standardizer& s, const std::vector<double>& base);

// Standardize, then (optionally) append pairwise products of the
// standardized features.
std::vector<double> featurize(const std::vector<double>& base, bool with_interactions,
                              const Standardizer& s);

struct LinearModel {
    std::string kind = "enet";  // "ols" | "enet"
    bool with_interactions = false;
    double alpha = 0.0;
    double l1_ratio = 0.0;
    double intercept = 0.0;
    std::vector<double> coef;  // one per model feature
    Standardizer standardizer;
    double learning_treatment_mean = 0.0;  // out-of-sample R^2 baseline
    double ate_learning = 0.0;             // mean (treatment - control) on learning records
    std::vector<double> background_mean;   // learning-set means of model features (SHAP background)
};

struct ElasticNetOptions {
    double alpha = 0.07;
    double l1_ratio = 0.15;
    double tol = 1e-9;      // convergence: max coefficient change per sweep
    int max_iter = 100000;  // full coordinate sweeps
};

struct EnetFit {
    double intercept = 0.0;
    std::vector<double> coef;
    int sweeps = 0;
};

// Minimizes (1/2n)*sum (y - b0 - X b)^2 + alpha*(l1*|b|_1 + (1-l1)/2*|b|_2^2)
// by cyclic coordinate descent with soft-thresholding; the intercept is
// unpenalized. Throws Error(not_converged) carrying the message; the last
// iterate is recoverable via the out parameter when provided.
EnetFit fit_elastic_net(const Matrix& x, const std::vector<double>& y,
                        const ElasticNetOptions& options, EnetFit* last_iterate = nullptr);

// Max KKT violation of the elastic-net stationarity conditions at `fit`;
// near zero at an optimum.
double enet_kkt_violation(const Matrix& x, const std::vector<double>& y, const EnetFit& fit,
                          double alpha, double l1_ratio);

// Full training pipeline on learning records: fit standardizer, build the
// model matrix, fit OLS (kind "ols", alpha ignored) or the elastic net.
LinearModel train_model(const std::vector<ExperimentRecord>& learning, const std::string& kind,
                        double alpha, double l1_ratio, bool with_interactions,
                        double tol = 1e-9, int max_iter = 100000);

double predict_one(const LinearModel& m, const ExperimentRecord& r);
std::vector<double> predict(const LinearModel& m, const std::vector<ExperimentRecord>& rs);

struct CvCell {
    double alpha = 0.0;
    double l1_ratio = 0.0;
    double rmse = 0.0;
};

struct CvResult {
    double best_alpha = 0.0;
    double best_l1_ratio = 0.0;
    double best_rmse = 0.0;
    std::vector<CvCell> grid;
};

// K-fold cross-validation over an (alpha, l1_ratio) grid. Fold assignment is
// a seeded shuffle dealt round-robin; the standardizer and interactions are
// refit inside each training fold. The RMSE for a grid point aggregates the
// held-out predictions across all folds into a single score.
CvResult cross_validate_grid(const std::vector<ExperimentRecord>& learning,
                             const std::vector<double>& alpha_grid,
                             const std::vector<double>& l1_grid, int folds, std::uint64_t seed,
                             bool with_interactions);

struct EvalMetrics {
    double rmse = 0.0;
    double r2 = 0.0;  // 1 - SSE / sum (y - learning_treatment_mean)^2
};

EvalMetrics evaluate(const std::vector<double>& predictions, const std::vector<double>& truths,
                     double learning_treatment_mean);

struct BaselineRmse {
    double no_effect = 0.0;          // predict the control efficiency
    double control_plus_ate = 0.0;   // control efficiency + learning-wave ATE
    double constant_mean = 0.0;      // learning-wave mean treatment efficiency
};

BaselineRmse baselines(const std::vector<ExperimentRecord>& validation, double ate_learning,
                       double learning_treatment_mean);

struct FeatureImportance {
    std::string feature;
    double ratio_mean = 1.0;  // shuffled RMSE / baseline RMSE, averaged over repeats
    double ci_lo = 1.0;       // 2.5/97.5 percentiles over repeats
    double ci_hi = 1.0;
    std::vector<double> ratios;
};

// Shuffles each design parameter's raw values across the validation records
// (interactions involving it are recomputed through the fitted standardizer),
// `repeats` independent times. Sorted most-important-first.
std::vector<FeatureImportance> permutation_importance(const LinearModel& m,
                                                      const std::vector<ExperimentRecord>& validation,
                                                      int repeats, std::uint64_t seed);

struct ShapEntry {
    std::string feature;
    double phi = 0.0;
};

struct ShapReport {
    double base_value = 0.0;  // model prediction at the background (learning means)
    double prediction = 0.0;  // base_value + sum of raw contributions, exactly
    std::vector<ShapEntry> raw;               // one per model feature
    std::vector<ShapEntry> per_base_feature;  // interaction phi split half to each parent
};

// Exact SHAP for a linear model: phi_j = coef_j * (z_j - mu_j) against the
// learning-set background. Throws Error(unsupported_model) for non-linear
// model kinds.
ShapReport linear_shap(const LinearModel& m, const ExperimentRecord& r);

}  // namespace pgg
