#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pgg/design_space.hpp"

namespace pgg {

using Matrix = std::vector<std::vector<double>>;

// Point estimate of the punishment effect for one experiment or cluster,
// in normalized-efficiency units.
struct EffectEstimate {
    double t = 0.0;   // mean(treatment) - mean(control)
    double se = 0.0;  // sqrt(s_t^2/n_t + s_c^2/n_c), sample (n-1) variances
    int n_treatment = 0;
    int n_control = 0;
    std::string label;
};

// Throws Error(se_undefined) when either arm has fewer than 2 observations.
// A zero se (identical values within both arms) is returned as-is; downstream
// weighting rejects it.
EffectEstimate diff_means_effect(const std::vector<double>& treatment,
                                 const std::vector<double>& control,
                                 const std::string& label = "");

struct CochranResult {
    double q = 0.0;
    int df = 0;
    double p = 1.0;
    double meta_mean = 0.0;        // precision-weighted mean of the estimates
    std::vector<double> weights;   // w_i = 1/se_i^2
};

// Fixed-effects heterogeneity statistic Q = sum w_i (T_i - Tbar)^2 with
// w_i = 1/se_i^2; p from the chi-squared upper tail with n-1 df.
// Throws Error(infinite_weight) when any se is 0.
CochranResult cochran_q(const std::vector<EffectEstimate>& estimates);

// max(0, (Q - (n-1))/Q); 0 when Q == 0.
double i_squared(double q, int n);

// Upper-tail chi-squared probability via the regularized incomplete gamma
// function Q(df/2, x/2); absolute accuracy well below 1e-10.
double chi_square_sf(double x, int df);

// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b);

struct FrtOptions {
    int grid_size = 300;
    int permutations = 1000;
    std::uint64_t seed = 0;
};

struct FrtResult {
    double max_p = 0.0;
    double argmax_tau = 0.0;
    double tau_hat = 0.0;  // difference in means
    double se_tau = 0.0;
    std::vector<double> taus;
    std::vector<double> p_values;
};

// Fisherian randomization test of the constant-effect sharp null, maximized
// over a grid of effect values spanning tau_hat +- 3.2905 se (a 99.9% normal
// interval). For each tau the treated outcomes are shifted down by tau to
// impute control-scale outcomes, assignments are permuted preserving arm
// sizes, and the shifted K-S statistic forms the null distribution. p-values
// are plain frequencies #(D_perm >= D_obs)/permutations. Deterministic given
// the seed. Throws Error(undefined_test) on zero-variance data.
FrtResult frt_max_p(const std::vector<double>& control, const std::vector<double>& treatment,
                    const FrtOptions& options = {});

struct KmeansResult {
    std::vector<int> assignment;
    Matrix centroids;
    double inertia = 0.0;
    int iterations = 0;
};

// Lloyd's algorithm with k-means++ initialization; empty clusters are
// reseeded at the point farthest from its centroid. Deterministic given seed.
KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter = 100);

// Clustering features for learning-wave configs: the design parameters with
// integer-scaled ones (group size, game length, peer incentive cost,
// punishment impact) min-max scaled to [0,1] over their bounds, booleans as
// 0/1, MPCR as-is, and reward_impact dropped (not applicable when reward is
// disabled). 12 features per config.
Matrix config_cluster_features(const std::vector<PggConfig>& configs,
                               const ParameterBounds& bounds = {});

struct OlsResult {
    std::vector<double> coef;  // coef[0] is the intercept when add_intercept
    std::vector<double> se;    // classical homoskedastic standard errors
    double sigma2 = 0.0;
    int df_resid = 0;
};

// Least squares via normal equations (Cholesky); throws
// Error(singular_design) on rank deficiency.
OlsResult ols_fit(const Matrix& x, const std::vector<double>& y, bool add_intercept = true);

struct BootstrapCi {
    double lo = 0.0;
    double hi = 0.0;
};

struct BootstrapReport {
    std::vector<double> rmse;                    // full-sample RMSE per model
    std::vector<BootstrapCi> rmse_ci;            // 2.5/97.5 percentile CIs
    std::vector<std::vector<BootstrapCi>> diff_ci;  // CI of rmse_i - rmse_j per pair
};

// Nonparametric bootstrap over experiments: rows of `per_model_errors` are
// models, columns are per-experiment prediction errors on a shared experiment
// set. Each resample draws experiments with replacement and recomputes every
// model's RMSE and all pairwise differences. Deterministic given seed.
BootstrapReport bootstrap_rmse_ci(const Matrix& per_model_errors, int resamples,
                                  std::uint64_t seed);

}  // namespace pgg
