#include "pgg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pgg/errors.hpp"
#include "pgg/rng.hpp"

namespace pgg {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

// Regularized lower incomplete gamma P(a,x) by series expansion (x < a+1).
double gamma_p_series(double a, double x) {
    const double gln = std::lgamma(a);
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
}

// Regularized upper incomplete gamma Q(a,x) by continued fraction (x >= a+1).
double gamma_q_cf(double a, double x) {
    const double gln = std::lgamma(a);
    const double fpmin = std::numeric_limits<double>::min() / 1e-16;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double chi_square_sf(double x, int df) {
    if (df < 1) throw Error(ErrorCode::usage, "chi_square_sf: df must be >= 1");
    if (x < 0.0) throw Error(ErrorCode::usage, "chi_square_sf: x must be >= 0");
    if (x == 0.0) return 1.0;
    const double a = 0.5 * df;
    const double xx = 0.5 * x;
    if (xx < a + 1.0) return 1.0 - gamma_p_series(a, xx);
    return gamma_q_cf(a, xx);
}

EffectEstimate diff_means_effect(const std::vector<double>& treatment,
                                 const std::vector<double>& control, const std::string& label) {
    if (treatment.empty() || control.empty()) {
        throw Error(ErrorCode::usage, "diff_means_effect: both arms must be nonempty");
    }
    EffectEstimate e;
    e.label = label;
    e.n_treatment = static_cast<int>(treatment.size());
    e.n_control = static_cast<int>(control.size());
    const double mt = mean_of(treatment);
    const double mc = mean_of(control);
    e.t = mt - mc;
    if (e.n_treatment < 2 || e.n_control < 2) {
        throw Error(ErrorCode::se_undefined,
                    "standard error requires at least 2 trials per arm (" + label + ")");
    }
    e.se = std::sqrt(sample_variance(treatment, mt) / e.n_treatment +
                     sample_variance(control, mc) / e.n_control);
    return e;
}

CochranResult cochran_q(const std::vector<EffectEstimate>& estimates) {
    if (estimates.size() < 2) {
        throw Error(ErrorCode::usage, "cochran_q: need at least 2 estimates");
    }
    CochranResult r;
    r.weights.reserve(estimates.size());
    double wsum = 0.0;
    double wtsum = 0.0;
    for (const auto& e : estimates) {
        if (!(e.se > 0.0)) {
            throw Error(ErrorCode::infinite_weight,
                        "estimate '" + e.label + "' has zero standard error");
        }
        const double w = 1.0 / (e.se * e.se);
        r.weights.push_back(w);
        wsum += w;
        wtsum += w * e.t;
    }
    r.meta_mean = wtsum / wsum;
    r.q = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double d = estimates[i].t - r.meta_mean;
        r.q += r.weights[i] * d * d;
    }
    r.df = static_cast<int>(estimates.size()) - 1;
    r.p = chi_square_sf(r.q, r.df);
    return r;
}

double i_squared(double q, int n) {
    if (n < 2) throw Error(ErrorCode::usage, "i_squared: need n >= 2");
    if (q <= 0.0) return 0.0;
    return std::max(0.0, (q - (n - 1)) / q);
}

namespace {

// K-S distance between two already-sorted samples; ties handled by advancing
// both sides past each distinct value before evaluating.
double ks_sorted(const std::vector<double>& sa, const std::vector<double>& sb) {
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        double x = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == x) ++i;
        while (j < sb.size() && sb[j] == x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    // once one sample is exhausted the gap can only shrink toward |1-1|=0,
    // except the other side still below 1:
    if (i < sa.size()) d = std::max(d, std::fabs(static_cast<double>(i) / na - 1.0));
    if (j < sb.size()) d = std::max(d, std::fabs(1.0 - static_cast<double>(j) / nb));
    return d;
}

}  // namespace

double ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) {
        throw Error(ErrorCode::usage, "ks_two_sample: both samples must be nonempty");
    }
    std::vector<double> sa = a;
    std::vector<double> sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return ks_sorted(sa, sb);
}

FrtResult frt_max_p(const std::vector<double>& control, const std::vector<double>& treatment,
                    const FrtOptions& options) {
    if (control.size() < 2 || treatment.size() < 2) {
        throw Error(ErrorCode::usage, "frt_max_p: need at least 2 observations per arm");
    }
    const std::size_t nc = control.size();
    const std::size_t nt = treatment.size();

    EffectEstimate est = diff_means_effect(treatment, control, "frt");
    if (!(est.se > 0.0)) {
        throw Error(ErrorCode::undefined_test,
                    "frt_max_p: zero-variance data, the randomization distribution is degenerate");
    }

    FrtResult result;
    result.tau_hat = est.t;
    result.se_tau = est.se;

    std::vector<double> sorted_control = control;
    std::sort(sorted_control.begin(), sorted_control.end());
    std::vector<double> sorted_treatment = treatment;
    std::sort(sorted_treatment.begin(), sorted_treatment.end());

    constexpr double z999 = 3.2905;  // two-sided 99.9% normal critical value
    const double lo = est.t - z999 * est.se;
    const double hi = est.t + z999 * est.se;
    const int g = options.grid_size;

    result.taus.resize(static_cast<std::size_t>(g));
    result.p_values.resize(static_cast<std::size_t>(g));

    // One set of assignment permutations, drawn up front from per-permutation
    // derived streams and reused across the effect grid (sharing assignments
    // over the grid is the standard construction and leaves each tau's null
    // distribution untouched). A label marks a sorted-pooled position as
    // pseudo-treated.
    const std::size_t n = nc + nt;
    std::vector<std::uint8_t> labels(static_cast<std::size_t>(options.permutations) * n);
    for (int p = 0; p < options.permutations; ++p) {
        Rng rng(derive_seed(options.seed, "frt.perm", static_cast<std::uint64_t>(p)));
        std::uint8_t* row = labels.data() + static_cast<std::size_t>(p) * n;
        for (std::size_t i = 0; i < n; ++i) row[i] = i < nt ? 1 : 0;
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j =
                static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(row[i - 1], row[j]);
        }
    }

    std::vector<double> shifted(nt);
    std::vector<double> pooled(n);
    const double inv_nt = 1.0 / static_cast<double>(nt);
    const double inv_nc = 1.0 / static_cast<double>(nc);

    double max_p = -1.0;
    for (int gi = 0; gi < g; ++gi) {
        const double tau = g == 1 ? est.t : lo + (hi - lo) * gi / (g - 1);
        result.taus[static_cast<std::size_t>(gi)] = tau;

        // impute control-scale outcomes under the sharp null of effect tau;
        // re-adding tau to pseudo-treated units cancels in the statistic
        for (std::size_t i = 0; i < nt; ++i) shifted[i] = sorted_treatment[i] - tau;
        const double d_obs = ks_sorted(sorted_control, shifted);

        std::merge(sorted_control.begin(), sorted_control.end(), shifted.begin(), shifted.end(),
                   pooled.begin());

        int exceed = 0;
        const double threshold = d_obs - 1e-12;
        for (int p = 0; p < options.permutations; ++p) {
            const std::uint8_t* row = labels.data() + static_cast<std::size_t>(p) * n;
            // walk the sorted pooled values, tracking F_t - F_c; ties are
            // grouped before the gap is evaluated
            double d = 0.0;
            std::size_t ti = 0;
            std::size_t ci = 0;
            std::size_t i = 0;
            while (i < n) {
                const double value = pooled[i];
                do {
                    if (row[i]) ++ti;
                    else ++ci;
                    ++i;
                } while (i < n && pooled[i] == value);
                const double gap = std::fabs(static_cast<double>(ti) * inv_nt -
                                             static_cast<double>(ci) * inv_nc);
                if (gap > d) d = gap;
            }
            if (d >= threshold) ++exceed;
        }
        const double p_tau = static_cast<double>(exceed) / options.permutations;
        result.p_values[static_cast<std::size_t>(gi)] = p_tau;
        if (p_tau > max_p) {
            max_p = p_tau;
            result.argmax_tau = tau;
        }
    }
    result.max_p = max_p;
    return result;
}

KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter) {
    const int n = static_cast<int>(points.size());
    if (k < 1 || k > n) {
        throw Error(ErrorCode::usage,
                    "kmeans: k=" + std::to_string(k) + " outside [1," + std::to_string(n) + "]");
    }
    const std::size_t dim = points.front().size();
    for (const auto& p : points) {
        if (p.size() != dim) throw Error(ErrorCode::usage, "kmeans: ragged point matrix");
    }
    Rng rng(derive_seed(seed, "kmeans"));

    auto sqdist = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            s += d * d;
        }
        return s;
    };

    // k-means++ seeding
    Matrix centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    centroids.push_back(points[static_cast<std::size_t>(rng.uniform_int(0, n - 1))]);
    std::vector<double> min_d2(static_cast<std::size_t>(n), 0.0);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& c : centroids) best = std::min(best, sqdist(points[static_cast<std::size_t>(i)], c));
            min_d2[static_cast<std::size_t>(i)] = best;
            total += best;
        }
        if (total <= 0.0) {
            // all remaining points coincide with existing centroids
            centroids.push_back(points[static_cast<std::size_t>(rng.uniform_int(0, n - 1))]);
            continue;
        }
        double target = rng.uniform() * total;
        int chosen = n - 1;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += min_d2[static_cast<std::size_t>(i)];
            if (acc >= target) {
                chosen = i;
                break;
            }
        }
        centroids.push_back(points[static_cast<std::size_t>(chosen)]);
    }

    KmeansResult result;
    result.assignment.assign(static_cast<std::size_t>(n), 0);
    double prev_inertia = std::numeric_limits<double>::max();
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step (ties to the lowest cluster index)
        double inertia = 0.0;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::max();
            for (int c = 0; c < k; ++c) {
                const double d = sqdist(points[static_cast<std::size_t>(i)],
                                        centroids[static_cast<std::size_t>(c)]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            result.assignment[static_cast<std::size_t>(i)] = best;
            inertia += best_d;
        }
        result.inertia = inertia;
        result.iterations = iter + 1;

        // update step
        Matrix sums(static_cast<std::size_t>(k), std::vector<double>(dim, 0.0));
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < n; ++i) {
            const int c = result.assignment[static_cast<std::size_t>(i)];
            ++counts[static_cast<std::size_t>(c)];
            for (std::size_t d = 0; d < dim; ++d)
                sums[static_cast<std::size_t>(c)][d] += points[static_cast<std::size_t>(i)][d];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) {
                // reseed an empty cluster at the point farthest from its centroid
                int far = 0;
                double far_d = -1.0;
                for (int i = 0; i < n; ++i) {
                    const int ci = result.assignment[static_cast<std::size_t>(i)];
                    const double d = sqdist(points[static_cast<std::size_t>(i)],
                                            centroids[static_cast<std::size_t>(ci)]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centroids[static_cast<std::size_t>(c)] = points[static_cast<std::size_t>(far)];
            } else {
                for (std::size_t d = 0; d < dim; ++d) {
                    centroids[static_cast<std::size_t>(c)][d] =
                        sums[static_cast<std::size_t>(c)][d] / counts[static_cast<std::size_t>(c)];
                }
            }
        }
        if (inertia >= prev_inertia - 1e-12) break;  // converged
        prev_inertia = inertia;
    }
    result.centroids = std::move(centroids);
    return result;
}

Matrix config_cluster_features(const std::vector<PggConfig>& configs,
                               const ParameterBounds& b) {
    Matrix m;
    m.reserve(configs.size());
    auto scaled = [](int v, int lo, int hi) {
        return hi > lo ? static_cast<double>(v - lo) / (hi - lo) : 0.0;
    };
    for (const auto& c : configs) {
        m.push_back({
            scaled(c.group_size, b.group_size_min, b.group_size_max),
            scaled(c.game_length, b.game_length_min, b.game_length_max),
            c.contribution_type == ContributionType::all_or_nothing ? 1.0 : 0.0,
            c.contribution_framing == ContributionFraming::opt_out ? 1.0 : 0.0,
            c.mpcr,
            c.communication ? 1.0 : 0.0,
            c.peer_outcome_visibility ? 1.0 : 0.0,
            c.actor_anonymity == ActorAnonymity::revealed ? 1.0 : 0.0,
            c.horizon_knowledge ? 1.0 : 0.0,
            scaled(c.peer_incentive_cost, b.peer_incentive_cost_min, b.peer_incentive_cost_max),
            scaled(c.punishment_impact, b.punishment_impact_min, b.punishment_impact_max),
            c.reward_enabled ? 1.0 : 0.0,
        });
    }
    return m;
}

OlsResult ols_fit(const Matrix& x, const std::vector<double>& y, bool add_intercept) {
    const std::size_t n = x.size();
    if (n == 0 || n != y.size()) throw Error(ErrorCode::usage, "ols_fit: shape mismatch");
    const std::size_t p_in = x.front().size();
    const std::size_t p = p_in + (add_intercept ? 1 : 0);
    if (n < p) throw Error(ErrorCode::singular_design, "ols_fit: more columns than rows");

    auto design = [&](std::size_t i, std::size_t j) -> double {
        if (add_intercept) return j == 0 ? 1.0 : x[i][j - 1];
        return x[i][j];
    };

    // normal equations
    Matrix xtx(p, std::vector<double>(p, 0.0));
    std::vector<double> xty(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double xij = design(i, j);
            xty[j] += xij * y[i];
            for (std::size_t l = j; l < p; ++l) xtx[j][l] += xij * design(i, l);
        }
    }
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t l = 0; l < j; ++l) xtx[j][l] = xtx[l][j];

    // Cholesky factorization xtx = L L^T
    Matrix chol(p, std::vector<double>(p, 0.0));
    double max_diag = 0.0;
    for (std::size_t j = 0; j < p; ++j) max_diag = std::max(max_diag, xtx[j][j]);
    for (std::size_t j = 0; j < p; ++j) {
        double d = xtx[j][j];
        for (std::size_t l = 0; l < j; ++l) d -= chol[j][l] * chol[j][l];
        if (d <= 1e-10 * std::max(1.0, max_diag)) {
            throw Error(ErrorCode::singular_design,
                        "ols_fit: design matrix is rank-deficient at column " + std::to_string(j));
        }
        chol[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = xtx[i][j];
            for (std::size_t l = 0; l < j; ++l) s -= chol[i][l] * chol[j][l];
            chol[i][j] = s / chol[j][j];
        }
    }
    auto solve_chol = [&](std::vector<double> rhs) {
        // forward
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t l = 0; l < i; ++l) rhs[i] -= chol[i][l] * rhs[l];
            rhs[i] /= chol[i][i];
        }
        // backward
        for (std::size_t ii = p; ii-- > 0;) {
            for (std::size_t l = ii + 1; l < p; ++l) rhs[ii] -= chol[l][ii] * rhs[l];
            rhs[ii] /= chol[ii][ii];
        }
        return rhs;
    };

    OlsResult r;
    r.coef = solve_chol(xty);

    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fit = 0.0;
        for (std::size_t j = 0; j < p; ++j) fit += design(i, j) * r.coef[j];
        const double e = y[i] - fit;
        rss += e * e;
    }
    r.df_resid = static_cast<int>(n - p);
    r.sigma2 = r.df_resid > 0 ? rss / r.df_resid : 0.0;

    // diag of (X'X)^-1 via unit solves
    r.se.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        std::vector<double> e(p, 0.0);
        e[j] = 1.0;
        const auto col = solve_chol(std::move(e));
        r.se[j] = std::sqrt(std::max(0.0, r.sigma2 * col[j]));
    }
    return r;
}

BootstrapReport bootstrap_rmse_ci(const Matrix& per_model_errors, int resamples,
                                  std::uint64_t seed) {
    if (per_model_errors.empty()) throw Error(ErrorCode::usage, "bootstrap: no models");
    const std::size_t m = per_model_errors.size();
    const std::size_t n = per_model_errors.front().size();
    for (const auto& row : per_model_errors) {
        if (row.size() != n) {
            throw Error(ErrorCode::usage, "bootstrap: models must share the same experiment set");
        }
    }
    if (n == 0) throw Error(ErrorCode::usage, "bootstrap: no experiments");

    auto rmse_of = [&](std::size_t model, const std::vector<std::size_t>& idx) {
        double ss = 0.0;
        for (std::size_t i : idx) {
            const double e = per_model_errors[model][i];
            ss += e * e;
        }
        return std::sqrt(ss / static_cast<double>(idx.size()));
    };

    BootstrapReport rep;
    std::vector<std::size_t> full(n);
    std::iota(full.begin(), full.end(), std::size_t{0});
    for (std::size_t j = 0; j < m; ++j) rep.rmse.push_back(rmse_of(j, full));

    Matrix boot(m, std::vector<double>(static_cast<std::size_t>(resamples)));
    std::vector<std::size_t> idx(n);
    for (int r = 0; r < resamples; ++r) {
        Rng rng(derive_seed(seed, "bootstrap.resample", static_cast<std::uint64_t>(r)));
        for (std::size_t i = 0; i < n; ++i)
            idx[i] = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
        for (std::size_t j = 0; j < m; ++j) boot[j][static_cast<std::size_t>(r)] = rmse_of(j, idx);
    }

    auto percentile = [](std::vector<double> v, double q) {
        std::sort(v.begin(), v.end());
        const double pos = q * (static_cast<double>(v.size()) - 1.0);
        const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
        const double frac = pos - static_cast<double>(lo);
        return v[lo] * (1.0 - frac) + v[hi] * frac;
    };

    for (std::size_t j = 0; j < m; ++j) {
        rep.rmse_ci.push_back({percentile(boot[j], 0.025), percentile(boot[j], 0.975)});
    }
    rep.diff_ci.assign(m, std::vector<BootstrapCi>(m));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            std::vector<double> diffs(static_cast<std::size_t>(resamples));
            for (int r = 0; r < resamples; ++r) {
                diffs[static_cast<std::size_t>(r)] =
                    boot[a][static_cast<std::size_t>(r)] - boot[b][static_cast<std::size_t>(r)];
            }
            rep.diff_ci[a][b] = {percentile(diffs, 0.025), percentile(diffs, 0.975)};
        }
    }
    return rep;
}

}  // namespace pgg
