#include "pgg/predict.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>

#include "pgg/errors.hpp"
#include "pgg/rng.hpp"

namespace pgg {

std::vector<ExperimentRecord> build_matched_dataset(const std::vector<GameOutcomeRow>& games,
                                                    const std::vector<PggConfig>& configs,
                                                    Wave wave) {
    std::map<std::string, const PggConfig*> config_by_id;
    for (const auto& c : configs) config_by_id[c.config_id] = &c;

    struct Arms {
        std::vector<double> treatment;
        std::vector<double> control;
    };
    std::map<std::string, Arms> by_config;
    for (const auto& g : games) {
        if (!g.included) continue;
        auto& arms = by_config[g.config_id];
        (g.treatment_arm ? arms.treatment : arms.control).push_back(g.efficiency);
    }

    std::vector<ExperimentRecord> records;
    for (const auto& [config_id, arms] : by_config) {
        auto it = config_by_id.find(config_id);
        if (it == config_by_id.end()) {
            std::cerr << "[pgg] dropping " << config_id << ": no configuration row\n";
            continue;
        }
        if (arms.treatment.empty() || arms.control.empty()) {
            std::cerr << "[pgg] dropping " << config_id << ": no valid game in the "
                      << (arms.treatment.empty() ? "treatment" : "control") << " arm\n";
            continue;
        }
        ExperimentRecord r;
        r.config_id = config_id;
        r.wave = wave;
        r.config = *it->second;
        r.control_efficiency =
            100.0 * std::accumulate(arms.control.begin(), arms.control.end(), 0.0) /
            static_cast<double>(arms.control.size());
        r.treatment_efficiency =
            100.0 * std::accumulate(arms.treatment.begin(), arms.treatment.end(), 0.0) /
            static_cast<double>(arms.treatment.size());
        r.n_control = static_cast<int>(arms.control.size());
        r.n_treatment = static_cast<int>(arms.treatment.size());
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<std::string> base_feature_names() {
    return {"group_size",
            "game_length",
            "contribution_type",
            "contribution_framing",
            "mpcr",
            "communication",
            "peer_outcome_visibility",
            "actor_anonymity",
            "horizon_knowledge",
            "punishment",
            "peer_incentive_cost",
            "punishment_impact",
            "reward_enabled",
            "control_efficiency"};
}

std::vector<std::string> model_feature_names(bool with_interactions) {
    auto names = base_feature_names();
    if (!with_interactions) return names;
    std::vector<std::string> out = names;
    for (int i = 0; i < kBaseFeatures; ++i) {
        for (int j = i + 1; j < kBaseFeatures; ++j) {
            out.push_back(names[static_cast<std::size_t>(i)] + "*" +
                          names[static_cast<std::size_t>(j)]);
        }
    }
    return out;
}

std::vector<double> base_features(const ExperimentRecord& r) {
    const PggConfig& c = r.config;
    return {static_cast<double>(c.group_size),
            static_cast<double>(c.game_length),
            c.contribution_type == ContributionType::all_or_nothing ? 1.0 : 0.0,
            c.contribution_framing == ContributionFraming::opt_out ? 1.0 : 0.0,
            c.mpcr,
            c.communication ? 1.0 : 0.0,
            c.peer_outcome_visibility ? 1.0 : 0.0,
            c.actor_anonymity == ActorAnonymity::revealed ? 1.0 : 0.0,
            c.horizon_knowledge ? 1.0 : 0.0,
            1.0,  // punishment availability: always on in the predicted arm
            static_cast<double>(c.peer_incentive_cost),
            static_cast<double>(c.punishment_impact),
            c.reward_enabled ? 1.0 : 0.0,
            r.control_efficiency};
}

Standardizer fit_standardizer(const Matrix& base_rows) {
    if (base_rows.empty()) throw Error(ErrorCode::usage, "fit_standardizer: no rows");
    const std::size_t p = base_rows.front().size();
    const double n = static_cast<double>(base_rows.size());
    Standardizer s;
    s.mean.assign(p, 0.0);
    s.sd.assign(p, 0.0);
    s.zero_variance.assign(p, false);
    for (const auto& row : base_rows) {
        for (std::size_t j = 0; j < p; ++j) s.mean[j] += row[j];
    }
    for (std::size_t j = 0; j < p; ++j) s.mean[j] /= n;
    for (const auto& row : base_rows) {
        for (std::size_t j = 0; j < p; ++j) {
            const double d = row[j] - s.mean[j];
            s.sd[j] += d * d;
        }
    }
    const auto names = base_feature_names();
    for (std::size_t j = 0; j < p; ++j) {
        s.sd[j] = std::sqrt(s.sd[j] / n);
        if (s.sd[j] < 1e-12) {
            s.zero_variance[j] = true;
            if (j < names.size()) {
                std::cerr << "[pgg] warning: feature '" << names[j]
                          << "' has zero variance in training data; it standardizes to 0\n";
            }
        }
    }
    return s;
}

std::vector<double> standardize(const Standardizer& s, const std::vector<double>& base) {
    if (base.size() != s.mean.size()) {
        throw Error(ErrorCode::usage, "standardize: feature length mismatch");
    }
    std::vector<double> z(base.size());
    for (std::size_t j = 0; j < base.size(); ++j) {
        z[j] = s.zero_variance[j] ? 0.0 : (base[j] - s.mean[j]) / s.sd[j];
    }
    return z;
}

std::vector<double> featurize(const std::vector<double>& base, bool with_interactions,
                              const Standardizer& s) {
    std::vector<double> z = standardize(s, base);
    if (!with_interactions) return z;
    const std::size_t p = z.size();
    std::vector<double> out = z;
    out.reserve(p + p * (p - 1) / 2);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) out.push_back(z[i] * z[j]);
    }
    return out;
}

namespace {

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

Matrix to_columns(const Matrix& rows) {
    const std::size_t n = rows.size();
    const std::size_t p = rows.front().size();
    Matrix cols(p, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) cols[j][i] = rows[i][j];
    }
    return cols;
}

}  // namespace

EnetFit fit_elastic_net(const Matrix& x, const std::vector<double>& y,
                        const ElasticNetOptions& opt, EnetFit* last_iterate) {
    const std::size_t n = x.size();
    if (n == 0 || n != y.size()) throw Error(ErrorCode::usage, "fit_elastic_net: shape mismatch");
    const std::size_t p = x.front().size();
    const double dn = static_cast<double>(n);

    const Matrix cols = to_columns(x);
    std::vector<double> col_ssq(p);
    for (std::size_t j = 0; j < p; ++j) {
        double ss = 0.0;
        for (double v : cols[j]) ss += v * v;
        col_ssq[j] = ss / dn;
    }

    EnetFit fit;
    fit.coef.assign(p, 0.0);
    fit.intercept = std::accumulate(y.begin(), y.end(), 0.0) / dn;
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - fit.intercept;

    const double l1_pen = opt.alpha * opt.l1_ratio;
    const double l2_pen = opt.alpha * (1.0 - opt.l1_ratio);

    for (int sweep = 0; sweep < opt.max_iter; ++sweep) {
        double max_change = 0.0;

        // unpenalized intercept
        double rbar = std::accumulate(resid.begin(), resid.end(), 0.0) / dn;
        if (rbar != 0.0) {
            fit.intercept += rbar;
            for (auto& r : resid) r -= rbar;
            max_change = std::max(max_change, std::fabs(rbar));
        }

        for (std::size_t j = 0; j < p; ++j) {
            if (col_ssq[j] == 0.0) continue;  // all-zero column keeps a zero coefficient
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += cols[j][i] * resid[i];
            rho = rho / dn + col_ssq[j] * fit.coef[j];
            const double updated = soft_threshold(rho, l1_pen) / (col_ssq[j] + l2_pen);
            const double delta = updated - fit.coef[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) resid[i] -= delta * cols[j][i];
                fit.coef[j] = updated;
                max_change = std::max(max_change, std::fabs(delta));
            }
        }
        fit.sweeps = sweep + 1;
        if (max_change < opt.tol) return fit;
    }
    if (last_iterate) *last_iterate = fit;
    throw Error(ErrorCode::not_converged,
                "elastic net did not converge in " + std::to_string(opt.max_iter) +
                    " sweeps (tol " + std::to_string(opt.tol) + ")");
}

double enet_kkt_violation(const Matrix& x, const std::vector<double>& y, const EnetFit& fit,
                          double alpha, double l1_ratio) {
    const std::size_t n = x.size();
    const std::size_t p = fit.coef.size();
    const double dn = static_cast<double>(n);
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
        double f = fit.intercept;
        for (std::size_t j = 0; j < p; ++j) f += x[i][j] * fit.coef[j];
        resid[i] = y[i] - f;
    }
    const double l1_pen = alpha * l1_ratio;
    const double l2_pen = alpha * (1.0 - l1_ratio);
    double worst = std::fabs(std::accumulate(resid.begin(), resid.end(), 0.0) / dn);
    for (std::size_t j = 0; j < p; ++j) {
        double g = 0.0;
        for (std::size_t i = 0; i < n; ++i) g += x[i][j] * resid[i];
        g /= dn;  // -d/db_j of the smooth loss, negated: (1/n) X_j' r
        if (fit.coef[j] == 0.0) {
            worst = std::max(worst, std::max(0.0, std::fabs(g) - l1_pen));
        } else {
            const double stat = g - l2_pen * fit.coef[j] -
                                l1_pen * (fit.coef[j] > 0 ? 1.0 : -1.0);
            worst = std::max(worst, std::fabs(stat));
        }
    }
    return worst;
}

namespace {

Matrix model_matrix(const std::vector<ExperimentRecord>& records, bool with_interactions,
                    const Standardizer& s) {
    Matrix x;
    x.reserve(records.size());
    for (const auto& r : records) x.push_back(featurize(base_features(r), with_interactions, s));
    return x;
}

std::vector<double> targets(const std::vector<ExperimentRecord>& records) {
    std::vector<double> y;
    y.reserve(records.size());
    for (const auto& r : records) y.push_back(r.treatment_efficiency);
    return y;
}

}  // namespace

LinearModel train_model(const std::vector<ExperimentRecord>& learning, const std::string& kind,
                        double alpha, double l1_ratio, bool with_interactions, double tol,
                        int max_iter) {
    if (learning.empty()) throw Error(ErrorCode::usage, "train_model: no learning records");
    if (kind != "ols" && kind != "enet") {
        throw Error(ErrorCode::unsupported_model, "unknown model kind: " + kind);
    }
    Matrix base;
    base.reserve(learning.size());
    for (const auto& r : learning) base.push_back(base_features(r));

    LinearModel m;
    m.kind = kind;
    m.with_interactions = with_interactions;
    m.standardizer = fit_standardizer(base);

    const Matrix x = model_matrix(learning, with_interactions, m.standardizer);
    const std::vector<double> y = targets(learning);

    if (kind == "ols") {
        // zero-variance features (and interactions touching them) standardize
        // to all-zero columns; they carry zero coefficients rather than making
        // the design singular
        const std::size_t p = x.front().size();
        std::vector<bool> is_zero(p, true);
        for (const auto& row : x) {
            for (std::size_t j = 0; j < p; ++j) {
                if (std::fabs(row[j]) > 1e-12) is_zero[j] = false;
            }
        }
        Matrix reduced;
        reduced.reserve(x.size());
        for (const auto& row : x) {
            std::vector<double> r;
            for (std::size_t j = 0; j < p; ++j) {
                if (!is_zero[j]) r.push_back(row[j]);
            }
            reduced.push_back(std::move(r));
        }
        const OlsResult ols = ols_fit(reduced, y, /*add_intercept=*/true);
        m.intercept = ols.coef[0];
        m.coef.assign(p, 0.0);
        std::size_t k = 1;
        for (std::size_t j = 0; j < p; ++j) {
            if (!is_zero[j]) m.coef[j] = ols.coef[k++];
        }
        m.alpha = 0.0;
        m.l1_ratio = 0.0;
    } else {
        ElasticNetOptions opt;
        opt.alpha = alpha;
        opt.l1_ratio = l1_ratio;
        opt.tol = tol;
        opt.max_iter = max_iter;
        const EnetFit fit = fit_elastic_net(x, y, opt);
        m.intercept = fit.intercept;
        m.coef = fit.coef;
        m.alpha = alpha;
        m.l1_ratio = l1_ratio;
    }

    double treat_sum = 0.0;
    double ate_sum = 0.0;
    for (const auto& r : learning) {
        treat_sum += r.treatment_efficiency;
        ate_sum += r.treatment_efficiency - r.control_efficiency;
    }
    m.learning_treatment_mean = treat_sum / static_cast<double>(learning.size());
    m.ate_learning = ate_sum / static_cast<double>(learning.size());

    m.background_mean.assign(m.coef.size(), 0.0);
    for (const auto& row : x) {
        for (std::size_t j = 0; j < row.size(); ++j) m.background_mean[j] += row[j];
    }
    for (auto& v : m.background_mean) v /= static_cast<double>(x.size());
    return m;
}

double predict_one(const LinearModel& m, const ExperimentRecord& r) {
    const auto z = featurize(base_features(r), m.with_interactions, m.standardizer);
    double f = m.intercept;
    for (std::size_t j = 0; j < z.size(); ++j) f += m.coef[j] * z[j];
    return f;
}

std::vector<double> predict(const LinearModel& m, const std::vector<ExperimentRecord>& rs) {
    std::vector<double> out;
    out.reserve(rs.size());
    for (const auto& r : rs) out.push_back(predict_one(m, r));
    return out;
}

CvResult cross_validate_grid(const std::vector<ExperimentRecord>& learning,
                             const std::vector<double>& alpha_grid,
                             const std::vector<double>& l1_grid, int folds, std::uint64_t seed,
                             bool with_interactions) {
    const int n = static_cast<int>(learning.size());
    if (folds < 2 || folds > n) {
        throw Error(ErrorCode::usage, "cross_validate_grid: folds must be in [2, n]");
    }
    if (alpha_grid.empty() || l1_grid.empty()) {
        throw Error(ErrorCode::usage, "cross_validate_grid: empty grid");
    }

    // seeded shuffle dealt round-robin into folds
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "cv.folds"));
    rng.shuffle(order);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) fold_of[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i % folds;

    CvResult result;
    result.best_rmse = std::numeric_limits<double>::max();
    for (double alpha : alpha_grid) {
        for (double l1 : l1_grid) {
            std::vector<double> pred(static_cast<std::size_t>(n), 0.0);
            for (int f = 0; f < folds; ++f) {
                std::vector<ExperimentRecord> train;
                std::vector<int> held;
                for (int i = 0; i < n; ++i) {
                    if (fold_of[static_cast<std::size_t>(i)] == f) held.push_back(i);
                    else train.push_back(learning[static_cast<std::size_t>(i)]);
                }
                if (held.empty()) continue;
                const LinearModel m =
                    train_model(train, "enet", alpha, l1, with_interactions);
                for (int i : held) {
                    pred[static_cast<std::size_t>(i)] = predict_one(m, learning[static_cast<std::size_t>(i)]);
                }
            }
            double sse = 0.0;
            for (int i = 0; i < n; ++i) {
                const double e = pred[static_cast<std::size_t>(i)] -
                                 learning[static_cast<std::size_t>(i)].treatment_efficiency;
                sse += e * e;
            }
            const double rmse = std::sqrt(sse / n);
            result.grid.push_back({alpha, l1, rmse});
            if (rmse < result.best_rmse) {
                result.best_rmse = rmse;
                result.best_alpha = alpha;
                result.best_l1_ratio = l1;
            }
        }
    }
    return result;
}

EvalMetrics evaluate(const std::vector<double>& predictions, const std::vector<double>& truths,
                     double learning_treatment_mean) {
    if (predictions.size() != truths.size() || truths.empty()) {
        throw Error(ErrorCode::usage, "evaluate: prediction/truth length mismatch");
    }
    double sse = 0.0;
    double baseline_sse = 0.0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const double e = truths[i] - predictions[i];
        sse += e * e;
        const double b = truths[i] - learning_treatment_mean;
        baseline_sse += b * b;
    }
    EvalMetrics m;
    m.rmse = std::sqrt(sse / static_cast<double>(truths.size()));
    m.r2 = 1.0 - sse / baseline_sse;
    return m;
}

BaselineRmse baselines(const std::vector<ExperimentRecord>& validation, double ate_learning,
                       double learning_treatment_mean) {
    if (validation.empty()) throw Error(ErrorCode::usage, "baselines: no validation records");
    double sse1 = 0.0;
    double sse2 = 0.0;
    double sse3 = 0.0;
    for (const auto& r : validation) {
        const double y = r.treatment_efficiency;
        sse1 += (y - r.control_efficiency) * (y - r.control_efficiency);
        const double yhat2 = r.control_efficiency + ate_learning;
        sse2 += (y - yhat2) * (y - yhat2);
        sse3 += (y - learning_treatment_mean) * (y - learning_treatment_mean);
    }
    const double n = static_cast<double>(validation.size());
    return {std::sqrt(sse1 / n), std::sqrt(sse2 / n), std::sqrt(sse3 / n)};
}

std::vector<FeatureImportance> permutation_importance(const LinearModel& m,
                                                      const std::vector<ExperimentRecord>& validation,
                                                      int repeats, std::uint64_t seed) {
    if (validation.empty()) throw Error(ErrorCode::usage, "permutation_importance: no records");
    const std::size_t n = validation.size();

    Matrix base;
    base.reserve(n);
    for (const auto& r : validation) base.push_back(base_features(r));
    std::vector<double> truth = targets(validation);

    auto rmse_of = [&](const Matrix& rows) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto z = featurize(rows[i], m.with_interactions, m.standardizer);
            double f = m.intercept;
            for (std::size_t j = 0; j < z.size(); ++j) f += m.coef[j] * z[j];
            const double e = truth[i] - f;
            sse += e * e;
        }
        return std::sqrt(sse / static_cast<double>(n));
    };

    const double baseline = rmse_of(base);
    const auto names = base_feature_names();

    std::vector<FeatureImportance> out;
    // design parameters only: every base feature except the trailing control efficiency
    for (int feat = 0; feat < kBaseFeatures - 1; ++feat) {
        FeatureImportance fi;
        fi.feature = names[static_cast<std::size_t>(feat)];
        fi.ratios.reserve(static_cast<std::size_t>(repeats));
        for (int rep = 0; rep < repeats; ++rep) {
            Rng rng(derive_seed(seed, "pfi",
                                (static_cast<std::uint64_t>(feat) << 32) |
                                    static_cast<std::uint64_t>(rep)));
            std::vector<double> column(n);
            for (std::size_t i = 0; i < n; ++i) column[i] = base[i][static_cast<std::size_t>(feat)];
            rng.shuffle(column);
            Matrix shuffled = base;
            for (std::size_t i = 0; i < n; ++i) shuffled[i][static_cast<std::size_t>(feat)] = column[i];
            fi.ratios.push_back(rmse_of(shuffled) / baseline);
        }
        double sum = std::accumulate(fi.ratios.begin(), fi.ratios.end(), 0.0);
        fi.ratio_mean = sum / static_cast<double>(repeats);
        std::vector<double> sorted = fi.ratios;
        std::sort(sorted.begin(), sorted.end());
        auto pct = [&](double q) {
            const double pos = q * (static_cast<double>(sorted.size()) - 1.0);
            const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
            const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
            return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
        };
        fi.ci_lo = pct(0.025);
        fi.ci_hi = pct(0.975);
        out.push_back(std::move(fi));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.ratio_mean > b.ratio_mean; });
    return out;
}

ShapReport linear_shap(const LinearModel& m, const ExperimentRecord& r) {
    if (m.kind != "ols" && m.kind != "enet") {
        throw Error(ErrorCode::unsupported_model,
                    "SHAP closed form only applies to linear models, got kind '" + m.kind + "'");
    }
    const auto z = featurize(base_features(r), m.with_interactions, m.standardizer);
    const auto names = model_feature_names(m.with_interactions);

    ShapReport rep;
    rep.base_value = m.intercept;
    for (std::size_t j = 0; j < m.coef.size(); ++j) {
        rep.base_value += m.coef[j] * m.background_mean[j];
    }
    double pred = m.intercept;
    rep.raw.reserve(m.coef.size());
    for (std::size_t j = 0; j < m.coef.size(); ++j) {
        const double phi = m.coef[j] * (z[j] - m.background_mean[j]);
        rep.raw.push_back({names[j], phi});
        pred += m.coef[j] * z[j];
    }
    rep.prediction = pred;

    // re-attribute interaction contributions half to each parent base feature
    const auto base_names = base_feature_names();
    std::vector<double> per_base(static_cast<std::size_t>(kBaseFeatures), 0.0);
    std::size_t idx = 0;
    for (int j = 0; j < kBaseFeatures && idx < rep.raw.size(); ++j, ++idx) {
        per_base[static_cast<std::size_t>(j)] += rep.raw[idx].phi;
    }
    if (m.with_interactions) {
        for (int i = 0; i < kBaseFeatures; ++i) {
            for (int j = i + 1; j < kBaseFeatures; ++j, ++idx) {
                per_base[static_cast<std::size_t>(i)] += 0.5 * rep.raw[idx].phi;
                per_base[static_cast<std::size_t>(j)] += 0.5 * rep.raw[idx].phi;
            }
        }
    }
    for (int j = 0; j < kBaseFeatures; ++j) {
        rep.per_base_feature.push_back({base_names[static_cast<std::size_t>(j)],
                                        per_base[static_cast<std::size_t>(j)]});
    }
    return rep;
}

}  // namespace pgg
