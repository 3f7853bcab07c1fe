#include <doctest.h>

#include <cmath>

#include "pgg/errors.hpp"
#include "pgg/predict.hpp"
#include "pgg/rng.hpp"

using namespace pgg;

namespace {

// Synthetic experiment records spanning the design space, with a known
// data-generating process for the treatment efficiency.
std::vector<ExperimentRecord> synth_records(int n, std::uint64_t seed, double noise = 1.0) {
    Rng rng(seed);
    std::vector<ExperimentRecord> out;
    for (int i = 0; i < n; ++i) {
        UnitPoint u(kDesignDim);
        for (auto& x : u) x = rng.uniform();
        ExperimentRecord r;
        r.config = map_unit_point_to_config(u);
        r.config_id = "S" + std::to_string(i);
        r.control_efficiency = 50.0 + 30.0 * rng.uniform();
        r.treatment_efficiency = 0.8 * r.control_efficiency +
                                 6.0 * (r.config.communication ? 1.0 : 0.0) -
                                 0.2 * r.config.game_length +
                                 4.0 * (r.config.communication ? 1.0 : 0.0) *
                                     (r.config.reward_enabled ? 1.0 : 0.0) +
                                 noise * rng.normal();
        r.n_control = 1;
        r.n_treatment = 1;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace

TEST_CASE("build_matched_dataset averages arms and drops unmatched configs") {
    std::vector<PggConfig> configs(2);
    configs[0].config_id = "A";
    configs[1].config_id = "B";
    std::vector<GameOutcomeRow> games = {
        {"g1", "A", false, 0.50, true},  {"g2", "A", false, 0.70, true},
        {"g3", "A", true, 0.40, true},   {"g4", "A", true, 0.60, true},
        {"g5", "B", false, 0.90, true},  // config B has no treatment game
        {"g6", "B", true, 0.80, false},  // excluded
    };
    const auto records = build_matched_dataset(games, configs, Wave::validation);
    REQUIRE(records.size() == 1);
    CHECK(records[0].config_id == "A");
    CHECK(records[0].control_efficiency == doctest::Approx(60.0));    // mean(50,70) in pp
    CHECK(records[0].treatment_efficiency == doctest::Approx(50.0));  // mean(40,60) in pp
    CHECK(records[0].n_control == 2);
    CHECK(records[0].n_treatment == 2);
}

TEST_CASE("featurize dimensions and learning-set standardization") {
    const auto learning = synth_records(40, 1);
    Matrix base;
    for (const auto& r : learning) base.push_back(base_features(r));
    const auto std_ = fit_standardizer(base);

    SUBCASE("with interactions the vector has 105 entries") {
        const auto z = featurize(base[0], true, std_);
        CHECK(z.size() == 105);
        CHECK(model_feature_names(true).size() == 105);
        CHECK(featurize(base[0], false, std_).size() == 14);
    }
    SUBCASE("standardized learning columns have mean 0 within 1e-10") {
        std::vector<double> mean(14, 0.0);
        for (const auto& row : base) {
            const auto z = standardize(std_, row);
            for (int j = 0; j < 14; ++j) mean[j] += z[j];
        }
        for (int j = 0; j < 14; ++j) CHECK(std::fabs(mean[j] / 40.0) < 1e-10);
    }
    SUBCASE("reward impact never appears as a feature") {
        for (const auto& name : model_feature_names(true)) {
            CHECK(name.find("reward_impact") == std::string::npos);
        }
    }
    SUBCASE("the constant punishment indicator standardizes to zero") {
        CHECK(std_.zero_variance[9]);  // "punishment"
        const auto z = standardize(std_, base[0]);
        CHECK(z[9] == 0.0);
    }
}

TEST_CASE("elastic net shrinkage endpoints") {
    const auto learning = synth_records(60, 2);
    Matrix base;
    std::vector<double> y;
    for (const auto& r : learning) {
        base.push_back(base_features(r));
        y.push_back(r.treatment_efficiency);
    }
    const auto std_ = fit_standardizer(base);
    Matrix x;
    for (const auto& b : base) x.push_back(featurize(b, false, std_));

    SUBCASE("huge alpha shrinks every coefficient to zero") {
        ElasticNetOptions opt;
        opt.alpha = 1e9;
        opt.l1_ratio = 0.5;
        const auto fit = fit_elastic_net(x, y, opt);
        double mean_y = 0.0;
        for (double v : y) mean_y += v;
        mean_y /= static_cast<double>(y.size());
        for (double c : fit.coef) CHECK(c == doctest::Approx(0.0));
        CHECK(fit.intercept == doctest::Approx(mean_y).epsilon(1e-9));
    }
}

TEST_CASE("alpha = 0 OLS equivalence with the zero-variance column removed") {
    // ols_fit rejects the rank-deficient full matrix, so compare on the
    // reduced design.
    const auto learning = synth_records(50, 3);
    Matrix base;
    std::vector<double> y;
    for (const auto& r : learning) {
        base.push_back(base_features(r));
        y.push_back(r.treatment_efficiency);
    }
    const auto std_ = fit_standardizer(base);
    Matrix x_full, x_reduced;
    for (const auto& b : base) {
        auto z = featurize(b, false, std_);
        x_full.push_back(z);
        std::vector<double> zr;
        for (std::size_t j = 0; j < z.size(); ++j) {
            if (!std_.zero_variance[j]) zr.push_back(z[j]);
        }
        x_reduced.push_back(zr);
    }
    ElasticNetOptions opt;
    opt.alpha = 0.0;
    opt.tol = 1e-12;
    const auto fit = fit_elastic_net(x_full, y, opt);
    const auto ols = ols_fit(x_reduced, y, true);
    std::size_t k = 1;
    for (std::size_t j = 0; j < fit.coef.size(); ++j) {
        if (std_.zero_variance[j]) {
            CHECK(fit.coef[j] == 0.0);
            continue;
        }
        CHECK(fit.coef[j] == doctest::Approx(ols.coef[k++]).epsilon(1e-6));
    }
}

TEST_CASE("elastic net satisfies its KKT conditions at the optimum") {
    const auto learning = synth_records(80, 4);
    Matrix base;
    std::vector<double> y;
    for (const auto& r : learning) {
        base.push_back(base_features(r));
        y.push_back(r.treatment_efficiency);
    }
    const auto std_ = fit_standardizer(base);
    Matrix x;
    for (const auto& b : base) x.push_back(featurize(b, true, std_));
    for (double alpha : {0.01, 0.07, 0.5}) {
        for (double l1 : {0.0, 0.15, 0.9}) {
            ElasticNetOptions opt;
            opt.alpha = alpha;
            opt.l1_ratio = l1;
            opt.tol = 1e-11;
            const auto fit = fit_elastic_net(x, y, opt);
            CHECK(enet_kkt_violation(x, y, fit, alpha, l1) < 1e-7);
        }
    }
}

TEST_CASE("non-convergence carries the last iterate") {
    const auto learning = synth_records(30, 5);
    Matrix base;
    std::vector<double> y;
    for (const auto& r : learning) {
        base.push_back(base_features(r));
        y.push_back(r.treatment_efficiency);
    }
    const auto std_ = fit_standardizer(base);
    Matrix x;
    for (const auto& b : base) x.push_back(featurize(b, true, std_));
    ElasticNetOptions opt;
    opt.alpha = 0.001;
    opt.l1_ratio = 0.5;
    opt.max_iter = 1;
    opt.tol = 1e-14;
    EnetFit last;
    try {
        (void)fit_elastic_net(x, y, opt, &last);
        FAIL("expected not-converged");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::not_converged);
        CHECK(last.sweeps == 1);
        CHECK_FALSE(last.coef.empty());
    }
}

TEST_CASE("cross-validation grid selection") {
    const auto learning = synth_records(50, 6);
    SUBCASE("single-point grid returns that point") {
        const auto cv = cross_validate_grid(learning, {0.07}, {0.15}, 5, 1, true);
        CHECK(cv.best_alpha == doctest::Approx(0.07));
        CHECK(cv.best_l1_ratio == doctest::Approx(0.15));
        CHECK(cv.grid.size() == 1);
    }
    SUBCASE("same seed twice gives identical folds and results") {
        const auto a = cross_validate_grid(learning, {0.01, 0.1}, {0.1, 0.9}, 5, 2, true);
        const auto b = cross_validate_grid(learning, {0.01, 0.1}, {0.1, 0.9}, 5, 2, true);
        CHECK(a.best_rmse == b.best_rmse);
        CHECK(a.best_alpha == b.best_alpha);
        REQUIRE(a.grid.size() == b.grid.size());
        for (std::size_t i = 0; i < a.grid.size(); ++i) CHECK(a.grid[i].rmse == b.grid[i].rmse);
    }
}

TEST_CASE("evaluate: rmse, out-of-sample r2, and their identity") {
    const std::vector<double> truth = {50, 60, 70, 80};
    SUBCASE("perfect predictions") {
        const auto m = evaluate(truth, truth, 65.0);
        CHECK(m.rmse == doctest::Approx(0.0));
        CHECK(m.r2 == doctest::Approx(1.0));
    }
    SUBCASE("predicting the learning mean gives r2 = 0") {
        const std::vector<double> constant(4, 65.0);
        const auto m = evaluate(constant, truth, 65.0);
        CHECK(m.r2 == doctest::Approx(0.0));
    }
    SUBCASE("identity r2 = 1 - n rmse^2 / sum (y - ybar)^2") {
        const std::vector<double> pred = {52, 57, 74, 77};
        const auto m = evaluate(pred, truth, 65.0);
        double denom = 0.0;
        for (double y : truth) denom += (y - 65.0) * (y - 65.0);
        CHECK(m.r2 == doctest::Approx(1.0 - 4.0 * m.rmse * m.rmse / denom).epsilon(1e-12));
    }
}

TEST_CASE("baselines") {
    std::vector<ExperimentRecord> validation(2);
    validation[0].control_efficiency = 60.0;
    validation[0].treatment_efficiency = 55.0;
    validation[1].control_efficiency = 80.0;
    validation[1].treatment_efficiency = 82.0;
    const auto b = baselines(validation, -3.0, 70.0);
    CHECK(b.no_effect == doctest::Approx(std::sqrt((25.0 + 4.0) / 2)));
    // control + ATE: preds 57, 77 -> errors -2, 5
    CHECK(b.control_plus_ate == doctest::Approx(std::sqrt((4.0 + 25.0) / 2)));
    // constant 70 -> errors -15, 12
    CHECK(b.constant_mean == doctest::Approx(std::sqrt((225.0 + 144.0) / 2)));
}

TEST_CASE("train/predict pipeline recovers a planted linear signal") {
    const auto learning = synth_records(150, 7, 0.5);
    const auto validation = synth_records(20, 8, 0.5);
    const auto model = train_model(learning, "enet", 0.05, 0.2, true);
    const auto preds = predict(model, validation);
    std::vector<double> truth;
    for (const auto& r : validation) truth.push_back(r.treatment_efficiency);
    const auto m = evaluate(preds, truth, model.learning_treatment_mean);
    const auto base = baselines(validation, model.ate_learning, model.learning_treatment_mean);
    CHECK(m.rmse < base.constant_mean);  // the model must beat the constant baseline
    CHECK(m.r2 > 0.5);
}

TEST_CASE("permutation importance: irrelevant features have ratio exactly 1") {
    const auto learning = synth_records(100, 9, 0.1);
    const auto validation = synth_records(25, 10, 0.1);
    // OLS without interactions: a zero coefficient makes shuffles free
    auto model = train_model(learning, "ols", 0.0, 0.0, false);
    // force a known-zero coefficient, then its shuffle cannot change predictions
    model.coef[2] = 0.0;  // contribution_type
    const auto imp = permutation_importance(model, validation, 10, 77);
    bool found = false;
    for (const auto& fi : imp) {
        if (fi.feature == "contribution_type") {
            found = true;
            for (double ratio : fi.ratios) CHECK(ratio == doctest::Approx(1.0));
        }
        if (fi.feature == "punishment") {
            // constant column: shuffling is a no-op
            for (double ratio : fi.ratios) CHECK(ratio == doctest::Approx(1.0));
        }
    }
    CHECK(found);
}

TEST_CASE("permutation importance ranks the planted dominant feature first") {
    const auto learning = synth_records(150, 11, 0.3);
    const auto validation = synth_records(30, 12, 0.3);
    const auto model = train_model(learning, "enet", 0.02, 0.2, true);
    const auto imp = permutation_importance(model, validation, 30, 5);
    REQUIRE_FALSE(imp.empty());
    CHECK(imp[0].feature == "communication");
    CHECK(imp[0].ratio_mean > 1.05);
}

TEST_CASE("linear shap") {
    const auto learning = synth_records(60, 13, 0.5);
    const auto model = train_model(learning, "enet", 0.03, 0.3, true);

    SUBCASE("additivity: base value plus contributions equals the prediction") {
        const auto validation = synth_records(10, 14, 0.5);
        for (const auto& r : validation) {
            const auto shap = linear_shap(model, r);
            double total = shap.base_value;
            for (const auto& e : shap.raw) total += e.phi;
            CHECK(std::fabs(total - shap.prediction) < 1e-10);
            CHECK(shap.prediction == doctest::Approx(predict_one(model, r)).epsilon(1e-12));
            // re-attribution conserves the total
            double reattributed = shap.base_value;
            for (const auto& e : shap.per_base_feature) reattributed += e.phi;
            CHECK(std::fabs(reattributed - shap.prediction) < 1e-10);
        }
    }
    SUBCASE("a record at the background means has zero contributions") {
        // Build a model on records whose features we can echo back through
        // the record interface is awkward, so check the identity directly:
        // phi_j = coef_j (z_j - mu_j) vanishes when z = mu by construction.
        const auto& r = learning[0];
        auto shap = linear_shap(model, r);
        // self-consistency of the hand formula for one feature
        const auto z = featurize(base_features(r), true, model.standardizer);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(shap.raw[j].phi ==
                  doctest::Approx(model.coef[j] * (z[j] - model.background_mean[j])).epsilon(1e-12));
        }
    }
    SUBCASE("hand example: coef 2, mean 1, x = 3 gives phi = 4") {
        LinearModel toy;
        toy.kind = "ols";
        toy.with_interactions = false;
        toy.intercept = 0.0;
        toy.coef.assign(14, 0.0);
        toy.coef[13] = 2.0;  // control_efficiency slot
        toy.standardizer.mean.assign(14, 0.0);
        toy.standardizer.sd.assign(14, 1.0);
        toy.standardizer.zero_variance.assign(14, false);
        toy.background_mean.assign(14, 0.0);
        toy.background_mean[13] = 1.0;
        ExperimentRecord r;
        r.control_efficiency = 3.0;
        const auto shap = linear_shap(toy, r);
        CHECK(shap.raw[13].phi == doctest::Approx(4.0));
    }
    SUBCASE("nonlinear model kinds are rejected") {
        LinearModel bad = model;
        bad.kind = "random_forest";
        try {
            (void)linear_shap(bad, learning[0]);
            FAIL("expected unsupported-model");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::unsupported_model);
        }
    }
}

TEST_CASE("standardizer is fit on learning data only (sentinel shift)") {
    const auto learning = synth_records(50, 15);
    auto validation = synth_records(10, 16);
    const auto model = train_model(learning, "ols", 0.0, 0.0, false);
    const auto before = model.standardizer.mean;
    // shift a validation feature by a large sentinel; the standardizer and
    // therefore the learning-feature mapping must be unaffected
    for (auto& r : validation) r.control_efficiency += 1000.0;
    (void)predict(model, validation);
    CHECK(model.standardizer.mean == before);
    // and predictions respond linearly through the frozen scaler
    auto shifted = validation;
    for (auto& r : shifted) r.control_efficiency += 10.0;
    const auto p0 = predict(model, validation);
    const auto p1 = predict(model, shifted);
    const double slope_pp =
        model.coef[13] / model.standardizer.sd[13];  // effect of +1pp control efficiency
    for (std::size_t i = 0; i < p0.size(); ++i) {
        CHECK(p1[i] - p0[i] == doctest::Approx(10.0 * slope_pp).epsilon(1e-9));
    }
}

TEST_CASE("model pipeline determinism") {
    const auto learning = synth_records(80, 17);
    const auto a = train_model(learning, "enet", 0.07, 0.15, true);
    const auto b = train_model(learning, "enet", 0.07, 0.15, true);
    CHECK(a.coef == b.coef);
    CHECK(a.intercept == b.intercept);
}
