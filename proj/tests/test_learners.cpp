#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "stylemill/errors.hpp"
#include "stylemill/learners.hpp"
#include "stylemill/rng.hpp"

using namespace stylemill;

namespace {

const std::vector<std::string> kNames1{"f0"};
const std::vector<std::string> kNames2{"f0", "f1"};

void make_clouds(Rng& rng, std::size_t n_per_class, std::size_t d, double separation,
                 std::vector<std::vector<double>>& x, std::vector<int>& y) {
    x.clear();
    y.clear();
    for (int pole : {+1, -1})
        for (std::size_t i = 0; i < n_per_class; ++i) {
            std::vector<double> row(d);
            for (std::size_t j = 0; j < d; ++j)
                row[j] = pole * separation + (rng.uniform01() - 0.5) * 2.0;
            x.push_back(row);
            y.push_back(pole);
        }
}

} // namespace

TEST_CASE("standardization uses the population stddev") {
    Standardization s = Standardization::fit({{0.0}, {2.0}, {4.0}});
    CHECK(s.mean[0] == 2.0);
    CHECK(s.stddev[0] == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-15));
    // 2 / sqrt(8/3), frozen to full precision.
    CHECK(s.apply({4.0})[0] == doctest::Approx(1.2247448713915890).epsilon(1e-15));
    CHECK(s.apply({0.0})[0] == doctest::Approx(-1.2247448713915890).epsilon(1e-15));
    CHECK(s.apply({2.0})[0] == 0.0);
}

TEST_CASE("constant columns standardize to zero instead of exploding") {
    Standardization s = Standardization::fit({{7.0, 1.0}, {7.0, 3.0}});
    CHECK(s.stddev[0] == 0.0);
    auto z = s.apply({123.0, 2.0});
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0); // mean 2, stddev 1 -> (2-2)/1
    CHECK(s.apply({7.0, 3.0})[1] == 1.0);

    CHECK_THROWS_AS(Standardization::fit({}), DataError);
    CHECK_THROWS_AS(Standardization::fit({{1.0}, {1.0, 2.0}}), DataError);

    Standardization back = Standardization::from_json(s.to_json());
    CHECK(back.to_json() == s.to_json());
}

TEST_CASE("naive Bayes matches the hand-computed Gaussian score") {
    // First pole at {1, 3} (mean 2, ML variance 1), second at {-1, -3}.
    std::vector<std::vector<double>> x{{1.0}, {3.0}, {-1.0}, {-3.0}};
    std::vector<int> y{+1, +1, -1, -1};
    TrainedModel model = fit_naive_bayes(x, y, kNames1, Dimension::Processing, {});

    auto* nb = dynamic_cast<const NbClassifier*>(model.classifier.get());
    REQUIRE(nb != nullptr);
    CHECK(nb->mean_first[0] == 2.0);
    CHECK(nb->var_first[0] == 1.0);
    CHECK(nb->mean_second[0] == -2.0);
    CHECK(nb->var_second[0] == 1.0);
    CHECK(nb->log_prior_first == std::log(0.5));
    CHECK(nb->log_prior_second == std::log(0.5));
    CHECK_FALSE(model.standardization.has_value()); // NB scores raw counts

    // log N(0.5|2,1) - log N(0.5|-2,1) = -0.5*1.5^2 + 0.5*2.5^2 = 2 exactly;
    // equal priors cancel.
    CHECK(model.decision_value({0.5}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(model.predict_one({0.5}) == +1);
    CHECK(model.predict_one({-0.5}) == -1);
    // Perfectly symmetric query scores exactly zero -> first pole.
    CHECK(model.decision_value({0.0}) == 0.0);
    CHECK(model.predict_one({0.0}) == +1);
}

TEST_CASE("naive Bayes floors constant-feature variances and keeps priors") {
    std::vector<std::vector<double>> x{{1.0, 5.0}, {3.0, 5.0}, {2.0, 5.0}, {-2.0, 5.0}};
    std::vector<int> y{+1, +1, +1, -1};
    TrainedModel model = fit_naive_bayes(x, y, kNames2, Dimension::Input, {});

    auto* nb = dynamic_cast<const NbClassifier*>(model.classifier.get());
    REQUIRE(nb != nullptr);
    CHECK(nb->var_first[1] == kVarianceEpsilon);
    CHECK(nb->var_second[1] == kVarianceEpsilon);
    CHECK(nb->log_prior_first == std::log(0.75));
    CHECK(nb->log_prior_second == std::log(0.25));
    // The shared constant feature contributes identically to both poles.
    CHECK(std::isfinite(model.decision_value({0.0, 5.0})));

    CHECK_THROWS_AS(fit_naive_bayes(x, {+1, +1, +1, +1}, kNames2, Dimension::Input, {}),
                    DataError);
}

TEST_CASE("the 4-row tree oracle splits at the midpoint with pure leaves") {
    std::vector<std::vector<double>> x{{1.0}, {2.0}, {3.0}, {4.0}};
    std::vector<int> y{+1, +1, -1, -1};
    TrainedModel model = fit_tree_c45(x, y, kNames1, Dimension::Processing, {});

    auto* tree = dynamic_cast<const TreeClassifier*>(model.classifier.get());
    REQUIRE(tree != nullptr);
    REQUIRE(tree->nodes.size() == 3);
    CHECK(tree->nodes[0].feature == 0);
    CHECK(tree->nodes[0].threshold == 2.5); // midpoint of the only informative boundary
    const auto& left = tree->nodes[static_cast<std::size_t>(tree->nodes[0].left)];
    const auto& right = tree->nodes[static_cast<std::size_t>(tree->nodes[0].right)];
    CHECK(left.feature == -1);
    CHECK(right.feature == -1);
    CHECK(left.margin == 1.0);
    CHECK(right.margin == -1.0);

    CHECK(model.predict_one({1.0}) == +1);
    CHECK(model.predict_one({2.5}) == +1); // boundary value goes left
    CHECK(model.predict_one({2.51}) == -1);
    CHECK(model.predict_one({4.0}) == -1);
}

TEST_CASE("trees fit consistent data perfectly and respect stopping rules") {
    Rng rng(3);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < 16; ++i) {
        x.push_back({rng.uniform01() * 10.0, rng.uniform01() * 10.0});
        y.push_back(rng.bounded(2) == 0 ? +1 : -1);
    }
    if (std::find(y.begin(), y.end(), +1) == y.end()) y[0] = +1;
    if (std::find(y.begin(), y.end(), -1) == y.end()) y[0] = -1;

    TrainedModel full = fit_tree_c45(x, y, kNames2, Dimension::Perception, {});
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(full.predict_one(x[i]) == y[i]);

    TreeConfig stump_cfg;
    stump_cfg.max_depth = 1;
    TrainedModel stump = fit_tree_c45(x, y, kNames2, Dimension::Perception, stump_cfg);
    auto* st = dynamic_cast<const TreeClassifier*>(stump.classifier.get());
    REQUIRE(st != nullptr);
    CHECK(st->nodes.size() <= 3);

    TreeConfig wide_leaf;
    wide_leaf.min_leaf = 16; // cannot split 16 rows into two leaves of 16
    TrainedModel leaf_only = fit_tree_c45(x, y, kNames2, Dimension::Perception, wide_leaf);
    auto* lf = dynamic_cast<const TreeClassifier*>(leaf_only.classifier.get());
    REQUIRE(lf != nullptr);
    CHECK(lf->nodes.size() == 1);
    CHECK(lf->nodes[0].feature == -1);
}

TEST_CASE("contradictory duplicate rows collapse to a first-pole leaf") {
    std::vector<std::vector<double>> x{{1.0}, {1.0}};
    std::vector<int> y{+1, -1};
    TrainedModel model = fit_tree_c45(x, y, kNames1, Dimension::Processing, {});
    CHECK(model.decision_value({1.0}) == 0.0);
    CHECK(model.predict_one({1.0}) == +1);
}

TEST_CASE("a single-class tree is one leaf predicting that class") {
    TrainedModel model =
        fit_tree_c45({{1.0}, {2.0}, {3.0}}, {-1, -1, -1}, kNames1, Dimension::Processing, {});
    auto* tree = dynamic_cast<const TreeClassifier*>(model.classifier.get());
    REQUIRE(tree != nullptr);
    CHECK(tree->nodes.size() == 1);
    CHECK(model.predict_one({9.0}) == -1);
}

TEST_CASE("a one-tree forest without bootstrap reduces to the plain tree") {
    Rng rng(17);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    make_clouds(rng, 12, 2, 1.0, x, y);

    ForestConfig fcfg;
    fcfg.n_trees = 1;
    fcfg.bootstrap = false;
    fcfg.features_per_split = 2; // all features -> no subsampled randomness
    TrainedModel forest = fit_random_forest(x, y, kNames2, Dimension::Understanding, fcfg);
    TrainedModel tree = fit_tree_c45(x, y, kNames2, Dimension::Understanding, fcfg.tree);

    CHECK(forest.classifier->params_json().at("trees")[0] == tree.classifier->params_json());
    for (const auto& row : x) CHECK(forest.predict_one(row) == tree.predict_one(row));
}

TEST_CASE("an even forest vote breaks ties toward the first pole") {
    auto plus = std::make_shared<TreeClassifier>();
    plus->nodes.push_back({-1, 0.0, -1, -1, +1.0});
    auto minus = std::make_shared<TreeClassifier>();
    minus->nodes.push_back({-1, 0.0, -1, -1, -1.0});

    auto forest = std::make_shared<ForestClassifier>();
    forest->trees = {plus, minus};

    TrainedModel model;
    model.kind = "forest";
    model.dimension = Dimension::Processing;
    model.feature_names = kNames1;
    model.classifier = forest;

    CHECK(model.decision_value({0.0}) == 0.0);
    CHECK(model.predict_one({0.0}) == +1);
}

TEST_CASE("forests are deterministic in their seed") {
    Rng rng(23);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    make_clouds(rng, 15, 3, 0.6, x, y);

    ForestConfig cfg;
    cfg.n_trees = 7;
    cfg.seed = 42;
    TrainedModel a = fit_random_forest(x, y, {"a", "b", "c"}, Dimension::Input, cfg);
    TrainedModel b = fit_random_forest(x, y, {"a", "b", "c"}, Dimension::Input, cfg);
    CHECK(a.to_json() == b.to_json());

    ForestConfig empty;
    empty.n_trees = 0;
    CHECK_THROWS_AS(fit_random_forest(x, y, {"a", "b", "c"}, Dimension::Input, empty),
                    ConfigError);
}

TEST_CASE("the analytic MLP gradient matches central finite differences") {
    Rng rng(31);
    std::size_t d = 3, h = 4, n = 8;
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(d);
        for (auto& v : row) v = (rng.uniform01() - 0.5) * 2.0;
        x.push_back(row);
        y.push_back(i % 2 == 0 ? +1 : -1);
    }
    MlpParams p;
    p.d = d;
    p.h = h;
    p.w1.resize(h * d);
    p.b1.resize(h);
    p.w2.resize(h);
    std::vector<double> flat(p.size());
    for (auto& v : flat) v = rng.uniform01() - 0.5;
    p = MlpParams::unflatten(d, h, flat);

    std::vector<double> analytic = mlp_grad(p, x, y);
    REQUIRE(analytic.size() == p.size());

    const double step = 1e-5;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        std::vector<double> lo = flat, hi = flat;
        lo[i] -= step;
        hi[i] += step;
        double numeric = (mlp_loss(MlpParams::unflatten(d, h, hi), x, y) -
                          mlp_loss(MlpParams::unflatten(d, h, lo), x, y)) /
                         (2.0 * step);
        CHECK(std::abs(analytic[i] - numeric) < 1e-4);
    }
}

TEST_CASE("zero training epochs leave the seeded initialization untouched") {
    std::vector<std::vector<double>> x{{0.0, 1.0}, {1.0, 0.0}, {2.0, 2.0}, {3.0, 1.0}};
    std::vector<int> y{+1, -1, +1, -1};
    MlpConfig cfg;
    cfg.hidden = 3;
    cfg.epochs = 0;
    cfg.seed = 99;
    TrainedModel model = fit_mlp(x, y, kNames2, Dimension::Processing, cfg);

    auto* mlp = dynamic_cast<const MlpClassifier*>(model.classifier.get());
    REQUIRE(mlp != nullptr);

    Rng rng(cfg.seed);
    for (double w : mlp->params.w1) CHECK(w == rng.uniform01() - 0.5);
    for (double b : mlp->params.b1) CHECK(b == rng.uniform01() - 0.5);
    for (double w : mlp->params.w2) CHECK(w == rng.uniform01() - 0.5);
    CHECK(mlp->params.b2 == rng.uniform01() - 0.5);
}

TEST_CASE("MLP training lowers the loss and separates easy clouds") {
    Rng rng(41);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    make_clouds(rng, 15, 2, 2.0, x, y);

    MlpConfig init_only;
    init_only.epochs = 0;
    TrainedModel start = fit_mlp(x, y, kNames2, Dimension::Processing, init_only);
    TrainedModel trained = fit_mlp(x, y, kNames2, Dimension::Processing, {});

    Standardization stand = Standardization::fit(x);
    std::vector<std::vector<double>> z;
    for (const auto& row : x) z.push_back(stand.apply(row));
    auto params_of = [](const TrainedModel& m) {
        return dynamic_cast<const MlpClassifier*>(m.classifier.get())->params;
    };
    CHECK(mlp_loss(params_of(trained), z, y) < mlp_loss(params_of(start), z, y));

    std::size_t correct = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (trained.predict_one(x[i]) == y[i]) ++correct;
    CHECK(correct == x.size());

    TrainedModel again = fit_mlp(x, y, kNames2, Dimension::Processing, {});
    CHECK(again.to_json() == trained.to_json());
}

TEST_CASE("an absurd learning rate raises NumericError instead of NaN output") {
    Rng rng(43);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    make_clouds(rng, 10, 2, 0.5, x, y);

    MlpConfig cfg;
    cfg.learning_rate = 1e308;
    cfg.epochs = 200;
    CHECK_THROWS_AS(fit_mlp(x, y, kNames2, Dimension::Processing, cfg), NumericError);
}

TEST_CASE("decision_value names both widths on a feature mismatch") {
    TrainedModel model =
        fit_naive_bayes({{1.0, 2.0}, {3.0, 1.0}}, {+1, -1}, kNames2, Dimension::Processing, {});
    CHECK_THROWS_WITH_AS(model.decision_value({1.0, 2.0, 3.0}),
                         "model expects 2 features, got 3", DataError);
}

TEST_CASE("every model kind survives a JSON round-trip with identical scores") {
    Rng rng(55);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    make_clouds(rng, 10, 2, 0.8, x, y);

    MlpConfig small_mlp;
    small_mlp.hidden = 4;
    small_mlp.epochs = 50;
    std::vector<TrainedModel> models{
        fit_svm(x, y, kNames2, Dimension::Processing, {}),
        fit_naive_bayes(x, y, kNames2, Dimension::Input, {}),
        fit_tree_c45(x, y, kNames2, Dimension::Perception, {}),
        fit_random_forest(x, y, kNames2, Dimension::Understanding, {}),
        fit_mlp(x, y, kNames2, Dimension::Processing, small_mlp)};

    for (const auto& model : models) {
        CAPTURE(model.kind);
        TrainedModel back = TrainedModel::from_json(model.to_json());
        CHECK(back.to_json() == model.to_json());
        for (const auto& row : x) CHECK(back.decision_value(row) == model.decision_value(row));

        std::string path = "roundtrip_" + model.kind + ".json";
        model.save(path);
        TrainedModel loaded = TrainedModel::load(path);
        CHECK(loaded.to_json() == model.to_json());
        std::remove(path.c_str());
    }

    auto preds = models[0].predict(x);
    REQUIRE(preds.poles.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(preds.poles[i] == (preds.scores[i] >= 0.0 ? +1 : -1));
}

TEST_CASE("model files with bad kind or schema version are rejected") {
    TrainedModel model =
        fit_naive_bayes({{1.0}, {2.0}}, {+1, -1}, kNames1, Dimension::Processing, {});

    nlohmann::json bad_kind = model.to_json();
    bad_kind["kind"] = "perceptron";
    CHECK_THROWS_AS(TrainedModel::from_json(bad_kind), DataError);

    nlohmann::json bad_version = model.to_json();
    bad_version["schema_version"] = 99;
    CHECK_THROWS_AS(TrainedModel::from_json(bad_version), DataError);

    CHECK_THROWS_AS(TrainedModel::from_json(nlohmann::json::object()), DataError);
    CHECK_THROWS_AS(TrainedModel::load("no_such_model_file.json"), DataError);
}

TEST_CASE("TrainConfig validates kinds and round-trips through JSON") {
    TrainConfig cfg;
    cfg.kind = "forest";
    cfg.forest.n_trees = 9;
    cfg.forest.seed = 5;
    cfg.svm.kernel = Kernel::Rbf;
    cfg.svm.gamma = 0.25;
    cfg.validate();
    CHECK(TrainConfig::from_json(cfg.to_json()).to_json() == cfg.to_json());

    TrainConfig bad = cfg;
    bad.kind = "knn";
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    std::vector<std::vector<double>> x{{0.0}, {1.0}, {2.0}, {3.0}};
    std::vector<int> y{+1, +1, -1, -1};
    for (const auto& kind : {"svm", "nb", "tree", "forest", "mlp"}) {
        TrainConfig c;
        c.kind = kind;
        c.mlp.epochs = 10;
        TrainedModel m = fit(x, y, kNames1, Dimension::Processing, c);
        CHECK(m.kind == kind);
    }
}
