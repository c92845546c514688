#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "stylemill/dataset.hpp"
#include "stylemill/errors.hpp"
#include "stylemill/rng.hpp"
#include "stylemill/semisup.hpp"

using namespace stylemill;

namespace {

constexpr Dimension kDim = Dimension::Processing;

// Two clearly separated clouds; labeled pools carry pole-sign scores for kDim.
LearningDataset blob_pool(Rng& rng, std::size_t n_per_class, double sep,
                          const std::string& prefix, bool labeled) {
    LearningDataset ds;
    ds.feature_names = {"f0", "f1"};
    std::size_t k = 0;
    for (int pole : {+1, -1})
        for (std::size_t i = 0; i < n_per_class; ++i, ++k) {
            std::string user = prefix + std::to_string(k);
            ds.rows.push_back({user,
                               {pole * sep + (rng.uniform01() - 0.5) * 2.0,
                                pole * sep + (rng.uniform01() - 0.5) * 2.0}});
            if (labeled) ds.labels_for(kDim).emplace(user, label_from_score(kDim, pole));
        }
    ds.validate();
    return ds;
}

} // namespace

TEST_CASE("self-training labels every unlabeled row and keeps all rows") {
    Rng rng(7);
    LearningDataset labeled = blob_pool(rng, 4, 2.0, "l", true);
    LearningDataset unlabeled = blob_pool(rng, 3, 2.0, "u", false);

    SelfTrainRun run = self_train(labeled, unlabeled, kDim, {}, {});

    CHECK(run.n_labeled == 8);
    CHECK(run.n_unlabeled == 6);
    REQUIRE(run.d_prime.n_rows() == 14);
    REQUIRE(run.provenance.size() == 14);

    // D' is L rows then U rows, with provenance aligned.
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(run.d_prime.rows[i].user_id == labeled.rows[i].user_id);
        CHECK(run.provenance[i] == Provenance::Original);
    }
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(run.d_prime.rows[8 + i].user_id == unlabeled.rows[i].user_id);
        CHECK(run.provenance[8 + i] == Provenance::SelfTaught);
    }

    // Everything is labeled afterwards; self-taught labels are pole signs
    // (strength 1) straight from the labeling model.
    const auto& labels = run.d_prime.labels_for(kDim);
    CHECK(labels.size() == 14);
    for (const auto& row : unlabeled.rows) {
        const DimensionLabel& lab = labels.at(row.user_id);
        CHECK(std::abs(lab.score) == 1);
        CHECK(lab.pole_sign() == run.labeling_model.predict_one(row.counts));
    }
    // Original labels pass through untouched.
    for (const auto& [user, lab] : labeled.labels_for(kDim))
        CHECK(labels.at(user).score == lab.score);

    CHECK(run.labeling_model.kind == "svm");
    CHECK(run.final_model.kind == "svm");
}

TEST_CASE("with an empty unlabeled pool the final model is the supervised fit") {
    Rng rng(9);
    LearningDataset labeled = blob_pool(rng, 5, 1.5, "l", true);
    LearningDataset empty;
    empty.feature_names = labeled.feature_names;

    TrainConfig final_cfg;
    final_cfg.kind = "nb";
    SelfTrainRun run = self_train(labeled, empty, kDim, {}, final_cfg);

    CHECK(run.n_unlabeled == 0);
    CHECK(run.d_prime.n_rows() == labeled.n_rows());
    TrainedModel plain = fit(labeled, kDim, final_cfg);
    CHECK(run.final_model.to_json() == plain.to_json());
}

TEST_CASE("labels carried for other dimensions survive into D-prime") {
    Rng rng(11);
    LearningDataset labeled = blob_pool(rng, 3, 2.0, "l", true);
    labeled.labels_for(Dimension::Input)
        .emplace(labeled.rows[0].user_id, label_from_score(Dimension::Input, 5));
    LearningDataset unlabeled = blob_pool(rng, 2, 2.0, "u", false);
    unlabeled.labels_for(Dimension::Input)
        .emplace(unlabeled.rows[0].user_id, label_from_score(Dimension::Input, -7));

    SelfTrainRun run = self_train(labeled, unlabeled, kDim, {}, {});
    CHECK(run.d_prime.labels_for(Dimension::Input).at(labeled.rows[0].user_id).score == 5);
    CHECK(run.d_prime.labels_for(Dimension::Input).at(unlabeled.rows[0].user_id).score == -7);
}

TEST_CASE("the leakage firewall and schema checks reject bad pools") {
    Rng rng(13);
    LearningDataset labeled = blob_pool(rng, 3, 2.0, "l", true);
    LearningDataset unlabeled = blob_pool(rng, 2, 2.0, "u", false);

    LearningDataset leaky = unlabeled;
    leaky.labels_for(kDim).emplace(leaky.rows[0].user_id, label_from_score(kDim, 1));
    CHECK_THROWS_AS(self_train(labeled, leaky, kDim, {}, {}), DataError);
    CHECK_THROWS_AS(tri_train(labeled, leaky, kDim, {}, 1), DataError);

    LearningDataset wrong_schema = unlabeled;
    wrong_schema.feature_names = {"f0", "other"};
    CHECK_THROWS_AS(self_train(labeled, wrong_schema, kDim, {}, {}), DataError);

    LearningDataset gappy = labeled;
    gappy.labels_for(kDim).erase(gappy.rows[0].user_id);
    CHECK_THROWS_AS(self_train(gappy, unlabeled, kDim, {}, {}), DataError);

    LearningDataset one_sided = labeled;
    for (auto& [user, lab] : one_sided.labels_for(kDim)) lab = label_from_score(kDim, 1);
    CHECK_THROWS_AS(self_train(one_sided, unlabeled, kDim, {}, {}), DataError);
}

TEST_CASE("a self-train run round-trips through JSON and disk") {
    Rng rng(17);
    LearningDataset labeled = blob_pool(rng, 4, 2.0, "l", true);
    LearningDataset unlabeled = blob_pool(rng, 2, 2.0, "u", false);
    SelfTrainRun run = self_train(labeled, unlabeled, kDim, {}, {});

    SelfTrainRun back = SelfTrainRun::from_json(run.to_json());
    CHECK(back.to_json() == run.to_json());
    CHECK(back.n_labeled == run.n_labeled);
    CHECK(back.provenance == run.provenance);

    const char* path = "selftrain_roundtrip.json";
    run.save(path);
    SelfTrainRun loaded = SelfTrainRun::load(path);
    CHECK(loaded.to_json() == run.to_json());
    std::remove(path);

    nlohmann::json corrupt = run.to_json();
    corrupt["provenance"][0] = "psychic";
    CHECK_THROWS_AS(SelfTrainRun::from_json(corrupt), DataError);
    CHECK_THROWS_AS(SelfTrainRun::load("no_such_run.json"), DataError);
}

TEST_CASE("self-training is deterministic") {
    Rng rng(19);
    LearningDataset labeled = blob_pool(rng, 5, 0.8, "l", true);
    LearningDataset unlabeled = blob_pool(rng, 4, 0.8, "u", false);

    SelfTrainRun a = self_train(labeled, unlabeled, kDim, {}, {});
    SelfTrainRun b = self_train(labeled, unlabeled, kDim, {}, {});
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("tri-training returns a three-member vote that is seed-deterministic") {
    Rng rng(23);
    LearningDataset labeled = blob_pool(rng, 6, 1.5, "l", true);
    LearningDataset unlabeled = blob_pool(rng, 8, 1.5, "u", false);

    TriTrainConfig cfg;
    cfg.base[0].kind = "svm";
    cfg.base[1].kind = "nb";
    cfg.base[2].kind = "tree";

    TrainedModel tri = tri_train(labeled, unlabeled, kDim, cfg, 5);
    CHECK(tri.kind == "tri");
    CHECK_FALSE(tri.standardization.has_value()); // members standardize themselves

    auto* vote = dynamic_cast<const VoteClassifier*>(tri.classifier.get());
    REQUIRE(vote != nullptr);
    REQUIRE(vote->members.size() == 3);
    CHECK(vote->members[0].kind == "svm");
    CHECK(vote->members[1].kind == "nb");
    CHECK(vote->members[2].kind == "tree");

    TrainedModel again = tri_train(labeled, unlabeled, kDim, cfg, 5);
    CHECK(again.to_json() == tri.to_json());

    // Far from the boundary all three members agree with the true pole.
    CHECK(tri.predict_one({+1.5, +1.5}) == +1);
    CHECK(tri.predict_one({-1.5, -1.5}) == -1);

    TrainedModel reloaded = TrainedModel::from_json(tri.to_json());
    CHECK(reloaded.to_json() == tri.to_json());
    CHECK(reloaded.predict_one({+1.5, +1.5}) == +1);
}

TEST_CASE("tri-training degenerates gracefully without unlabeled rows") {
    Rng rng(29);
    LearningDataset labeled = blob_pool(rng, 5, 1.5, "l", true);
    LearningDataset empty;
    empty.feature_names = labeled.feature_names;

    TriTrainConfig cfg;
    cfg.bootstrap = false; // identical members trained on L alone
    TrainedModel tri = tri_train(labeled, empty, kDim, cfg, 3);

    auto* vote = dynamic_cast<const VoteClassifier*>(tri.classifier.get());
    REQUIRE(vote != nullptr);
    CHECK(vote->members[0].to_json() == vote->members[1].to_json());
    CHECK(vote->members[1].to_json() == vote->members[2].to_json());
    for (const auto& row : labeled.rows)
        CHECK(tri.predict_one(row.counts) == vote->members[0].predict_one(row.counts));
}

TEST_CASE("tri-training rejects a zero round budget") {
    Rng rng(31);
    LearningDataset labeled = blob_pool(rng, 4, 1.5, "l", true);
    LearningDataset unlabeled = blob_pool(rng, 2, 1.5, "u", false);
    TriTrainConfig cfg;
    cfg.max_rounds = 0;
    CHECK_THROWS_AS(tri_train(labeled, unlabeled, kDim, cfg, 1), ConfigError);
}
