#include "stylemill/semisup.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "stylemill/errors.hpp"
#include "stylemill/rng.hpp"

namespace stylemill {

const std::string& provenance_name(Provenance p) {
    static const std::string names[] = {"original-label", "self-taught-label"};
    return names[static_cast<int>(p)];
}

namespace {

void check_schemas(const LearningDataset& labeled, const LearningDataset& unlabeled,
                   Dimension dim) {
    if (labeled.feature_names != unlabeled.feature_names)
        throw DataError("labeled and unlabeled pools disagree on the feature schema");
    // Leakage firewall: the unlabeled pool must not smuggle in the very
    // labels the run is supposed to produce.
    if (!unlabeled.labels_for(dim).empty())
        throw DataError("unlabeled pool already carries labels for dimension " +
                        dimension_name(dim));
    const auto& labels = labeled.labels_for(dim);
    for (const auto& row : labeled.rows)
        if (!labels.count(row.user_id))
            throw DataError("labeled pool row for user '" + row.user_id +
                            "' is unlabeled for dimension " + dimension_name(dim));
}

} // namespace

SelfTrainRun self_train(const LearningDataset& labeled, const LearningDataset& unlabeled,
                        Dimension dim, const SvmConfig& labeling_config,
                        const TrainConfig& final_config) {
    check_schemas(labeled, unlabeled, dim);

    SelfTrainRun run;
    run.n_labeled = labeled.rows.size();
    run.n_unlabeled = unlabeled.rows.size();

    LabeledMatrix lm = labeled_matrix(labeled, dim);
    run.labeling_model = fit_svm(lm.x, lm.y, labeled.feature_names, dim, labeling_config);

    // D' = L rows followed by U rows; U rows get the model's labels.
    run.d_prime.feature_names = labeled.feature_names;
    run.d_prime.rows = labeled.rows;
    run.d_prime.rows.insert(run.d_prime.rows.end(), unlabeled.rows.begin(),
                            unlabeled.rows.end());
    for (Dimension d : kAllDimensions) {
        auto& merged = run.d_prime.labels[dimension_index(d)];
        merged = labeled.labels_for(d);
        for (const auto& [user, label] : unlabeled.labels_for(d)) merged.emplace(user, label);
    }
    auto& dim_labels = run.d_prime.labels[dimension_index(dim)];
    for (const auto& row : unlabeled.rows) {
        int pole = run.labeling_model.predict_one(row.counts);
        dim_labels.emplace(row.user_id, label_from_score(dim, pole)); // score +1 or -1
    }
    run.d_prime.validate();

    run.provenance.assign(run.n_labeled, Provenance::Original);
    run.provenance.insert(run.provenance.end(), run.n_unlabeled, Provenance::SelfTaught);

    run.final_model = fit(run.d_prime, dim, final_config);
    return run;
}

nlohmann::json SelfTrainRun::to_json() const {
    nlohmann::json prov = nlohmann::json::array();
    for (Provenance p : provenance) prov.push_back(provenance_name(p));
    return {{"labeling_model", labeling_model.to_json()},
            {"final_model", final_model.to_json()},
            {"d_prime", d_prime.to_json()},
            {"provenance", prov},
            {"n_labeled", n_labeled},
            {"n_unlabeled", n_unlabeled}};
}

SelfTrainRun SelfTrainRun::from_json(const nlohmann::json& j) {
    SelfTrainRun run;
    try {
        run.labeling_model = TrainedModel::from_json(j.at("labeling_model"));
        run.final_model = TrainedModel::from_json(j.at("final_model"));
        run.d_prime = LearningDataset::from_json(j.at("d_prime"));
        for (const auto& jp : j.at("provenance")) {
            std::string name = jp.get<std::string>();
            if (name == provenance_name(Provenance::Original))
                run.provenance.push_back(Provenance::Original);
            else if (name == provenance_name(Provenance::SelfTaught))
                run.provenance.push_back(Provenance::SelfTaught);
            else throw DataError("unknown provenance flag '" + name + "'");
        }
        run.n_labeled = j.at("n_labeled").get<std::size_t>();
        run.n_unlabeled = j.at("n_unlabeled").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed self-train run file: ") + e.what());
    }
    return run;
}

void SelfTrainRun::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write run file '" + path + "'");
    out << to_json().dump(2) << '\n';
}

SelfTrainRun SelfTrainRun::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open run file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse run file '" + path + "': " + e.what());
    }
    return from_json(j);
}

namespace {

// Bootstrap sample of (x, y) that keeps both classes; the resample guard
// only matters for tiny pools.
void bootstrap_sample(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                      Rng& rng, std::vector<std::vector<double>>& xs, std::vector<int>& ys) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        xs.clear();
        ys.clear();
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            std::size_t pick = static_cast<std::size_t>(rng.bounded(x.size()));
            xs.push_back(x[pick]);
            ys.push_back(y[pick]);
            (y[pick] == +1 ? pos : neg) = true;
        }
        if (pos && neg) return;
    }
    throw DataError("bootstrap sampling could not produce a two-class sample");
}

} // namespace

TrainedModel tri_train(const LearningDataset& labeled, const LearningDataset& unlabeled,
                       Dimension dim, const TriTrainConfig& cfg, std::uint64_t seed) {
    check_schemas(labeled, unlabeled, dim);
    if (cfg.max_rounds < 1) throw ConfigError("tri-training needs at least one round");

    LabeledMatrix lm = labeled_matrix(labeled, dim);
    std::vector<std::vector<double>> ux;
    ux.reserve(unlabeled.rows.size());
    for (const auto& row : unlabeled.rows) ux.push_back(row.counts);

    Rng rng(seed);
    std::array<std::vector<std::vector<double>>, 3> boot_x;
    std::array<std::vector<int>, 3> boot_y;
    std::array<TrainedModel, 3> h;
    for (int i = 0; i < 3; ++i) {
        if (cfg.bootstrap) {
            bootstrap_sample(lm.x, lm.y, rng, boot_x[i], boot_y[i]);
        } else {
            boot_x[i] = lm.x;
            boot_y[i] = lm.y;
        }
        h[i] = fit(boot_x[i], boot_y[i], labeled.feature_names, dim, cfg.base[i]);
    }

    std::array<double, 3> err_prev = {0.5, 0.5, 0.5};
    std::array<std::size_t, 3> size_prev = {0, 0, 0};
    bool converged = false;

    for (std::size_t round = 0; round < cfg.max_rounds && !converged; ++round) {
        std::array<bool, 3> update = {false, false, false};
        std::array<double, 3> err = err_prev;
        std::array<std::vector<std::size_t>, 3> picked; // U indices per learner
        std::array<std::vector<int>, 3> pseudo;

        for (int i = 0; i < 3; ++i) {
            int j = (i + 1) % 3, k = (i + 2) % 3;
            // Error of the (h_j, h_k) agreement on the labeled set.
            std::size_t agree = 0, wrong = 0;
            for (std::size_t r = 0; r < lm.x.size(); ++r) {
                int pj = h[j].predict_one(lm.x[r]);
                if (pj != h[k].predict_one(lm.x[r])) continue;
                ++agree;
                if (pj != lm.y[r]) ++wrong;
            }
            if (agree == 0) continue;
            err[i] = static_cast<double>(wrong) / static_cast<double>(agree);
            if (!(err[i] < err_prev[i])) continue;

            for (std::size_t u = 0; u < ux.size(); ++u) {
                int pj = h[j].predict_one(ux[u]);
                if (pj != h[k].predict_one(ux[u])) continue;
                picked[i].push_back(u);
                pseudo[i].push_back(pj);
            }
            if (size_prev[i] == 0)
                size_prev[i] =
                    static_cast<std::size_t>(std::floor(err[i] / (err_prev[i] - err[i]))) + 1;
            if (size_prev[i] >= picked[i].size()) continue;

            if (err[i] * static_cast<double>(picked[i].size()) <
                err_prev[i] * static_cast<double>(size_prev[i])) {
                update[i] = true;
            } else if (static_cast<double>(size_prev[i]) > err[i] / (err_prev[i] - err[i])) {
                // Subsample so the Zhou-Li error bound still shrinks.
                std::size_t target = static_cast<std::size_t>(
                    std::ceil(err_prev[i] * static_cast<double>(size_prev[i]) / err[i] - 1.0));
                std::vector<std::size_t> chosen =
                    rng.sample_without_replacement(picked[i].size(), target);
                std::sort(chosen.begin(), chosen.end());
                std::vector<std::size_t> sub_idx;
                std::vector<int> sub_lab;
                for (std::size_t c : chosen) {
                    sub_idx.push_back(picked[i][c]);
                    sub_lab.push_back(pseudo[i][c]);
                }
                picked[i] = std::move(sub_idx);
                pseudo[i] = std::move(sub_lab);
                update[i] = true;
            }
        }

        bool any = false;
        for (int i = 0; i < 3; ++i) {
            if (!update[i]) continue;
            any = true;
            std::vector<std::vector<double>> xs = boot_x[i];
            std::vector<int> ys = boot_y[i];
            for (std::size_t c = 0; c < picked[i].size(); ++c) {
                xs.push_back(ux[picked[i][c]]);
                ys.push_back(pseudo[i][c]);
            }
            h[i] = fit(xs, ys, labeled.feature_names, dim, cfg.base[i]);
            err_prev[i] = err[i];
            size_prev[i] = picked[i].size();
        }
        converged = !any;
    }

    auto vote = std::make_shared<VoteClassifier>();
    vote->members = {h[0], h[1], h[2]};

    TrainedModel model;
    model.kind = "tri";
    model.dimension = dim;
    model.feature_names = labeled.feature_names;
    model.converged = converged;
    model.classifier = vote;
    return model;
}

} // namespace stylemill
