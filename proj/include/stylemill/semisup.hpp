#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "stylemill/dataset.hpp"
#include "stylemill/dimension.hpp"
#include "stylemill/learners.hpp"

namespace stylemill {

enum class Provenance { Original, SelfTaught };

const std::string& provenance_name(Provenance p);

// One-pass self-training: an SVM fit on L labels all of U; the union D'
// then trains the final supervised model. No iteration, no confidence
// filtering, every unlabeled row gets a label.
struct SelfTrainRun {
    TrainedModel labeling_model;
    TrainedModel final_model;
    LearningDataset d_prime;               // L rows then U rows
    std::vector<Provenance> provenance;    // aligned with d_prime.rows
    std::size_t n_labeled = 0;             // |L|
    std::size_t n_unlabeled = 0;           // |U|

    nlohmann::json to_json() const;
    static SelfTrainRun from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static SelfTrainRun load(const std::string& path);
};

// L must carry both poles for `dim`; U must carry no labels for `dim` at all
// (the withheld-truth firewall), and both must share L's feature schema.
SelfTrainRun self_train(const LearningDataset& labeled, const LearningDataset& unlabeled,
                        Dimension dim, const SvmConfig& labeling_config,
                        const TrainConfig& final_config);

struct TriTrainConfig {
    std::array<TrainConfig, 3> base;
    bool bootstrap = true;
    std::size_t max_rounds = 100;
};

// Tri-training (Zhou & Li, 2005): three learners start from bootstrap
// samples of L; each round, every learner receives the U rows its two peers
// agree on, gated by the falling-error acceptance rule; stops when no
// learner changes. Returns a majority-vote model (kind "tri").
TrainedModel tri_train(const LearningDataset& labeled, const LearningDataset& unlabeled,
                       Dimension dim, const TriTrainConfig& cfg, std::uint64_t seed);

} // namespace stylemill
