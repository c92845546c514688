#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "stylemill/dataset.hpp"
#include "stylemill/dimension.hpp"

namespace stylemill {

// Random under-sampling: trim the majority class for `dim` down to the
// minority class size. Every row must carry a label for `dim`.
LearningDataset under_sample(const LearningDataset& ds, Dimension dim, std::uint64_t seed);

struct SplitResult {
    LearningDataset labeled;
    LearningDataset unlabeled;                      // dim labels withheld
    std::map<std::string, DimensionLabel> withheld; // ground truth of the newly hidden rows
};

// Move all but round-half-up(ratio * labeled_count) of the labeled rows into
// the unlabeled pool, hiding their labels for `dim` on the withheld channel.
// The kept quota is stratified over the two poles by largest remainder (when
// `stratified`); membership is drawn with the seeded generator. Rows that
// were already unlabeled stay in the pool with no withheld truth.
SplitResult split_labeled_unlabeled(const LearningDataset& ds, Dimension dim, double ratio,
                                    std::uint64_t seed, bool stratified = true);

// K-fold assignment: fold index per row, sizes differing by at most one.
struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::size_t> assignments; // per-row fold in [0, k)

    std::vector<std::vector<std::size_t>> fold_indices() const;
    nlohmann::json to_json() const;
};

FoldPlan make_folds(std::size_t n_rows, std::size_t k, std::uint64_t seed);

// Stratified variant: each class is dealt round-robin with a cursor that
// carries across classes, so fold sizes stay within one of each other and
// per-fold class counts stay within one of an even spread.
FoldPlan make_folds(const std::vector<int>& labels, std::size_t k, std::uint64_t seed);

} // namespace stylemill
