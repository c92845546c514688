#include "stylemill/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "stylemill/errors.hpp"
#include "stylemill/rng.hpp"

namespace stylemill {

namespace {

std::size_t round_half_up(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

// Splits `indices` by pole for `dim`, preserving order.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
by_pole(const LearningDataset& ds, Dimension dim, const std::vector<std::size_t>& indices) {
    const auto& labels = ds.labels_for(dim);
    std::vector<std::size_t> first, second;
    for (std::size_t i : indices) {
        const DimensionLabel& label = labels.at(ds.rows[i].user_id);
        (label.first_pole() ? first : second).push_back(i);
    }
    return {std::move(first), std::move(second)};
}

} // namespace

LearningDataset under_sample(const LearningDataset& ds, Dimension dim, std::uint64_t seed) {
    if (ds.rows.empty()) throw DataError("cannot under-sample an empty dataset");
    const auto& labels = ds.labels_for(dim);
    for (const auto& row : ds.rows)
        if (!labels.count(row.user_id))
            throw DataError("cannot under-sample: row for user '" + row.user_id +
                            "' is unlabeled for dimension " + dimension_name(dim));

    std::vector<std::size_t> all(ds.rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto [first, second] = by_pole(ds, dim, all);
    if (first.empty() || second.empty())
        throw DataError("cannot balance a single class (dimension " + dimension_name(dim) + ")");

    std::size_t target = std::min(first.size(), second.size());
    Rng rng(seed);
    auto pick = [&](std::vector<std::size_t>& pool) {
        if (pool.size() > target) {
            rng.shuffle(pool);
            pool.resize(target);
        }
    };
    // Majority first so an already balanced input consumes no randomness.
    if (first.size() >= second.size()) {
        pick(first);
        pick(second);
    } else {
        pick(second);
        pick(first);
    }

    std::vector<std::size_t> keep;
    keep.reserve(2 * target);
    keep.insert(keep.end(), first.begin(), first.end());
    keep.insert(keep.end(), second.begin(), second.end());
    std::sort(keep.begin(), keep.end());
    return restrict_rows(ds, keep);
}

SplitResult split_labeled_unlabeled(const LearningDataset& ds, Dimension dim, double ratio,
                                    std::uint64_t seed, bool stratified) {
    if (!(ratio > 0.0) || ratio > 1.0)
        throw ConfigError("labeled ratio must lie in (0, 1], got " + std::to_string(ratio));
    std::vector<std::size_t> labeled = labeled_row_indices(ds, dim);
    if (labeled.empty())
        throw DataError("dataset has no labeled rows for dimension " + dimension_name(dim));

    std::size_t n_lab = labeled.size();
    std::size_t total = round_half_up(ratio * static_cast<double>(n_lab));
    if (total == 0)
        throw DataError("labeled ratio " + std::to_string(ratio) + " keeps zero of " +
                        std::to_string(n_lab) + " labeled rows");
    if (total > n_lab) total = n_lab;

    Rng rng(seed);
    std::vector<std::size_t> kept;
    if (stratified) {
        auto [first, second] = by_pole(ds, dim, labeled);
        std::array<std::vector<std::size_t>*, 2> pools = {&first, &second};
        // Largest-remainder apportionment of the kept quota over the poles.
        std::array<double, 2> exact{};
        std::array<std::size_t, 2> quota{};
        for (int c = 0; c < 2; ++c) {
            exact[c] = static_cast<double>(total) * static_cast<double>(pools[c]->size()) /
                       static_cast<double>(n_lab);
            quota[c] = static_cast<std::size_t>(std::floor(exact[c]));
        }
        std::size_t assigned = quota[0] + quota[1];
        std::array<int, 2> order = {0, 1};
        if (exact[1] - std::floor(exact[1]) > exact[0] - std::floor(exact[0])) order = {1, 0};
        for (int c : order) {
            if (assigned == total) break;
            if (quota[c] < pools[c]->size()) {
                ++quota[c];
                ++assigned;
            }
        }
        // A quota can hit its pool's ceiling; spill the remainder over.
        for (int c : {0, 1}) {
            int other = 1 - c;
            while (assigned < total && quota[c] < pools[c]->size() &&
                   quota[other] >= pools[other]->size()) {
                ++quota[c];
                ++assigned;
            }
        }
        for (int c : {0, 1}) {
            rng.shuffle(*pools[c]);
            kept.insert(kept.end(), pools[c]->begin(),
                        pools[c]->begin() + static_cast<std::ptrdiff_t>(quota[c]));
        }
    } else {
        rng.shuffle(labeled);
        kept.assign(labeled.begin(), labeled.begin() + static_cast<std::ptrdiff_t>(total));
    }
    std::sort(kept.begin(), kept.end());

    std::vector<bool> keep_flag(ds.rows.size(), false);
    for (std::size_t i : kept) keep_flag[i] = true;
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < ds.rows.size(); ++i)
        if (!keep_flag[i]) pool.push_back(i);

    SplitResult result;
    result.labeled = restrict_rows(ds, kept);
    result.unlabeled = restrict_rows(ds, pool);

    // Hide the freshly moved rows' truth on the withheld channel.
    auto& hidden = result.unlabeled.labels[dimension_index(dim)];
    for (const auto& [user, label] : hidden) result.withheld.emplace(user, label);
    hidden.clear();
    return result;
}

std::vector<std::vector<std::size_t>> FoldPlan::fold_indices() const {
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t i = 0; i < assignments.size(); ++i) folds[assignments[i]].push_back(i);
    return folds;
}

nlohmann::json FoldPlan::to_json() const {
    return {{"k", k}, {"assignments", assignments}};
}

namespace {

FoldPlan deal_folds(std::size_t n_rows, std::size_t k,
                    const std::vector<std::vector<std::size_t>>& groups, Rng& rng) {
    FoldPlan plan;
    plan.k = k;
    plan.assignments.assign(n_rows, 0);
    // Deal each group round-robin; the fold cursor carries over between
    // groups so overall fold sizes stay within one of each other.
    std::size_t cursor = 0;
    for (auto members : groups) {
        rng.shuffle(members);
        for (std::size_t i : members) plan.assignments[i] = cursor++ % k;
    }
    return plan;
}

void check_fold_args(std::size_t n_rows, std::size_t k) {
    if (k < 2) throw ConfigError("k-fold requires k >= 2, got " + std::to_string(k));
    if (n_rows < k)
        throw DataError("cannot make " + std::to_string(k) + " folds from " +
                        std::to_string(n_rows) + " rows");
}

} // namespace

FoldPlan make_folds(std::size_t n_rows, std::size_t k, std::uint64_t seed) {
    check_fold_args(n_rows, k);
    std::vector<std::size_t> all(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) all[i] = i;
    Rng rng(seed);
    return deal_folds(n_rows, k, {all}, rng);
}

FoldPlan make_folds(const std::vector<int>& labels, std::size_t k, std::uint64_t seed) {
    check_fold_args(labels.size(), k);
    // Group rows by class value in first-appearance order.
    std::vector<int> class_values;
    std::vector<std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = std::find(class_values.begin(), class_values.end(), labels[i]);
        if (it == class_values.end()) {
            class_values.push_back(labels[i]);
            by_class.emplace_back();
            it = class_values.end() - 1;
        }
        by_class[static_cast<std::size_t>(it - class_values.begin())].push_back(i);
    }
    Rng rng(seed);
    return deal_folds(labels.size(), k, by_class, rng);
}

} // namespace stylemill
