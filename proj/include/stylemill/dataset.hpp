#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "stylemill/dimension.hpp"

namespace stylemill {

inline constexpr int kDatasetSchemaVersion = 1;

struct DatasetRow {
    std::string user_id;
    std::vector<double> counts;
};

// Feature matrix plus per-dimension partial label maps. Rows without a label
// for a dimension form that dimension's unlabeled pool U; rows with one form L.
struct LearningDataset {
    std::vector<std::string> feature_names;
    std::vector<DatasetRow> rows;
    // Indexed by dimension_index(); keyed by user_id.
    std::array<std::map<std::string, DimensionLabel>, 4> labels;

    const std::map<std::string, DimensionLabel>& labels_for(Dimension d) const {
        return labels[dimension_index(d)];
    }
    std::map<std::string, DimensionLabel>& labels_for(Dimension d) {
        return labels[dimension_index(d)];
    }

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_features() const { return feature_names.size(); }

    // Throws DataError if any invariant is broken (duplicate user ids,
    // ragged rows, labels naming unknown users).
    void validate() const;

    nlohmann::json to_json() const;
    static LearningDataset from_json(const nlohmann::json& j);

    void save(const std::string& path) const;
    static LearningDataset load(const std::string& path);
};

// Indices of rows carrying a label for the dimension, in row order.
std::vector<std::size_t> labeled_row_indices(const LearningDataset& ds, Dimension d);
std::vector<std::size_t> unlabeled_row_indices(const LearningDataset& ds, Dimension d);

// New dataset holding exactly the chosen rows (in the given order) with all
// label maps filtered down to the surviving users.
LearningDataset restrict_rows(const LearningDataset& ds, const std::vector<std::size_t>& indices);

// Feature matrix and +/-1 target vector for one dimension's labeled rows.
struct LabeledMatrix {
    std::vector<std::vector<double>> x;
    std::vector<int> y; // +1 = first pole
    std::vector<std::string> user_ids;
};

LabeledMatrix labeled_matrix(const LearningDataset& ds, Dimension d);

} // namespace stylemill
