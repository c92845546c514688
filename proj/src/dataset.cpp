#include "stylemill/dataset.hpp"

#include <fstream>
#include <set>

#include "stylemill/errors.hpp"

namespace stylemill {

void LearningDataset::validate() const {
    std::set<std::string> seen;
    for (const auto& row : rows) {
        if (row.user_id.empty()) throw DataError("dataset row with empty user id");
        if (!seen.insert(row.user_id).second) {
            throw DataError("duplicate user id in dataset: " + row.user_id);
        }
        if (row.counts.size() != feature_names.size()) {
            throw DataError("row for " + row.user_id + " has " +
                            std::to_string(row.counts.size()) + " values, expected " +
                            std::to_string(feature_names.size()));
        }
    }
    for (Dimension d : kAllDimensions) {
        for (const auto& [user, label] : labels_for(d)) {
            if (!seen.count(user)) {
                throw DataError("label for unknown user '" + user + "' in dimension " +
                                dimension_name(d));
            }
            if (label.dimension != d) {
                throw DataError("label stored under wrong dimension for user " + user);
            }
        }
    }
}

nlohmann::json LearningDataset::to_json() const {
    nlohmann::json j;
    j["schema_version"] = kDatasetSchemaVersion;
    j["feature_names"] = feature_names;
    nlohmann::json jrows = nlohmann::json::array();
    for (const auto& row : rows) {
        jrows.push_back({{"user", row.user_id}, {"counts", row.counts}});
    }
    j["rows"] = std::move(jrows);
    nlohmann::json jlabels;
    for (Dimension d : kAllDimensions) {
        nlohmann::json per;
        for (const auto& [user, label] : labels_for(d)) {
            per[user] = {{"score", label.score},
                         {"pole", label.pole_name()},
                         {"strength", strength_name(label.strength())}};
        }
        jlabels[dimension_name(d)] = std::move(per);
    }
    j["labels"] = std::move(jlabels);
    return j;
}

LearningDataset LearningDataset::from_json(const nlohmann::json& j) {
    LearningDataset ds;
    if (j.value("schema_version", 0) != kDatasetSchemaVersion) {
        throw DataError("unsupported dataset schema version");
    }
    ds.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& jrow : j.at("rows")) {
        DatasetRow row;
        row.user_id = jrow.at("user").get<std::string>();
        row.counts = jrow.at("counts").get<std::vector<double>>();
        ds.rows.push_back(std::move(row));
    }
    if (j.contains("labels")) {
        for (Dimension d : kAllDimensions) {
            const auto& per = j.at("labels");
            if (!per.contains(dimension_name(d))) continue;
            for (const auto& [user, jlabel] : per.at(dimension_name(d)).items()) {
                ds.labels_for(d)[user] = label_from_score(d, jlabel.at("score").get<int>());
            }
        }
    }
    ds.validate();
    return ds;
}

void LearningDataset::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write dataset file: " + path);
    out << to_json().dump(2) << "\n";
}

LearningDataset LearningDataset::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read dataset file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("invalid dataset JSON in " + path + ": " + e.what());
    }
    return from_json(j);
}

std::vector<std::size_t> labeled_row_indices(const LearningDataset& ds, Dimension d) {
    std::vector<std::size_t> out;
    const auto& map = ds.labels_for(d);
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        if (map.count(ds.rows[i].user_id)) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> unlabeled_row_indices(const LearningDataset& ds, Dimension d) {
    std::vector<std::size_t> out;
    const auto& map = ds.labels_for(d);
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        if (!map.count(ds.rows[i].user_id)) out.push_back(i);
    }
    return out;
}

LearningDataset restrict_rows(const LearningDataset& ds, const std::vector<std::size_t>& indices) {
    LearningDataset out;
    out.feature_names = ds.feature_names;
    for (std::size_t i : indices) {
        if (i >= ds.rows.size()) throw DataError("row index out of range in restrict_rows");
        out.rows.push_back(ds.rows[i]);
    }
    for (Dimension d : kAllDimensions) {
        const auto& src = ds.labels_for(d);
        auto& dst = out.labels_for(d);
        for (const auto& row : out.rows) {
            auto it = src.find(row.user_id);
            if (it != src.end()) dst.emplace(*it);
        }
    }
    return out;
}

LabeledMatrix labeled_matrix(const LearningDataset& ds, Dimension d) {
    LabeledMatrix m;
    const auto& map = ds.labels_for(d);
    for (const auto& row : ds.rows) {
        auto it = map.find(row.user_id);
        if (it == map.end()) continue;
        m.x.push_back(row.counts);
        m.y.push_back(it->second.pole_sign());
        m.user_ids.push_back(row.user_id);
    }
    return m;
}

} // namespace stylemill
