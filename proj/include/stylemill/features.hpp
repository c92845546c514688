#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stylemill/dataset.hpp"
#include "stylemill/dimension.hpp"
#include "stylemill/ingest.hpp"

namespace stylemill {

enum class MatchField { EventName, Component, EventContext };

MatchField match_field_from_name(const std::string& name);
const std::string& match_field_name(MatchField f);

// One event-to-feature rule: case-insensitive substring match on one field.
struct MappingRule {
    MatchField field = MatchField::EventContext;
    std::string contains;
    std::string feature;
};

// Ordered rule list; the first rule that matches an event wins.
struct FeatureMapping {
    std::vector<std::string> feature_names;
    std::vector<MappingRule> rules;

    void validate() const;
    std::size_t feature_index(const std::string& name) const;

    nlohmann::json to_json() const;
    static FeatureMapping from_json(const nlohmann::json& j);
    static FeatureMapping load(const std::string& path);

    // Covers the learning-object kinds common in Moodle exports (video,
    // file/reading, quiz, assignment, course view, URL, interactive content).
    static FeatureMapping default_mapping();
};

struct StudentProfile {
    std::string user_id;
    std::vector<std::uint64_t> counts; // aligned with mapping.feature_names
    std::uint64_t unmapped_events = 0;
};

// One profile per distinct user, in first-appearance order.
std::vector<StudentProfile> build_profiles(const std::vector<EventRecord>& records,
                                           const FeatureMapping& mapping);

// A completed 44-item a/b questionnaire: 11 items per dimension, grouped in
// dimension order (processing, input, understanding, perception).
struct ILSResponse {
    std::string user_id;
    std::array<char, 44> answers{};
};

// Per-dimension score = (#a - #b) over that dimension's 11 items; always odd.
std::array<int, 4> score_ils(const ILSResponse& response);

// CSV rows of user_id followed by the 44 answers, either as separate fields
// or concatenated into strings totalling 44 characters.
std::vector<ILSResponse> parse_ils_file(std::istream& in);

struct AssembleResult {
    LearningDataset dataset;
    // Labels naming users absent from the profiles, reported not applied.
    std::vector<std::string> rejected_users;
};

AssembleResult assemble_dataset(const std::vector<StudentProfile>& profiles,
                                const std::vector<std::string>& feature_names,
                                const std::vector<std::pair<std::string, DimensionLabel>>& labels);

// Full questionnaire path: score every response and attach the labels.
AssembleResult assemble_dataset_from_ils(const std::vector<StudentProfile>& profiles,
                                         const std::vector<std::string>& feature_names,
                                         const std::vector<ILSResponse>& responses);

} // namespace stylemill
