#include "stylemill/features.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "stylemill/csv.hpp"
#include "stylemill/errors.hpp"

namespace stylemill {

namespace {

std::string lower_copy(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool contains_ci(const std::string& haystack, const std::string& needle_lower) {
    if (needle_lower.empty()) return true;
    return lower_copy(haystack).find(needle_lower) != std::string::npos;
}

} // namespace

MatchField match_field_from_name(const std::string& name) {
    if (name == "event_name") return MatchField::EventName;
    if (name == "component") return MatchField::Component;
    if (name == "event_context") return MatchField::EventContext;
    throw ConfigError("unknown mapping field '" + name +
                      "' (expected event_name, component, or event_context)");
}

const std::string& match_field_name(MatchField f) {
    static const std::string names[] = {"event_name", "component", "event_context"};
    return names[static_cast<int>(f)];
}

void FeatureMapping::validate() const {
    if (feature_names.empty()) throw ConfigError("feature mapping declares no features");
    std::unordered_set<std::string> seen;
    for (const auto& name : feature_names) {
        if (name.empty()) throw ConfigError("feature mapping contains an empty feature name");
        if (!seen.insert(name).second)
            throw ConfigError("duplicate feature name '" + name + "' in mapping");
    }
    if (rules.empty()) throw ConfigError("feature mapping declares no rules");
    for (const auto& rule : rules) {
        if (rule.contains.empty())
            throw ConfigError("mapping rule for feature '" + rule.feature +
                              "' has an empty match string");
        if (!seen.count(rule.feature))
            throw ConfigError("mapping rule targets undeclared feature '" + rule.feature + "'");
    }
}

std::size_t FeatureMapping::feature_index(const std::string& name) const {
    auto it = std::find(feature_names.begin(), feature_names.end(), name);
    if (it == feature_names.end())
        throw ConfigError("unknown feature '" + name + "'");
    return static_cast<std::size_t>(it - feature_names.begin());
}

nlohmann::json FeatureMapping::to_json() const {
    nlohmann::json j;
    j["features"] = feature_names;
    j["rules"] = nlohmann::json::array();
    for (const auto& rule : rules) {
        j["rules"].push_back({{"field", match_field_name(rule.field)},
                              {"contains", rule.contains},
                              {"feature", rule.feature}});
    }
    return j;
}

FeatureMapping FeatureMapping::from_json(const nlohmann::json& j) {
    FeatureMapping m;
    try {
        m.feature_names = j.at("features").get<std::vector<std::string>>();
        for (const auto& jr : j.at("rules")) {
            MappingRule rule;
            rule.field = match_field_from_name(jr.at("field").get<std::string>());
            rule.contains = jr.at("contains").get<std::string>();
            rule.feature = jr.at("feature").get<std::string>();
            m.rules.push_back(std::move(rule));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed feature mapping: ") + e.what());
    }
    m.validate();
    return m;
}

FeatureMapping FeatureMapping::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open feature mapping '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse feature mapping '" + path + "': " + e.what());
    }
    return from_json(j);
}

FeatureMapping FeatureMapping::default_mapping() {
    FeatureMapping m;
    m.feature_names = {"video", "reading", "quiz", "assignment", "course_view", "url", "h5p"};
    auto rule = [](MatchField f, const char* contains, const char* feature) {
        return MappingRule{f, contains, feature};
    };
    m.rules = {
        rule(MatchField::Component, "h5p", "h5p"),
        rule(MatchField::Component, "interactive content", "h5p"),
        rule(MatchField::Component, "quiz", "quiz"),
        rule(MatchField::Component, "assignment", "assignment"),
        rule(MatchField::Component, "assign", "assignment"),
        rule(MatchField::Component, "url", "url"),
        rule(MatchField::Component, "file", "reading"),
        rule(MatchField::Component, "folder", "reading"),
        rule(MatchField::Component, "page", "reading"),
        rule(MatchField::Component, "book", "reading"),
        rule(MatchField::EventContext, "video", "video"),
        rule(MatchField::EventName, "course viewed", "course_view"),
        rule(MatchField::Component, "system", "course_view"),
    };
    m.validate();
    return m;
}

std::vector<StudentProfile> build_profiles(const std::vector<EventRecord>& records,
                                           const FeatureMapping& mapping) {
    mapping.validate();
    std::vector<std::size_t> rule_targets;
    rule_targets.reserve(mapping.rules.size());
    std::vector<std::string> needles;
    needles.reserve(mapping.rules.size());
    for (const auto& rule : mapping.rules) {
        rule_targets.push_back(mapping.feature_index(rule.feature));
        needles.push_back(lower_copy(rule.contains));
    }

    std::vector<StudentProfile> profiles;
    std::unordered_map<std::string, std::size_t> index_of;
    for (const auto& rec : records) {
        auto [it, inserted] = index_of.try_emplace(rec.user_id, profiles.size());
        if (inserted) {
            StudentProfile p;
            p.user_id = rec.user_id;
            p.counts.assign(mapping.feature_names.size(), 0);
            profiles.push_back(std::move(p));
        }
        StudentProfile& profile = profiles[it->second];

        bool matched = false;
        for (std::size_t r = 0; r < mapping.rules.size(); ++r) {
            const std::string* field = nullptr;
            switch (mapping.rules[r].field) {
            case MatchField::EventName: field = &rec.event_name; break;
            case MatchField::Component: field = &rec.component; break;
            case MatchField::EventContext: field = &rec.event_context; break;
            }
            if (contains_ci(*field, needles[r])) {
                ++profile.counts[rule_targets[r]];
                matched = true;
                break;
            }
        }
        if (!matched) ++profile.unmapped_events;
    }
    return profiles;
}

std::array<int, 4> score_ils(const ILSResponse& response) {
    std::array<int, 4> scores{};
    for (std::size_t i = 0; i < 44; ++i) {
        char c = response.answers[i];
        int delta;
        if (c == 'a' || c == 'A') delta = 1;
        else if (c == 'b' || c == 'B') delta = -1;
        else
            throw DataError("questionnaire for user '" + response.user_id + "' has answer '" +
                            std::string(1, c) + "' at item " + std::to_string(i + 1) +
                            " (expected a or b)");
        scores[i / 11] += delta;
    }
    return scores;
}

std::vector<ILSResponse> parse_ils_file(std::istream& in) {
    CsvReader reader(in);
    std::vector<ILSResponse> responses;
    std::unordered_set<std::string> seen;
    std::vector<std::string> fields;
    bool first = true;
    while (reader.next(fields)) {
        std::size_t line = reader.record_line();
        if (first) {
            first = false;
            // Optional header: skip if the answer fields are not all a/b.
            bool header = false;
            for (std::size_t i = 1; i < fields.size(); ++i) {
                std::string low = lower_copy(fields[i]);
                if (low.find_first_not_of("ab") != std::string::npos) {
                    header = true;
                    break;
                }
            }
            if (header) continue;
        }
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;

        ILSResponse resp;
        resp.user_id = fields[0];
        if (resp.user_id.empty())
            throw DataError("questionnaire row at line " + std::to_string(line) +
                            " has an empty user id");

        std::string flat;
        for (std::size_t i = 1; i < fields.size(); ++i) flat += fields[i];
        if (flat.size() != 44)
            throw DataError("questionnaire row for user '" + resp.user_id + "' at line " +
                            std::to_string(line) + " has " + std::to_string(flat.size()) +
                            " answers (expected 44)");
        std::copy(flat.begin(), flat.end(), resp.answers.begin());
        for (char c : resp.answers)
            if (c != 'a' && c != 'A' && c != 'b' && c != 'B')
                throw DataError("questionnaire row for user '" + resp.user_id + "' at line " +
                                std::to_string(line) + " has answer '" + std::string(1, c) +
                                "' (expected a or b)");
        if (!seen.insert(resp.user_id).second)
            throw DataError("duplicate questionnaire row for user '" + resp.user_id + "'");
        responses.push_back(resp);
    }
    return responses;
}

AssembleResult assemble_dataset(const std::vector<StudentProfile>& profiles,
                                const std::vector<std::string>& feature_names,
                                const std::vector<std::pair<std::string, DimensionLabel>>& labels) {
    LearningDataset ds;
    ds.feature_names = feature_names;
    std::unordered_set<std::string> known;
    for (const auto& p : profiles) {
        if (p.counts.size() != feature_names.size())
            throw DataError("profile for user '" + p.user_id + "' has " +
                            std::to_string(p.counts.size()) + " counts (expected " +
                            std::to_string(feature_names.size()) + ")");
        DatasetRow row;
        row.user_id = p.user_id;
        row.counts.assign(p.counts.begin(), p.counts.end());
        ds.rows.push_back(std::move(row));
        known.insert(p.user_id);
    }

    AssembleResult result;
    std::unordered_set<std::string> rejected_seen;
    for (const auto& [user, label] : labels) {
        if (!known.count(user)) {
            if (rejected_seen.insert(user).second) result.rejected_users.push_back(user);
            continue;
        }
        auto& dim_labels = ds.labels[dimension_index(label.dimension)];
        if (dim_labels.count(user))
            throw DataError("user '" + user + "' labeled twice for dimension " +
                            dimension_name(label.dimension));
        dim_labels.emplace(user, label);
    }
    ds.validate();
    result.dataset = std::move(ds);
    return result;
}

AssembleResult assemble_dataset_from_ils(const std::vector<StudentProfile>& profiles,
                                         const std::vector<std::string>& feature_names,
                                         const std::vector<ILSResponse>& responses) {
    std::vector<std::pair<std::string, DimensionLabel>> labels;
    labels.reserve(responses.size() * 4);
    for (const auto& resp : responses) {
        std::array<int, 4> scores = score_ils(resp);
        for (Dimension d : kAllDimensions)
            labels.emplace_back(resp.user_id, label_from_score(d, scores[dimension_index(d)]));
    }
    return assemble_dataset(profiles, feature_names, labels);
}

} // namespace stylemill
