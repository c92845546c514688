#include "stylemill/dimension.hpp"

namespace stylemill {

namespace {
const std::array<std::string, 4> kNames = {"processing", "input", "understanding", "perception"};
const std::array<std::pair<std::string, std::string>, 4> kPoles = {{
    {"active", "reflective"},
    {"visual", "verbal"},
    {"sequential", "global"},
    {"sensing", "intuitive"},
}};
const std::array<std::string, 3> kStrengths = {"balanced", "moderate", "strong"};
} // namespace

const std::string& dimension_name(Dimension d) {
    return kNames[dimension_index(d)];
}

Dimension dimension_from_name(const std::string& name) {
    for (Dimension d : kAllDimensions) {
        if (kNames[dimension_index(d)] == name) return d;
    }
    throw ConfigError("unknown dimension '" + name +
                      "' (expected processing, input, understanding, or perception)");
}

std::pair<std::string, std::string> pole_names(Dimension d) {
    return kPoles[dimension_index(d)];
}

const std::string& strength_name(Strength s) {
    return kStrengths[static_cast<std::size_t>(s)];
}

DimensionLabel label_from_score(Dimension dimension, int score) {
    if (score % 2 == 0) {
        throw DataError("dimension score must be odd, got " + std::to_string(score));
    }
    if (score < -11 || score > 11) {
        throw DataError("dimension score out of range [-11, 11]: " + std::to_string(score));
    }
    return DimensionLabel{dimension, score};
}

} // namespace stylemill
