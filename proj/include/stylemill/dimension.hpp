#pragma once

#include <array>
#include <cstdlib>
#include <string>

#include "stylemill/errors.hpp"

namespace stylemill {

// The four FSLSM dimensions. Each has an ordered pole pair; the first pole
// is the positive ILS score side and the positive class everywhere in eval.
enum class Dimension { Processing = 0, Input = 1, Understanding = 2, Perception = 3 };

inline constexpr std::array<Dimension, 4> kAllDimensions = {
    Dimension::Processing, Dimension::Input, Dimension::Understanding, Dimension::Perception};

inline constexpr std::size_t dimension_index(Dimension d) {
    return static_cast<std::size_t>(d);
}

const std::string& dimension_name(Dimension d);
Dimension dimension_from_name(const std::string& name);

// (first, second) pole names, e.g. Processing -> ("active", "reflective").
std::pair<std::string, std::string> pole_names(Dimension d);

enum class Strength { Balanced, Moderate, Strong };

const std::string& strength_name(Strength s);

// One dimension's label for one student. Pole and strength are derived from
// the odd score in [-11, +11]: sign gives the pole, |score| in {1,3} is
// balanced, {5,7} moderate, {9,11} strong.
struct DimensionLabel {
    Dimension dimension = Dimension::Processing;
    int score = 1;

    bool first_pole() const { return score > 0; }
    // +1 for the first pole, -1 for the second; the classification target.
    int pole_sign() const { return score > 0 ? +1 : -1; }
    Strength strength() const {
        int a = std::abs(score);
        if (a <= 3) return Strength::Balanced;
        if (a <= 7) return Strength::Moderate;
        return Strength::Strong;
    }
    std::string pole_name() const {
        auto [first, second] = pole_names(dimension);
        return first_pole() ? first : second;
    }
};

// Validates score parity and range; the only way labels should be minted.
DimensionLabel label_from_score(Dimension dimension, int score);

} // namespace stylemill
