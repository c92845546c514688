#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "stylemill/dataset.hpp"
#include "stylemill/dimension.hpp"

namespace stylemill {

// Generator spec for count-valued synthetic students with known poles.
// Effective per-pole rates are base +/- separation * (rate - base), where
// base is the midpoint of the two poles' declared rates, floored at 1e-6:
// separation 0 erases the signal, 1 reproduces the declared rates, and
// larger values widen the gap.
struct SynthSpec {
    std::size_t n_students = 1000;
    std::vector<std::string> feature_names;
    std::vector<double> first_pole_rates;  // expected count per feature
    std::vector<double> second_pole_rates;
    double separation = 1.0;
    double class_balance = 0.5;   // P(first pole)
    double labeled_fraction = 1.0;
    Dimension dimension = Dimension::Processing;
    std::uint64_t seed = 1;

    void validate() const;
    // Rates after applying the separation multiplier.
    std::pair<std::vector<double>, std::vector<double>> effective_rates() const;

    nlohmann::json to_json() const;
    static SynthSpec from_json(const nlohmann::json& j);
    static SynthSpec load(const std::string& path);
};

struct SynthResult {
    LearningDataset dataset; // labeled_fraction of rows carry visible labels
    // Ground truth for every row, on its own channel so training code can
    // never touch it (the same firewall as sampling's withheld labels).
    std::map<std::string, DimensionLabel> truth;
};

SynthResult generate(const SynthSpec& spec);

struct BayesRateEstimate {
    double accuracy = 0.0;
    double std_error = 0.0;
    std::size_t n_draws = 0;
};

// Monte Carlo estimate of the Bayes-optimal accuracy under the generating
// distribution (exact Poisson log-posterior argmax per draw).
BayesRateEstimate bayes_rate(const SynthSpec& spec, std::size_t n_draws = 100000);

} // namespace stylemill
