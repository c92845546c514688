#include "stylemill/synth.hpp"

#include <cmath>
#include <fstream>

#include "stylemill/errors.hpp"
#include "stylemill/rng.hpp"

namespace stylemill {

void SynthSpec::validate() const {
    if (n_students == 0) throw ConfigError("synth spec needs at least one student");
    if (feature_names.empty()) throw ConfigError("synth spec declares no features");
    if (first_pole_rates.size() != feature_names.size() ||
        second_pole_rates.size() != feature_names.size())
        throw ConfigError("synth rate vectors must match the feature list length");
    for (double r : first_pole_rates)
        if (!(r > 0.0)) throw ConfigError("synth rates must be positive");
    for (double r : second_pole_rates)
        if (!(r > 0.0)) throw ConfigError("synth rates must be positive");
    if (!(separation >= 0.0)) throw ConfigError("separation must be non-negative");
    if (!(class_balance > 0.0) || !(class_balance < 1.0))
        throw ConfigError("class balance must lie in (0, 1)");
    if (!(labeled_fraction > 0.0) || labeled_fraction > 1.0)
        throw ConfigError("labeled fraction must lie in (0, 1]");
}

std::pair<std::vector<double>, std::vector<double>> SynthSpec::effective_rates() const {
    std::vector<double> first(feature_names.size()), second(feature_names.size());
    for (std::size_t j = 0; j < feature_names.size(); ++j) {
        double base = 0.5 * (first_pole_rates[j] + second_pole_rates[j]);
        first[j] = std::max(base + separation * (first_pole_rates[j] - base), 1e-6);
        second[j] = std::max(base + separation * (second_pole_rates[j] - base), 1e-6);
    }
    return {std::move(first), std::move(second)};
}

nlohmann::json SynthSpec::to_json() const {
    return {{"n_students", n_students},
            {"feature_names", feature_names},
            {"first_pole_rates", first_pole_rates},
            {"second_pole_rates", second_pole_rates},
            {"separation", separation},
            {"class_balance", class_balance},
            {"labeled_fraction", labeled_fraction},
            {"dimension", dimension_name(dimension)},
            {"seed", seed}};
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
    SynthSpec s;
    try {
        s.n_students = j.value("n_students", s.n_students);
        s.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        s.first_pole_rates = j.at("first_pole_rates").get<std::vector<double>>();
        s.second_pole_rates = j.at("second_pole_rates").get<std::vector<double>>();
        s.separation = j.value("separation", s.separation);
        s.class_balance = j.value("class_balance", s.class_balance);
        s.labeled_fraction = j.value("labeled_fraction", s.labeled_fraction);
        if (j.contains("dimension"))
            s.dimension = dimension_from_name(j.at("dimension").get<std::string>());
        s.seed = j.value("seed", s.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed synth spec: ") + e.what());
    }
    s.validate();
    return s;
}

SynthSpec SynthSpec::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synth spec '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse synth spec '" + path + "': " + e.what());
    }
    return from_json(j);
}

SynthResult generate(const SynthSpec& spec) {
    spec.validate();
    auto [first_rates, second_rates] = spec.effective_rates();

    std::size_t width = std::to_string(spec.n_students).size();
    Rng rng(spec.seed);
    SynthResult result;
    result.dataset.feature_names = spec.feature_names;

    for (std::size_t i = 0; i < spec.n_students; ++i) {
        std::string id = std::to_string(i + 1);
        if (id.size() < width) id.insert(0, width - id.size(), '0');
        id.insert(0, "s");

        bool first = rng.uniform01() < spec.class_balance;
        // Odd magnitude in {1,...,11}; the sign is the pole.
        int magnitude = static_cast<int>(rng.bounded(6)) * 2 + 1;
        DimensionLabel label = label_from_score(spec.dimension,
                                                first ? magnitude : -magnitude);

        DatasetRow row;
        row.user_id = id;
        const auto& rates = first ? first_rates : second_rates;
        for (double rate : rates)
            row.counts.push_back(static_cast<double>(rng.poisson(rate)));
        result.dataset.rows.push_back(std::move(row));
        result.truth.emplace(id, label);
    }

    std::size_t n_labeled = static_cast<std::size_t>(
        std::floor(spec.labeled_fraction * static_cast<double>(spec.n_students) + 0.5));
    if (n_labeled == 0) n_labeled = 1;
    std::vector<std::size_t> chosen =
        rng.sample_without_replacement(spec.n_students, n_labeled);
    auto& labels = result.dataset.labels[dimension_index(spec.dimension)];
    for (std::size_t i : chosen) {
        const std::string& id = result.dataset.rows[i].user_id;
        labels.emplace(id, result.truth.at(id));
    }
    result.dataset.validate();
    return result;
}

BayesRateEstimate bayes_rate(const SynthSpec& spec, std::size_t n_draws) {
    spec.validate();
    if (n_draws < 100000) n_draws = 100000;
    auto [first_rates, second_rates] = spec.effective_rates();

    double log_prior_first = std::log(spec.class_balance);
    double log_prior_second = std::log(1.0 - spec.class_balance);

    // Separate stream so generate() and the oracle never share draws.
    Rng rng(derive_seed(spec.seed, 0x0bae5));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n_draws; ++i) {
        bool first = rng.uniform01() < spec.class_balance;
        const auto& rates = first ? first_rates : second_rates;
        double lp_first = log_prior_first, lp_second = log_prior_second;
        for (std::size_t j = 0; j < rates.size(); ++j) {
            double k = static_cast<double>(rng.poisson(rates[j]));
            // log Poisson(k; r) = k log r - r - lgamma(k+1); the lgamma term
            // is shared and cancels in the comparison.
            lp_first += k * std::log(first_rates[j]) - first_rates[j];
            lp_second += k * std::log(second_rates[j]) - second_rates[j];
        }
        bool guess_first = lp_first >= lp_second; // tie -> first pole
        if (guess_first == first) ++correct;
    }

    BayesRateEstimate est;
    est.n_draws = n_draws;
    est.accuracy = static_cast<double>(correct) / static_cast<double>(n_draws);
    est.std_error = std::sqrt(est.accuracy * (1.0 - est.accuracy) /
                              static_cast<double>(n_draws));
    return est;
}

} // namespace stylemill
