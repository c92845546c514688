#include <cmath>
#include <numbers>

#include "fit_util.hpp"
#include "stylemill/learners.hpp"

namespace stylemill {

namespace {

double log_gaussian(double x, double mean, double var) {
    double diff = x - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * var) - diff * diff / (2.0 * var);
}

} // namespace

double NbClassifier::score(const std::vector<double>& x) const {
    double first = log_prior_first, second = log_prior_second;
    for (std::size_t j = 0; j < x.size(); ++j) {
        first += log_gaussian(x[j], mean_first[j], var_first[j]);
        second += log_gaussian(x[j], mean_second[j], var_second[j]);
    }
    return first - second;
}

nlohmann::json NbClassifier::params_json() const {
    return {{"log_prior_first", log_prior_first},
            {"log_prior_second", log_prior_second},
            {"mean_first", mean_first},
            {"var_first", var_first},
            {"mean_second", mean_second},
            {"var_second", var_second}};
}

std::shared_ptr<NbClassifier> NbClassifier::from_json(const nlohmann::json& j) {
    auto m = std::make_shared<NbClassifier>();
    m->log_prior_first = j.at("log_prior_first").get<double>();
    m->log_prior_second = j.at("log_prior_second").get<double>();
    m->mean_first = j.at("mean_first").get<std::vector<double>>();
    m->var_first = j.at("var_first").get<std::vector<double>>();
    m->mean_second = j.at("mean_second").get<std::vector<double>>();
    m->var_second = j.at("var_second").get<std::vector<double>>();
    return m;
}

TrainedModel fit_naive_bayes(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                             const std::vector<std::string>& feature_names, Dimension dim,
                             const NbConfig& cfg) {
    detail::check_matrix(x, y, "naive Bayes");
    detail::check_two_classes(y, "naive Bayes");

    std::size_t d = x[0].size();
    auto clf = std::make_shared<NbClassifier>();
    clf->mean_first.assign(d, 0.0);
    clf->var_first.assign(d, 0.0);
    clf->mean_second.assign(d, 0.0);
    clf->var_second.assign(d, 0.0);

    std::size_t n_first = 0, n_second = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto& mean = y[i] == +1 ? clf->mean_first : clf->mean_second;
        (y[i] == +1 ? n_first : n_second)++;
        for (std::size_t j = 0; j < d; ++j) mean[j] += x[i][j];
    }
    for (std::size_t j = 0; j < d; ++j) {
        clf->mean_first[j] /= static_cast<double>(n_first);
        clf->mean_second[j] /= static_cast<double>(n_second);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto& mean = y[i] == +1 ? clf->mean_first : clf->mean_second;
        auto& var = y[i] == +1 ? clf->var_first : clf->var_second;
        for (std::size_t j = 0; j < d; ++j) {
            double diff = x[i][j] - mean[j];
            var[j] += diff * diff;
        }
    }
    // Maximum-likelihood (biased) variance with a floor for constant features.
    for (std::size_t j = 0; j < d; ++j) {
        clf->var_first[j] = std::max(clf->var_first[j] / static_cast<double>(n_first),
                                     cfg.var_epsilon);
        clf->var_second[j] = std::max(clf->var_second[j] / static_cast<double>(n_second),
                                      cfg.var_epsilon);
    }
    double n = static_cast<double>(x.size());
    clf->log_prior_first = std::log(static_cast<double>(n_first) / n);
    clf->log_prior_second = std::log(static_cast<double>(n_second) / n);

    TrainedModel model;
    model.kind = "nb";
    model.dimension = dim;
    model.feature_names = feature_names;
    model.converged = true;
    model.classifier = clf;
    return model;
}

} // namespace stylemill
