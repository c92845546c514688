#include <cmath>

#include "fit_util.hpp"
#include "stylemill/learners.hpp"
#include "stylemill/rng.hpp"

namespace stylemill {

namespace {

double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Forward pass: hidden tanh activations and the output logit.
double forward(const MlpParams& p, const std::vector<double>& x, std::vector<double>& hidden) {
    hidden.resize(p.h);
    double z = p.b2;
    for (std::size_t k = 0; k < p.h; ++k) {
        double pre = p.b1[k];
        const double* row = &p.w1[k * p.d];
        for (std::size_t j = 0; j < p.d; ++j) pre += row[j] * x[j];
        hidden[k] = std::tanh(pre);
        z += p.w2[k] * hidden[k];
    }
    return z;
}

} // namespace

std::vector<double> MlpParams::flatten() const {
    std::vector<double> v;
    v.reserve(size());
    v.insert(v.end(), w1.begin(), w1.end());
    v.insert(v.end(), b1.begin(), b1.end());
    v.insert(v.end(), w2.begin(), w2.end());
    v.push_back(b2);
    return v;
}

MlpParams MlpParams::unflatten(std::size_t d, std::size_t h, const std::vector<double>& v) {
    MlpParams p;
    p.d = d;
    p.h = h;
    auto it = v.begin();
    p.w1.assign(it, it + static_cast<std::ptrdiff_t>(h * d));
    it += static_cast<std::ptrdiff_t>(h * d);
    p.b1.assign(it, it + static_cast<std::ptrdiff_t>(h));
    it += static_cast<std::ptrdiff_t>(h);
    p.w2.assign(it, it + static_cast<std::ptrdiff_t>(h));
    it += static_cast<std::ptrdiff_t>(h);
    p.b2 = *it;
    return p;
}

double mlp_loss(const MlpParams& p, const std::vector<std::vector<double>>& x,
                const std::vector<int>& y) {
    double total = 0.0;
    std::vector<double> hidden;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = forward(p, x[i], hidden);
        double t = y[i] == +1 ? 1.0 : 0.0;
        total += softplus(z) - t * z; // -log p(t|z), stable for large |z|
    }
    return total / static_cast<double>(x.size());
}

std::vector<double> mlp_grad(const MlpParams& p, const std::vector<std::vector<double>>& x,
                             const std::vector<int>& y) {
    MlpParams g;
    g.d = p.d;
    g.h = p.h;
    g.w1.assign(p.h * p.d, 0.0);
    g.b1.assign(p.h, 0.0);
    g.w2.assign(p.h, 0.0);
    g.b2 = 0.0;

    std::vector<double> hidden;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double z = forward(p, x[i], hidden);
        double t = y[i] == +1 ? 1.0 : 0.0;
        double dz = sigmoid(z) - t;
        g.b2 += dz;
        for (std::size_t k = 0; k < p.h; ++k) {
            g.w2[k] += dz * hidden[k];
            double dpre = dz * p.w2[k] * (1.0 - hidden[k] * hidden[k]);
            g.b1[k] += dpre;
            double* grow = &g.w1[k * p.d];
            for (std::size_t j = 0; j < p.d; ++j) grow[j] += dpre * x[i][j];
        }
    }
    double inv_n = 1.0 / static_cast<double>(x.size());
    for (auto& v : g.w1) v *= inv_n;
    for (auto& v : g.b1) v *= inv_n;
    for (auto& v : g.w2) v *= inv_n;
    g.b2 *= inv_n;
    return g.flatten();
}

double MlpClassifier::score(const std::vector<double>& x) const {
    std::vector<double> hidden;
    return forward(params, x, hidden);
}

nlohmann::json MlpClassifier::params_json() const {
    return {{"d", params.d}, {"h", params.h},   {"w1", params.w1},
            {"b1", params.b1}, {"w2", params.w2}, {"b2", params.b2}};
}

std::shared_ptr<MlpClassifier> MlpClassifier::from_json(const nlohmann::json& j) {
    auto m = std::make_shared<MlpClassifier>();
    m->params.d = j.at("d").get<std::size_t>();
    m->params.h = j.at("h").get<std::size_t>();
    m->params.w1 = j.at("w1").get<std::vector<double>>();
    m->params.b1 = j.at("b1").get<std::vector<double>>();
    m->params.w2 = j.at("w2").get<std::vector<double>>();
    m->params.b2 = j.at("b2").get<double>();
    return m;
}

TrainedModel fit_mlp(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const std::vector<std::string>& feature_names, Dimension dim,
                     const MlpConfig& cfg) {
    detail::check_matrix(x, y, "MLP");
    detail::check_two_classes(y, "MLP");
    if (cfg.hidden < 1) throw ConfigError("MLP hidden width must be at least 1");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("MLP learning rate must be positive");

    Standardization stand = Standardization::fit(x);
    std::vector<std::vector<double>> z;
    z.reserve(x.size());
    for (const auto& row : x) z.push_back(stand.apply(row));

    std::size_t d = x[0].size();
    MlpParams p;
    p.d = d;
    p.h = cfg.hidden;
    Rng rng(cfg.seed);
    auto init = [&rng]() { return rng.uniform01() - 0.5; };
    p.w1.resize(p.h * p.d);
    p.b1.resize(p.h);
    p.w2.resize(p.h);
    for (auto& w : p.w1) w = init();
    for (auto& w : p.b1) w = init();
    for (auto& w : p.w2) w = init();
    p.b2 = init();

    std::vector<double> flat = p.flatten();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<double> grad = mlp_grad(p, z, y);
        for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= cfg.learning_rate * grad[i];
        p = MlpParams::unflatten(d, cfg.hidden, flat);
        if (!std::isfinite(mlp_loss(p, z, y)))
            throw NumericError("MLP training diverged; reduce the learning rate");
    }

    auto clf = std::make_shared<MlpClassifier>();
    clf->params = std::move(p);

    TrainedModel model;
    model.kind = "mlp";
    model.dimension = dim;
    model.feature_names = feature_names;
    model.standardization = stand;
    model.converged = true;
    model.classifier = clf;
    return model;
}

} // namespace stylemill
