#include <algorithm>
#include <cmath>
#include <fstream>

#include "stylemill/errors.hpp"
#include "stylemill/learners.hpp"

namespace stylemill {

Standardization Standardization::fit(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw DataError("cannot standardize an empty matrix");
    std::size_t d = rows[0].size();
    Standardization s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (const auto& row : rows) {
        if (row.size() != d) throw DataError("ragged matrix passed to standardize");
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
    }
    for (std::size_t j = 0; j < d; ++j) s.mean[j] /= static_cast<double>(rows.size());
    for (const auto& row : rows)
        for (std::size_t j = 0; j < d; ++j) {
            double c = row[j] - s.mean[j];
            s.stddev[j] += c * c;
        }
    for (std::size_t j = 0; j < d; ++j)
        s.stddev[j] = std::sqrt(s.stddev[j] / static_cast<double>(rows.size()));
    return s;
}

std::vector<double> Standardization::apply(const std::vector<double>& x) const {
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j)
        out[j] = stddev[j] < kVarianceEpsilon ? 0.0 : (x[j] - mean[j]) / stddev[j];
    return out;
}

nlohmann::json Standardization::to_json() const {
    return {{"mean", mean}, {"stddev", stddev}};
}

Standardization Standardization::from_json(const nlohmann::json& j) {
    Standardization s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("stddev").get<std::vector<double>>();
    return s;
}

const std::string& kernel_name(Kernel k) {
    static const std::string names[] = {"linear", "rbf"};
    return names[static_cast<int>(k)];
}

Kernel kernel_from_name(const std::string& name) {
    if (name == "linear") return Kernel::Linear;
    if (name == "rbf") return Kernel::Rbf;
    throw ConfigError("unknown kernel '" + name + "' (expected linear or rbf)");
}

double TrainedModel::decision_value(const std::vector<double>& x) const {
    if (x.size() != feature_names.size())
        throw DataError("model expects " + std::to_string(feature_names.size()) +
                        " features, got " + std::to_string(x.size()));
    double s = standardization ? classifier->score(standardization->apply(x))
                               : classifier->score(x);
    if (!std::isfinite(s)) throw NumericError("non-finite decision score");
    return s;
}

int TrainedModel::predict_one(const std::vector<double>& x) const {
    return decision_value(x) >= 0.0 ? +1 : -1; // exact zero -> first pole
}

TrainedModel::Predictions TrainedModel::predict(const std::vector<std::vector<double>>& rows) const {
    Predictions p;
    p.poles.reserve(rows.size());
    p.scores.reserve(rows.size());
    for (const auto& row : rows) {
        double s = decision_value(row);
        p.scores.push_back(s);
        p.poles.push_back(s >= 0.0 ? +1 : -1);
    }
    return p;
}

nlohmann::json TrainedModel::to_json() const {
    nlohmann::json j;
    j["schema_version"] = kModelSchemaVersion;
    j["kind"] = kind;
    j["dimension"] = dimension_name(dimension);
    j["feature_names"] = feature_names;
    j["standardization"] = standardization ? standardization->to_json() : nlohmann::json();
    j["converged"] = converged;
    j["params"] = classifier->params_json();
    return j;
}

TrainedModel TrainedModel::from_json(const nlohmann::json& j) {
    TrainedModel m;
    try {
        int version = j.at("schema_version").get<int>();
        if (version != kModelSchemaVersion)
            throw DataError("unsupported model schema version " + std::to_string(version));
        m.kind = j.at("kind").get<std::string>();
        m.dimension = dimension_from_name(j.at("dimension").get<std::string>());
        m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
        if (!j.at("standardization").is_null())
            m.standardization = Standardization::from_json(j.at("standardization"));
        m.converged = j.at("converged").get<bool>();
        const auto& params = j.at("params");
        if (m.kind == "svm") m.classifier = SvmClassifier::from_json(params);
        else if (m.kind == "nb") m.classifier = NbClassifier::from_json(params);
        else if (m.kind == "tree") m.classifier = TreeClassifier::from_json(params);
        else if (m.kind == "forest") m.classifier = ForestClassifier::from_json(params);
        else if (m.kind == "mlp") m.classifier = MlpClassifier::from_json(params);
        else if (m.kind == "tri") m.classifier = VoteClassifier::from_json(params);
        else throw DataError("unknown model kind '" + m.kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed model file: ") + e.what());
    }
    return m;
}

void TrainedModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write model file '" + path + "'");
    out << to_json().dump(2) << '\n';
}

TrainedModel TrainedModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open model file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse model file '" + path + "': " + e.what());
    }
    return from_json(j);
}

double VoteClassifier::score(const std::vector<double>& x) const {
    int votes = 0;
    for (const auto& m : members) votes += m.predict_one(x);
    return static_cast<double>(votes) / static_cast<double>(members.size());
}

nlohmann::json VoteClassifier::params_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : members) arr.push_back(m.to_json());
    return {{"members", arr}};
}

std::shared_ptr<VoteClassifier> VoteClassifier::from_json(const nlohmann::json& j) {
    auto m = std::make_shared<VoteClassifier>();
    for (const auto& jm : j.at("members")) m->members.push_back(TrainedModel::from_json(jm));
    return m;
}

void TrainConfig::validate() const {
    static const std::vector<std::string> kinds = {"svm", "nb", "tree", "forest", "mlp"};
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
        throw ConfigError("unknown model kind '" + kind +
                          "' (expected svm, nb, tree, forest, or mlp)");
    if (!(svm.c > 0.0)) throw ConfigError("SVM penalty C must be positive");
    if (!(svm.tol > 0.0)) throw ConfigError("SVM tolerance must be positive");
    if (svm.kernel == Kernel::Rbf && !(svm.gamma > 0.0))
        throw ConfigError("rbf gamma must be positive");
    if (!(nb.var_epsilon > 0.0)) throw ConfigError("NB variance floor must be positive");
    if (tree.min_leaf < 1) throw ConfigError("tree min_leaf must be at least 1");
    if (forest.n_trees < 1) throw ConfigError("forest needs at least one tree");
    if (forest.tree.min_leaf < 1) throw ConfigError("forest tree min_leaf must be at least 1");
    if (mlp.hidden < 1) throw ConfigError("MLP hidden width must be at least 1");
    if (!(mlp.learning_rate > 0.0)) throw ConfigError("MLP learning rate must be positive");
}

nlohmann::json TrainConfig::to_json() const {
    return {{"kind", kind},
            {"svm",
             {{"kernel", kernel_name(svm.kernel)},
              {"gamma", svm.gamma},
              {"c", svm.c},
              {"tol", svm.tol},
              {"max_passes", svm.max_passes}}},
            {"nb", {{"var_epsilon", nb.var_epsilon}}},
            {"tree", {{"min_leaf", tree.min_leaf}, {"max_depth", tree.max_depth}}},
            {"forest",
             {{"n_trees", forest.n_trees},
              {"bootstrap", forest.bootstrap},
              {"features_per_split", forest.features_per_split},
              {"tree", {{"min_leaf", forest.tree.min_leaf}, {"max_depth", forest.tree.max_depth}}},
              {"seed", forest.seed}}},
            {"mlp",
             {{"hidden", mlp.hidden},
              {"learning_rate", mlp.learning_rate},
              {"epochs", mlp.epochs},
              {"seed", mlp.seed}}}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    TrainConfig c;
    try {
        c.kind = j.value("kind", c.kind);
        if (j.contains("svm")) {
            const auto& s = j.at("svm");
            c.svm.kernel = kernel_from_name(s.value("kernel", kernel_name(c.svm.kernel)));
            c.svm.gamma = s.value("gamma", c.svm.gamma);
            c.svm.c = s.value("c", c.svm.c);
            c.svm.tol = s.value("tol", c.svm.tol);
            c.svm.max_passes = s.value("max_passes", c.svm.max_passes);
        }
        if (j.contains("nb")) c.nb.var_epsilon = j.at("nb").value("var_epsilon", c.nb.var_epsilon);
        if (j.contains("tree")) {
            const auto& t = j.at("tree");
            c.tree.min_leaf = t.value("min_leaf", c.tree.min_leaf);
            c.tree.max_depth = t.value("max_depth", c.tree.max_depth);
        }
        if (j.contains("forest")) {
            const auto& f = j.at("forest");
            c.forest.n_trees = f.value("n_trees", c.forest.n_trees);
            c.forest.bootstrap = f.value("bootstrap", c.forest.bootstrap);
            c.forest.features_per_split =
                f.value("features_per_split", c.forest.features_per_split);
            c.forest.seed = f.value("seed", c.forest.seed);
            if (f.contains("tree")) {
                const auto& t = f.at("tree");
                c.forest.tree.min_leaf = t.value("min_leaf", c.forest.tree.min_leaf);
                c.forest.tree.max_depth = t.value("max_depth", c.forest.tree.max_depth);
            }
        }
        if (j.contains("mlp")) {
            const auto& m = j.at("mlp");
            c.mlp.hidden = m.value("hidden", c.mlp.hidden);
            c.mlp.learning_rate = m.value("learning_rate", c.mlp.learning_rate);
            c.mlp.epochs = m.value("epochs", c.mlp.epochs);
            c.mlp.seed = m.value("seed", c.mlp.seed);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed train config: ") + e.what());
    }
    c.validate();
    return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open train config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse train config '" + path + "': " + e.what());
    }
    return from_json(j);
}

TrainedModel fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                 const std::vector<std::string>& feature_names, Dimension dim,
                 const TrainConfig& cfg) {
    cfg.validate();
    if (cfg.kind == "svm") return fit_svm(x, y, feature_names, dim, cfg.svm);
    if (cfg.kind == "nb") return fit_naive_bayes(x, y, feature_names, dim, cfg.nb);
    if (cfg.kind == "tree") return fit_tree_c45(x, y, feature_names, dim, cfg.tree);
    if (cfg.kind == "forest") return fit_random_forest(x, y, feature_names, dim, cfg.forest);
    return fit_mlp(x, y, feature_names, dim, cfg.mlp);
}

TrainedModel fit(const LearningDataset& ds, Dimension dim, const TrainConfig& cfg) {
    LabeledMatrix m = labeled_matrix(ds, dim);
    return fit(m.x, m.y, ds.feature_names, dim, cfg);
}

} // namespace stylemill
