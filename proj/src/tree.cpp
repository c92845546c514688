#include <algorithm>
#include <cmath>

#include "fit_util.hpp"
#include "stylemill/learners.hpp"
#include "stylemill/rng.hpp"

namespace stylemill {

namespace {

double entropy(std::size_t n_first, std::size_t n_second) {
    std::size_t n = n_first + n_second;
    double h = 0.0;
    for (std::size_t c : {n_first, n_second}) {
        if (c == 0 || c == n) continue;
        double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log2(p);
    }
    return h;
}

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double gain_ratio = -1.0;
};

// Grows nodes depth-first; gain-ratio split selection after Quinlan's C4.5
// (binary numeric splits only; every feature here is an activity count).
class TreeBuilder {
  public:
    TreeBuilder(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                const TreeConfig& cfg, Rng* rng, std::size_t features_per_split)
        : x_(x), y_(y), cfg_(cfg), rng_(rng), m_(features_per_split) {}

    std::vector<TreeClassifier::Node> build(std::vector<std::size_t> idx) {
        grow(std::move(idx), 0);
        return std::move(nodes_);
    }

  private:
    std::size_t make_leaf(const std::vector<std::size_t>& idx) {
        std::size_t n_first = 0;
        for (std::size_t i : idx)
            if (y_[i] == +1) ++n_first;
        TreeClassifier::Node leaf;
        leaf.margin = (2.0 * static_cast<double>(n_first) - static_cast<double>(idx.size())) /
                      static_cast<double>(idx.size());
        nodes_.push_back(leaf);
        return nodes_.size() - 1;
    }

    std::vector<std::size_t> candidate_features() const {
        std::size_t d = x_[0].size();
        std::vector<std::size_t> feats;
        if (rng_ == nullptr || m_ >= d) {
            feats.resize(d);
            for (std::size_t j = 0; j < d; ++j) feats[j] = j;
        } else {
            feats = rng_->sample_without_replacement(d, m_);
            std::sort(feats.begin(), feats.end());
        }
        return feats;
    }

    SplitChoice best_split(const std::vector<std::size_t>& idx) const {
        std::size_t n = idx.size();
        std::size_t total_first = 0;
        for (std::size_t i : idx)
            if (y_[i] == +1) ++total_first;
        double parent_h = entropy(total_first, n - total_first);

        SplitChoice best;
        std::vector<std::pair<double, int>> column(n);
        for (std::size_t f : candidate_features()) {
            for (std::size_t r = 0; r < n; ++r) column[r] = {x_[idx[r]][f], y_[idx[r]]};
            std::sort(column.begin(), column.end());

            std::size_t left_first = 0;
            for (std::size_t r = 0; r + 1 < n; ++r) {
                if (column[r].second == +1) ++left_first;
                if (column[r].first == column[r + 1].first) continue; // no boundary here
                std::size_t nl = r + 1, nr = n - nl;
                if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;

                double pl = static_cast<double>(nl) / static_cast<double>(n);
                double pr = static_cast<double>(nr) / static_cast<double>(n);
                double gain = parent_h - pl * entropy(left_first, nl - left_first) -
                              pr * entropy(total_first - left_first, nr - (total_first - left_first));
                if (gain <= 1e-12) continue;
                double split_info = -pl * std::log2(pl) - pr * std::log2(pr);
                double ratio = gain / split_info;
                if (ratio > best.gain_ratio + 1e-15) {
                    best.found = true;
                    best.gain_ratio = ratio;
                    best.feature = f;
                    best.threshold = 0.5 * (column[r].first + column[r + 1].first);
                }
            }
        }
        return best;
    }

    std::size_t grow(std::vector<std::size_t> idx, std::size_t depth) {
        std::size_t n_first = 0;
        for (std::size_t i : idx)
            if (y_[i] == +1) ++n_first;
        bool pure = n_first == 0 || n_first == idx.size();
        bool depth_capped = cfg_.max_depth != 0 && depth >= cfg_.max_depth;
        if (pure || depth_capped || idx.size() < 2 * cfg_.min_leaf) return make_leaf(idx);

        SplitChoice split = best_split(idx);
        if (!split.found) return make_leaf(idx);

        std::vector<std::size_t> left, right;
        for (std::size_t i : idx)
            (x_[i][split.feature] <= split.threshold ? left : right).push_back(i);

        std::size_t self = nodes_.size();
        nodes_.emplace_back();
        nodes_[self].feature = static_cast<int>(split.feature);
        nodes_[self].threshold = split.threshold;
        std::size_t l = grow(std::move(left), depth + 1);
        std::size_t r = grow(std::move(right), depth + 1);
        nodes_[self].left = static_cast<int>(l);
        nodes_[self].right = static_cast<int>(r);
        return self;
    }

    const std::vector<std::vector<double>>& x_;
    const std::vector<int>& y_;
    TreeConfig cfg_;
    Rng* rng_;
    std::size_t m_;
    std::vector<TreeClassifier::Node> nodes_;
};

std::shared_ptr<TreeClassifier> build_tree(const std::vector<std::vector<double>>& x,
                                           const std::vector<int>& y, const TreeConfig& cfg,
                                           Rng* rng, std::size_t features_per_split) {
    auto clf = std::make_shared<TreeClassifier>();
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    TreeBuilder builder(x, y, cfg, rng, features_per_split);
    clf->nodes = builder.build(std::move(idx));
    return clf;
}

} // namespace

double TreeClassifier::score(const std::vector<double>& x) const {
    std::size_t at = 0;
    while (nodes[at].feature >= 0)
        at = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[at].feature)] <=
                                              nodes[at].threshold
                                          ? nodes[at].left
                                          : nodes[at].right);
    return nodes[at].margin;
}

nlohmann::json TreeClassifier::params_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& n : nodes)
        arr.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"margin", n.margin}});
    return {{"nodes", arr}};
}

std::shared_ptr<TreeClassifier> TreeClassifier::from_json(const nlohmann::json& j) {
    auto m = std::make_shared<TreeClassifier>();
    for (const auto& jn : j.at("nodes")) {
        Node n;
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<double>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.margin = jn.at("margin").get<double>();
        m->nodes.push_back(n);
    }
    return m;
}

double ForestClassifier::score(const std::vector<double>& x) const {
    int votes = 0;
    for (const auto& tree : trees) votes += tree->score(x) >= 0.0 ? +1 : -1;
    return static_cast<double>(votes) / static_cast<double>(trees.size());
}

nlohmann::json ForestClassifier::params_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& tree : trees) arr.push_back(tree->params_json());
    return {{"trees", arr}};
}

std::shared_ptr<ForestClassifier> ForestClassifier::from_json(const nlohmann::json& j) {
    auto m = std::make_shared<ForestClassifier>();
    for (const auto& jt : j.at("trees")) m->trees.push_back(TreeClassifier::from_json(jt));
    return m;
}

TrainedModel fit_tree_c45(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                          const std::vector<std::string>& feature_names, Dimension dim,
                          const TreeConfig& cfg) {
    detail::check_matrix(x, y, "tree");
    if (cfg.min_leaf < 1) throw ConfigError("tree min_leaf must be at least 1");

    TrainedModel model;
    model.kind = "tree";
    model.dimension = dim;
    model.feature_names = feature_names;
    model.converged = true;
    model.classifier = build_tree(x, y, cfg, nullptr, 0);
    return model;
}

TrainedModel fit_random_forest(const std::vector<std::vector<double>>& x,
                               const std::vector<int>& y,
                               const std::vector<std::string>& feature_names, Dimension dim,
                               const ForestConfig& cfg) {
    detail::check_matrix(x, y, "forest");
    if (cfg.n_trees < 1) throw ConfigError("forest needs at least one tree");

    std::size_t d = x[0].size();
    std::size_t m = cfg.features_per_split != 0
                        ? std::min(cfg.features_per_split, d)
                        : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));

    auto forest = std::make_shared<ForestClassifier>();
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        Rng rng(derive_seed(cfg.seed, t));
        std::vector<std::vector<double>> xs;
        std::vector<int> ys;
        if (cfg.bootstrap) {
            xs.reserve(x.size());
            ys.reserve(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                std::size_t pick = static_cast<std::size_t>(rng.bounded(x.size()));
                xs.push_back(x[pick]);
                ys.push_back(y[pick]);
            }
        } else {
            xs = x;
            ys = y;
        }
        forest->trees.push_back(build_tree(xs, ys, cfg.tree, &rng, m));
    }

    TrainedModel model;
    model.kind = "forest";
    model.dimension = dim;
    model.feature_names = feature_names;
    model.converged = true;
    model.classifier = forest;
    return model;
}

} // namespace stylemill
