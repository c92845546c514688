#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stylemill/dataset.hpp"
#include "stylemill/dimension.hpp"

namespace stylemill {

inline constexpr int kModelSchemaVersion = 1;
inline constexpr double kVarianceEpsilon = 1e-9;

// Per-feature (mean, population stddev). Columns with stddev below the
// variance floor transform to all-zeros instead of dividing by ~0.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardization fit(const std::vector<std::vector<double>>& rows);
    std::vector<double> apply(const std::vector<double>& x) const;

    nlohmann::json to_json() const;
    static Standardization from_json(const nlohmann::json& j);
};

// A fitted binary scorer. Positive score = first pole; the caller applies
// standardization and schema checks (see TrainedModel).
class Classifier {
  public:
    virtual ~Classifier() = default;
    virtual double score(const std::vector<double>& x) const = 0;
    virtual std::string kind() const = 0;
    virtual nlohmann::json params_json() const = 0;
};

struct TrainedModel {
    std::string kind; // svm|nb|tree|forest|mlp|tri
    Dimension dimension = Dimension::Processing;
    std::vector<std::string> feature_names;
    std::optional<Standardization> standardization;
    bool converged = true;
    std::shared_ptr<const Classifier> classifier;

    // Signed decision score after standardization and a width check.
    double decision_value(const std::vector<double>& x) const;
    // Pole from the score's sign; an exact zero goes to the first pole.
    int predict_one(const std::vector<double>& x) const;

    struct Predictions {
        std::vector<int> poles;
        std::vector<double> scores;
    };
    Predictions predict(const std::vector<std::vector<double>>& rows) const;

    nlohmann::json to_json() const;
    static TrainedModel from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static TrainedModel load(const std::string& path);
};

enum class Kernel { Linear, Rbf };

struct SvmConfig {
    Kernel kernel = Kernel::Linear;
    double gamma = 1.0;        // rbf only
    double c = 1.0;            // penalty
    double tol = 1e-3;         // KKT tolerance
    std::size_t max_passes = 10000;
};

struct NbConfig {
    double var_epsilon = kVarianceEpsilon;
};

struct TreeConfig {
    std::size_t min_leaf = 1;
    std::size_t max_depth = 0; // 0 = unbounded
};

struct ForestConfig {
    std::size_t n_trees = 25;
    bool bootstrap = true;
    std::size_t features_per_split = 0; // 0 = ceil(sqrt(d))
    TreeConfig tree;
    std::uint64_t seed = 1;
};

struct MlpConfig {
    std::size_t hidden = 16;
    double learning_rate = 0.2;
    std::size_t epochs = 500;
    std::uint64_t seed = 1;
};

// Flat config with a kind switch, so one file drives any model choice.
struct TrainConfig {
    std::string kind = "svm";
    SvmConfig svm;
    NbConfig nb;
    TreeConfig tree;
    ForestConfig forest;
    MlpConfig mlp;

    void validate() const;
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
    static TrainConfig load(const std::string& path);
};

// Matrix-level fits: x rows vs y in {-1, +1}. Each returns an immutable
// TrainedModel carrying the feature schema and (for SVM/MLP) the fitted
// standardization.
TrainedModel fit_svm(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const std::vector<std::string>& feature_names, Dimension dim,
                     const SvmConfig& cfg = {});
TrainedModel fit_naive_bayes(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                             const std::vector<std::string>& feature_names, Dimension dim,
                             const NbConfig& cfg = {});
TrainedModel fit_tree_c45(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                          const std::vector<std::string>& feature_names, Dimension dim,
                          const TreeConfig& cfg = {});
TrainedModel fit_random_forest(const std::vector<std::vector<double>>& x,
                               const std::vector<int>& y,
                               const std::vector<std::string>& feature_names, Dimension dim,
                               const ForestConfig& cfg = {});
TrainedModel fit_mlp(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                     const std::vector<std::string>& feature_names, Dimension dim,
                     const MlpConfig& cfg = {});

// Kind dispatch over the five fits above.
TrainedModel fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                 const std::vector<std::string>& feature_names, Dimension dim,
                 const TrainConfig& cfg);
// Convenience: fit on a dataset's labeled rows for one dimension.
TrainedModel fit(const LearningDataset& ds, Dimension dim, const TrainConfig& cfg);

// --- introspection surface for tests and model files ---

class SvmClassifier : public Classifier {
  public:
    Kernel kernel = Kernel::Linear;
    double gamma = 1.0;
    double b = 0.0;
    std::vector<std::vector<double>> support_vectors; // standardized space
    std::vector<double> coeff;                        // alpha_i * y_i per SV
    // Full dual solution in training order, for KKT/feasibility checks.
    std::vector<double> alpha;
    std::vector<int> train_y;

    double score(const std::vector<double>& x) const override;
    std::string kind() const override { return "svm"; }
    nlohmann::json params_json() const override;
    static std::shared_ptr<SvmClassifier> from_json(const nlohmann::json& j);

    double kernel_value(const std::vector<double>& u, const std::vector<double>& v) const;
};

class NbClassifier : public Classifier {
  public:
    double log_prior_first = 0.0, log_prior_second = 0.0;
    std::vector<double> mean_first, var_first;   // per feature, variance floored
    std::vector<double> mean_second, var_second;

    double score(const std::vector<double>& x) const override;
    std::string kind() const override { return "nb"; }
    nlohmann::json params_json() const override;
    static std::shared_ptr<NbClassifier> from_json(const nlohmann::json& j);
};

class TreeClassifier : public Classifier {
  public:
    // Flattened nodes; node 0 is the root. Leaves have feature == -1 and
    // carry the signed class-proportion margin (n_first - n_second) / n.
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        int left = -1, right = -1; // node indices
        double margin = 0.0;       // leaves only
    };
    std::vector<Node> nodes;

    double score(const std::vector<double>& x) const override;
    std::string kind() const override { return "tree"; }
    nlohmann::json params_json() const override;
    static std::shared_ptr<TreeClassifier> from_json(const nlohmann::json& j);
};

class ForestClassifier : public Classifier {
  public:
    std::vector<std::shared_ptr<const TreeClassifier>> trees;

    // Vote-fraction margin: (votes_first - votes_second) / n_trees.
    double score(const std::vector<double>& x) const override;
    std::string kind() const override { return "forest"; }
    nlohmann::json params_json() const override;
    static std::shared_ptr<ForestClassifier> from_json(const nlohmann::json& j);
};

// MLP parameters exposed flat so the gradient can be checked against
// central finite differences.
struct MlpParams {
    std::size_t d = 0, h = 0;
    std::vector<double> w1; // h x d, row-major
    std::vector<double> b1; // h
    std::vector<double> w2; // h
    double b2 = 0.0;

    std::size_t size() const { return h * d + h + h + 1; }
    std::vector<double> flatten() const;
    static MlpParams unflatten(std::size_t d, std::size_t h, const std::vector<double>& v);
};

// Mean log-loss over the batch (y in {-1,+1}), via the softplus form
// softplus(z) - t*z with t = (y+1)/2, stable for large |z|.
double mlp_loss(const MlpParams& p, const std::vector<std::vector<double>>& x,
                const std::vector<int>& y);
// Analytic gradient of mlp_loss with the same flattening as MlpParams.
std::vector<double> mlp_grad(const MlpParams& p, const std::vector<std::vector<double>>& x,
                             const std::vector<int>& y);

class MlpClassifier : public Classifier {
  public:
    MlpParams params;

    double score(const std::vector<double>& x) const override; // logit
    std::string kind() const override { return "mlp"; }
    nlohmann::json params_json() const override;
    static std::shared_ptr<MlpClassifier> from_json(const nlohmann::json& j);
};

// Majority vote over member models (used by tri-training). Members keep
// their own standardization; the wrapper applies none.
class VoteClassifier : public Classifier {
  public:
    std::vector<TrainedModel> members;

    double score(const std::vector<double>& x) const override; // vote margin
    std::string kind() const override { return "tri"; }
    nlohmann::json params_json() const override;
    static std::shared_ptr<VoteClassifier> from_json(const nlohmann::json& j);
};

const std::string& kernel_name(Kernel k);
Kernel kernel_from_name(const std::string& name);

} // namespace stylemill
