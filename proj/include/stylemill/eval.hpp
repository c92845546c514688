#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stylemill/dataset.hpp"
#include "stylemill/dimension.hpp"
#include "stylemill/learners.hpp"
#include "stylemill/semisup.hpp"
#include "stylemill/stats.hpp"

namespace stylemill {

// Positive class = first pole, repo-wide.
struct ConfusionMatrix {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
    nlohmann::json to_json() const;
};

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& truth);

// A ratio that may be undefined (0/0). Undefined values are reported with
// the reason and never coerced to 0 or 1, so downstream t-tests stay honest.
struct OptMetric {
    std::optional<double> value;
    std::string reason;

    static OptMetric of(double v) { return {v, {}}; }
    static OptMetric absent(std::string why) { return {std::nullopt, std::move(why)}; }
    nlohmann::json to_json() const;
};

struct Metrics {
    ConfusionMatrix cm;
    OptMetric accuracy, precision, recall, specificity, auc;

    nlohmann::json to_json() const;
};

// Confusion-matrix ratios; auc left absent (no scores here).
Metrics metrics(const ConfusionMatrix& cm);

// Mann-Whitney AUC: fraction of (positive, negative) pairs ranked correctly,
// ties counted half. Equals the trapezoidal ROC area.
double auc_roc(const std::vector<double>& scores, const std::vector<int>& truth);

// Full evaluation of predictions against truth; auc present when truth has
// both classes.
Metrics evaluate(const std::vector<int>& predicted, const std::vector<double>& scores,
                 const std::vector<int>& truth);

// The paper's self-taught accuracy: every originally labeled row counts as
// correct by definition.
double self_taught_accuracy(std::size_t n_labeled, std::size_t n_correct_predictions,
                            std::size_t total);

struct Aggregate {
    OptMetric mean;
    OptMetric stddev; // sample (n-1)
    std::size_t n_present = 0;

    nlohmann::json to_json() const;
};

Aggregate aggregate(const std::vector<OptMetric>& values);

struct CvReport {
    std::size_t k = 0;
    std::vector<Metrics> folds;
    Aggregate accuracy, precision, recall, specificity, auc;

    nlohmann::json to_json() const;
};

CvReport cross_validate(const LearningDataset& ds, Dimension dim, const TrainConfig& cfg,
                        std::size_t k, std::uint64_t seed, bool stratified = true);

// --- labeled-ratio sweep (Figs. 8-9 shape) ---

struct SweepSpec {
    std::vector<double> ratios = {0.1, 0.2, 0.5, 0.75, 1.0};
    std::vector<std::string> final_kinds = {"svm"};
    std::vector<std::uint64_t> seeds = {1};
    SvmConfig labeling;
    TrainConfig base;                // kind field overridden per cell
    double holdout_fraction = 0.25;  // carved out before the L/U split

    void validate() const;
    nlohmann::json to_json() const;
    static SweepSpec from_json(const nlohmann::json& j);
};

struct SweepCell {
    double ratio = 0.0;
    std::string kind;
    std::uint64_t seed = 0;
    std::size_t n_labeled = 0, n_unlabeled = 0, n_holdout = 0;
    Metrics holdout;        // final model scored on the held-out truth
    OptMetric accuracy_st;  // absent when U is empty

    nlohmann::json to_json() const;
};

struct SweepReport {
    Dimension dimension = Dimension::Processing;
    SweepSpec spec;
    std::vector<SweepCell> cells;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

SweepReport ratio_sweep(const LearningDataset& ds, Dimension dim, const SweepSpec& spec);

// --- SL / SSL / tri-training comparison (Fig. 12 / Table IX shape) ---

struct CompareSpec {
    double ratio = 0.1;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    SvmConfig labeling;
    TrainConfig final_config;        // SL model = SSL final model kind
    TriTrainConfig tri;
    double holdout_fraction = 0.25;

    void validate() const;
    nlohmann::json to_json() const;
    static CompareSpec from_json(const nlohmann::json& j);
};

inline const std::vector<std::string> kCompareMethods = {"sl", "ssl", "tri"};

struct TTestCell {
    std::optional<TTestResult> result;
    std::string reason; // set when the test is undefined

    nlohmann::json to_json() const;
};

struct MethodComparison {
    std::string first, second; // differences = first - second
    TTestCell accuracy, precision, recall;

    nlohmann::json to_json() const;
};

struct CompareReport {
    Dimension dimension = Dimension::Processing;
    CompareSpec spec;
    // cells[m][s] = metrics of method m (kCompareMethods order) on seed s.
    std::vector<std::vector<Metrics>> cells;
    std::vector<Aggregate> accuracy_by_method; // kCompareMethods order
    std::vector<MethodComparison> tests;       // sl-ssl, sl-tri, ssl-tri

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

CompareReport compare_methods(const LearningDataset& ds, Dimension dim,
                              const CompareSpec& spec);

} // namespace stylemill
