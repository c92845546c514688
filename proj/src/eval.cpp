#include "stylemill/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stylemill/errors.hpp"
#include "stylemill/rng.hpp"
#include "stylemill/sampling.hpp"

namespace stylemill {

nlohmann::json ConfusionMatrix::to_json() const {
    return {{"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn}};
}

ConfusionMatrix confusion(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw DataError("prediction and truth lists differ in length");
    if (predicted.empty()) throw DataError("cannot build a confusion matrix from zero pairs");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (truth[i] == +1) (predicted[i] == +1 ? cm.tp : cm.fn)++;
        else (predicted[i] == +1 ? cm.fp : cm.tn)++;
    }
    return cm;
}

nlohmann::json OptMetric::to_json() const {
    if (value) return *value;
    return {{"absent", reason}};
}

nlohmann::json Metrics::to_json() const {
    return {{"confusion", cm.to_json()},   {"accuracy", accuracy.to_json()},
            {"precision", precision.to_json()}, {"recall", recall.to_json()},
            {"specificity", specificity.to_json()}, {"auc", auc.to_json()}};
}

namespace {

OptMetric ratio_or_absent(std::uint64_t num, std::uint64_t den, const char* why) {
    if (den == 0) return OptMetric::absent(why);
    return OptMetric::of(static_cast<double>(num) / static_cast<double>(den));
}

} // namespace

Metrics metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DataError("confusion matrix holds zero pairs");
    Metrics m;
    m.cm = cm;
    m.accuracy = OptMetric::of(static_cast<double>(cm.tp + cm.tn) /
                               static_cast<double>(cm.total()));
    m.precision = ratio_or_absent(cm.tp, cm.tp + cm.fp, "no positive predictions");
    m.recall = ratio_or_absent(cm.tp, cm.tp + cm.fn, "no positive truth");
    m.specificity = ratio_or_absent(cm.tn, cm.tn + cm.fp, "no negative truth");
    m.auc = OptMetric::absent("no scores supplied");
    return m;
}

double auc_roc(const std::vector<double>& scores, const std::vector<int>& truth) {
    if (scores.size() != truth.size())
        throw DataError("score and truth lists differ in length");
    double pairs = 0.0, wins = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] != +1) continue;
        for (std::size_t j = 0; j < truth.size(); ++j) {
            if (truth[j] == +1) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    if (pairs == 0.0) throw DataError("AUC needs both classes in the truth");
    return wins / pairs;
}

Metrics evaluate(const std::vector<int>& predicted, const std::vector<double>& scores,
                 const std::vector<int>& truth) {
    Metrics m = metrics(confusion(predicted, truth));
    bool pos = std::find(truth.begin(), truth.end(), +1) != truth.end();
    bool neg = std::find(truth.begin(), truth.end(), -1) != truth.end();
    if (pos && neg) m.auc = OptMetric::of(auc_roc(scores, truth));
    else m.auc = OptMetric::absent("single-class truth");
    return m;
}

double self_taught_accuracy(std::size_t n_labeled, std::size_t n_correct_predictions,
                            std::size_t total) {
    if (total == 0) throw DataError("self-taught accuracy needs a non-empty dataset");
    if (n_labeled + n_correct_predictions > total)
        throw DataError("labeled plus correct counts exceed the dataset size");
    return static_cast<double>(n_labeled + n_correct_predictions) / static_cast<double>(total);
}

nlohmann::json Aggregate::to_json() const {
    return {{"mean", mean.to_json()}, {"stddev", stddev.to_json()}, {"n_present", n_present}};
}

Aggregate aggregate(const std::vector<OptMetric>& values) {
    Aggregate a;
    std::vector<double> present;
    for (const auto& v : values)
        if (v.value) present.push_back(*v.value);
    a.n_present = present.size();
    if (present.empty()) {
        a.mean = OptMetric::absent("metric absent in every fold");
        a.stddev = OptMetric::absent("metric absent in every fold");
        return a;
    }
    a.mean = OptMetric::of(mean(present));
    if (present.size() < 2) a.stddev = OptMetric::absent("needs at least two values");
    else a.stddev = OptMetric::of(sample_stddev(present));
    return a;
}

nlohmann::json CvReport::to_json() const {
    nlohmann::json jf = nlohmann::json::array();
    for (const auto& f : folds) jf.push_back(f.to_json());
    return {{"k", k},
            {"folds", jf},
            {"accuracy", accuracy.to_json()},
            {"precision", precision.to_json()},
            {"recall", recall.to_json()},
            {"specificity", specificity.to_json()},
            {"auc", auc.to_json()}};
}

CvReport cross_validate(const LearningDataset& ds, Dimension dim, const TrainConfig& cfg,
                        std::size_t k, std::uint64_t seed, bool stratified) {
    cfg.validate();
    LearningDataset pool = restrict_rows(ds, labeled_row_indices(ds, dim));
    LabeledMatrix m = labeled_matrix(pool, dim);

    FoldPlan plan = stratified ? make_folds(m.y, k, seed)
                               : make_folds(m.y.size(), k, seed);
    auto folds = plan.fold_indices();

    CvReport report;
    report.k = k;
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::vector<double>> train_x, test_x;
        std::vector<int> train_y, test_y;
        for (std::size_t g = 0; g < k; ++g) {
            for (std::size_t i : folds[g]) {
                (g == f ? test_x : train_x).push_back(m.x[i]);
                (g == f ? test_y : train_y).push_back(m.y[i]);
            }
        }
        bool pos = std::find(train_y.begin(), train_y.end(), +1) != train_y.end();
        bool neg = std::find(train_y.begin(), train_y.end(), -1) != train_y.end();
        if (!pos || !neg)
            throw DataError("fold " + std::to_string(f) +
                            " training set has a single class; use stratified folds");
        TrainedModel model = fit(train_x, train_y, ds.feature_names, dim, cfg);
        auto pred = model.predict(test_x);
        report.folds.push_back(evaluate(pred.poles, pred.scores, test_y));
    }

    auto collect = [&](OptMetric Metrics::* member) {
        std::vector<OptMetric> vals;
        for (const auto& fold : report.folds) vals.push_back(fold.*member);
        return aggregate(vals);
    };
    report.accuracy = collect(&Metrics::accuracy);
    report.precision = collect(&Metrics::precision);
    report.recall = collect(&Metrics::recall);
    report.specificity = collect(&Metrics::specificity);
    report.auc = collect(&Metrics::auc);
    return report;
}

// --- sweep ---

void SweepSpec::validate() const {
    if (ratios.empty()) throw ConfigError("ratio sweep needs at least one ratio");
    for (double r : ratios)
        if (!(r > 0.0) || r > 1.0)
            throw ConfigError("labeled ratio must lie in (0, 1], got " + std::to_string(r));
    if (final_kinds.empty()) throw ConfigError("ratio sweep needs at least one model kind");
    if (seeds.empty()) throw ConfigError("ratio sweep needs at least one seed");
    if (!(holdout_fraction > 0.0) || !(holdout_fraction < 1.0))
        throw ConfigError("holdout fraction must lie in (0, 1)");
    for (const auto& kind : final_kinds) {
        TrainConfig probe = base;
        probe.kind = kind;
        probe.validate();
    }
}

nlohmann::json SweepSpec::to_json() const {
    TrainConfig labeling_holder;
    labeling_holder.svm = labeling;
    return {{"ratios", ratios},
            {"final_kinds", final_kinds},
            {"seeds", seeds},
            {"labeling", labeling_holder.to_json().at("svm")},
            {"base", base.to_json()},
            {"holdout_fraction", holdout_fraction}};
}

SweepSpec SweepSpec::from_json(const nlohmann::json& j) {
    SweepSpec s;
    try {
        s.ratios = j.value("ratios", s.ratios);
        s.final_kinds = j.value("final_kinds", s.final_kinds);
        s.seeds = j.value("seeds", s.seeds);
        if (j.contains("labeling"))
            s.labeling = TrainConfig::from_json({{"svm", j.at("labeling")}}).svm;
        if (j.contains("base")) s.base = TrainConfig::from_json(j.at("base"));
        s.holdout_fraction = j.value("holdout_fraction", s.holdout_fraction);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed sweep spec: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json SweepCell::to_json() const {
    return {{"ratio", ratio},
            {"kind", kind},
            {"seed", seed},
            {"n_labeled", n_labeled},
            {"n_unlabeled", n_unlabeled},
            {"n_holdout", n_holdout},
            {"holdout", holdout.to_json()},
            {"accuracy_st", accuracy_st.to_json()}};
}

namespace {

std::string csv_opt(const OptMetric& m) {
    return m.value ? nlohmann::json(*m.value).dump() : std::string();
}

void require_fully_labeled(const LearningDataset& ds, Dimension dim, const char* what) {
    const auto& labels = ds.labels_for(dim);
    for (const auto& row : ds.rows)
        if (!labels.count(row.user_id))
            throw DataError(std::string(what) + " needs every row labeled for dimension " +
                            dimension_name(dim) + "; user '" + row.user_id + "' is not");
}

// Evaluates a model against a withheld-truth map over the given rows.
Metrics score_against(const TrainedModel& model, const std::vector<DatasetRow>& rows,
                      const std::map<std::string, DimensionLabel>& truth) {
    std::vector<int> preds, y;
    std::vector<double> scores;
    for (const auto& row : rows) {
        double s = model.decision_value(row.counts);
        scores.push_back(s);
        preds.push_back(s >= 0.0 ? +1 : -1);
        y.push_back(truth.at(row.user_id).pole_sign());
    }
    return evaluate(preds, scores, y);
}

} // namespace

nlohmann::json SweepReport::to_json() const {
    nlohmann::json jc = nlohmann::json::array();
    for (const auto& c : cells) jc.push_back(c.to_json());
    return {{"dimension", dimension_name(dimension)}, {"spec", spec.to_json()}, {"cells", jc}};
}

std::string SweepReport::to_csv() const {
    std::ostringstream out;
    out << "dimension,ratio,kind,seed,n_labeled,n_unlabeled,n_holdout,"
           "accuracy,precision,recall,specificity,auc,accuracy_st\n";
    for (const auto& c : cells) {
        out << dimension_name(dimension) << ',' << nlohmann::json(c.ratio).dump() << ','
            << c.kind << ',' << c.seed << ',' << c.n_labeled << ',' << c.n_unlabeled << ','
            << c.n_holdout << ',' << csv_opt(c.holdout.accuracy) << ','
            << csv_opt(c.holdout.precision) << ',' << csv_opt(c.holdout.recall) << ','
            << csv_opt(c.holdout.specificity) << ',' << csv_opt(c.holdout.auc) << ','
            << csv_opt(c.accuracy_st) << '\n';
    }
    return out.str();
}

SweepReport ratio_sweep(const LearningDataset& ds, Dimension dim, const SweepSpec& spec) {
    spec.validate();
    require_fully_labeled(ds, dim, "ratio sweep");
    SweepReport report;
    report.dimension = dim;
    report.spec = spec;

    for (std::uint64_t seed : spec.seeds) {
        // One holdout per seed, shared by every (ratio, kind) cell so cells
        // within a seed are directly comparable.
        SplitResult carve = split_labeled_unlabeled(ds, dim, 1.0 - spec.holdout_fraction,
                                                    derive_seed(seed, 0));
        const LearningDataset& pool = carve.labeled;
        for (double ratio : spec.ratios) {
            SplitResult split = split_labeled_unlabeled(pool, dim, ratio, derive_seed(seed, 1));
            for (const auto& kind : spec.final_kinds) {
                TrainConfig final_cfg = spec.base;
                final_cfg.kind = kind;
                SelfTrainRun run =
                    self_train(split.labeled, split.unlabeled, dim, spec.labeling, final_cfg);

                SweepCell cell;
                cell.ratio = ratio;
                cell.kind = kind;
                cell.seed = seed;
                cell.n_labeled = run.n_labeled;
                cell.n_unlabeled = run.n_unlabeled;
                cell.n_holdout = carve.unlabeled.rows.size();
                cell.holdout = score_against(run.final_model, carve.unlabeled.rows,
                                             carve.withheld);
                if (split.unlabeled.rows.empty()) {
                    cell.accuracy_st = OptMetric::absent("no unlabeled rows at ratio 1");
                } else {
                    std::size_t correct = 0;
                    for (const auto& row : split.unlabeled.rows)
                        if (run.labeling_model.predict_one(row.counts) ==
                            split.withheld.at(row.user_id).pole_sign())
                            ++correct;
                    cell.accuracy_st = OptMetric::of(self_taught_accuracy(
                        run.n_labeled, correct, run.n_labeled + run.n_unlabeled));
                }
                report.cells.push_back(std::move(cell));
            }
        }
    }
    return report;
}

// --- method comparison ---

void CompareSpec::validate() const {
    if (!(ratio > 0.0) || ratio > 1.0)
        throw ConfigError("labeled ratio must lie in (0, 1], got " + std::to_string(ratio));
    if (seeds.size() < 2) throw ConfigError("method comparison needs at least two seeds");
    if (!(holdout_fraction > 0.0) || !(holdout_fraction < 1.0))
        throw ConfigError("holdout fraction must lie in (0, 1)");
    final_config.validate();
    for (const auto& b : tri.base) b.validate();
}

nlohmann::json CompareSpec::to_json() const {
    TrainConfig labeling_holder;
    labeling_holder.svm = labeling;
    nlohmann::json tri_base = nlohmann::json::array();
    for (const auto& b : tri.base) tri_base.push_back(b.to_json());
    return {{"ratio", ratio},
            {"seeds", seeds},
            {"labeling", labeling_holder.to_json().at("svm")},
            {"final", final_config.to_json()},
            {"tri",
             {{"base", tri_base}, {"bootstrap", tri.bootstrap}, {"max_rounds", tri.max_rounds}}},
            {"holdout_fraction", holdout_fraction}};
}

CompareSpec CompareSpec::from_json(const nlohmann::json& j) {
    CompareSpec s;
    try {
        s.ratio = j.value("ratio", s.ratio);
        s.seeds = j.value("seeds", s.seeds);
        if (j.contains("labeling"))
            s.labeling = TrainConfig::from_json({{"svm", j.at("labeling")}}).svm;
        if (j.contains("final")) s.final_config = TrainConfig::from_json(j.at("final"));
        if (j.contains("tri")) {
            const auto& jt = j.at("tri");
            if (jt.contains("base")) {
                const auto& arr = jt.at("base");
                if (arr.size() != 3)
                    throw ConfigError("tri-training needs exactly three base configs");
                for (std::size_t i = 0; i < 3; ++i)
                    s.tri.base[i] = TrainConfig::from_json(arr[i]);
            }
            s.tri.bootstrap = jt.value("bootstrap", s.tri.bootstrap);
            s.tri.max_rounds = jt.value("max_rounds", s.tri.max_rounds);
        }
        s.holdout_fraction = j.value("holdout_fraction", s.holdout_fraction);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed compare spec: ") + e.what());
    }
    s.validate();
    return s;
}

nlohmann::json TTestCell::to_json() const {
    if (!result) return {{"absent", reason}};
    return {{"t_value", result->t_value},
            {"p_value", result->p_value},
            {"df", result->df},
            {"n_pairs", result->n_pairs}};
}

nlohmann::json MethodComparison::to_json() const {
    return {{"first", first},
            {"second", second},
            {"accuracy", accuracy.to_json()},
            {"precision", precision.to_json()},
            {"recall", recall.to_json()}};
}

nlohmann::json CompareReport::to_json() const {
    nlohmann::json jm = nlohmann::json::object();
    nlohmann::json jagg = nlohmann::json::object();
    for (std::size_t m = 0; m < kCompareMethods.size(); ++m) {
        nlohmann::json per_seed = nlohmann::json::array();
        for (const auto& cell : cells[m]) per_seed.push_back(cell.to_json());
        jm[kCompareMethods[m]] = per_seed;
        jagg[kCompareMethods[m]] = accuracy_by_method[m].to_json();
    }
    nlohmann::json jt = nlohmann::json::array();
    for (const auto& t : tests) jt.push_back(t.to_json());
    return {{"dimension", dimension_name(dimension)},
            {"spec", spec.to_json()},
            {"methods", jm},
            {"accuracy_by_method", jagg},
            {"paired_t_tests", jt}};
}

std::string CompareReport::to_csv() const {
    std::ostringstream out;
    out << "dimension,method,seed,accuracy,precision,recall,specificity,auc\n";
    for (std::size_t m = 0; m < kCompareMethods.size(); ++m)
        for (std::size_t s = 0; s < spec.seeds.size(); ++s) {
            const Metrics& cell = cells[m][s];
            out << dimension_name(dimension) << ',' << kCompareMethods[m] << ','
                << spec.seeds[s] << ',' << csv_opt(cell.accuracy) << ','
                << csv_opt(cell.precision) << ',' << csv_opt(cell.recall) << ','
                << csv_opt(cell.specificity) << ',' << csv_opt(cell.auc) << '\n';
        }
    return out.str();
}

namespace {

TTestCell paired_cell(const std::vector<OptMetric>& a, const std::vector<OptMetric>& b) {
    std::vector<double> xs, ys;
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].value && b[i].value) {
            xs.push_back(*a[i].value);
            ys.push_back(*b[i].value);
        } else {
            ++dropped;
        }
    }
    TTestCell cell;
    if (xs.size() < 2) {
        cell.reason = "fewer than two complete pairs";
        return cell;
    }
    try {
        cell.result = paired_t_test(xs, ys);
        if (dropped > 0)
            cell.reason = std::to_string(dropped) + " pair(s) dropped for absent metrics";
    } catch (const NumericError& e) {
        cell.reason = e.what();
    }
    return cell;
}

} // namespace

CompareReport compare_methods(const LearningDataset& ds, Dimension dim,
                              const CompareSpec& spec) {
    spec.validate();
    require_fully_labeled(ds, dim, "method comparison");
    CompareReport report;
    report.dimension = dim;
    report.spec = spec;
    report.cells.assign(kCompareMethods.size(), {});

    for (std::uint64_t seed : spec.seeds) {
        SplitResult carve = split_labeled_unlabeled(ds, dim, 1.0 - spec.holdout_fraction,
                                                    derive_seed(seed, 0));
        SplitResult split =
            split_labeled_unlabeled(carve.labeled, dim, spec.ratio, derive_seed(seed, 1));

        TrainedModel sl = fit(split.labeled, dim, spec.final_config);
        SelfTrainRun ssl =
            self_train(split.labeled, split.unlabeled, dim, spec.labeling, spec.final_config);
        TrainedModel tri =
            tri_train(split.labeled, split.unlabeled, dim, spec.tri, derive_seed(seed, 2));

        report.cells[0].push_back(score_against(sl, carve.unlabeled.rows, carve.withheld));
        report.cells[1].push_back(
            score_against(ssl.final_model, carve.unlabeled.rows, carve.withheld));
        report.cells[2].push_back(score_against(tri, carve.unlabeled.rows, carve.withheld));
    }

    auto column = [&](std::size_t m, OptMetric Metrics::* member) {
        std::vector<OptMetric> vals;
        for (const auto& cell : report.cells[m]) vals.push_back(cell.*member);
        return vals;
    };
    for (std::size_t m = 0; m < kCompareMethods.size(); ++m)
        report.accuracy_by_method.push_back(aggregate(column(m, &Metrics::accuracy)));

    const std::vector<std::pair<std::size_t, std::size_t>> pairs = {{0, 1}, {0, 2}, {1, 2}};
    for (auto [a, b] : pairs) {
        MethodComparison mc;
        mc.first = kCompareMethods[a];
        mc.second = kCompareMethods[b];
        mc.accuracy = paired_cell(column(a, &Metrics::accuracy), column(b, &Metrics::accuracy));
        mc.precision =
            paired_cell(column(a, &Metrics::precision), column(b, &Metrics::precision));
        mc.recall = paired_cell(column(a, &Metrics::recall), column(b, &Metrics::recall));
        report.tests.push_back(std::move(mc));
    }
    return report;
}

} // namespace stylemill
