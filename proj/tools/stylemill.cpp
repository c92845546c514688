// stylemill: learning-style detection from LMS event logs.
//
// Subcommands cover each pipeline stage on its own (ingest, features, split,
// train, selftrain, tritrain, eval, sweep, compare, ttest, synth, report)
// plus the orchestrated end-to-end run (run, rerun). Exit codes: 0 success,
// 1 usage/config, 2 data error, 3 numeric failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stylemill/chart.hpp"
#include "stylemill/csv.hpp"
#include "stylemill/dataset.hpp"
#include "stylemill/dimension.hpp"
#include "stylemill/errors.hpp"
#include "stylemill/eval.hpp"
#include "stylemill/features.hpp"
#include "stylemill/ingest.hpp"
#include "stylemill/learners.hpp"
#include "stylemill/pipeline.hpp"
#include "stylemill/rng.hpp"
#include "stylemill/sampling.hpp"
#include "stylemill/semisup.hpp"
#include "stylemill/stats.hpp"
#include "stylemill/synth.hpp"

using namespace stylemill;

namespace {

nlohmann::json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::string("cannot open ") + what + " '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("cannot parse ") + what + " '" + path + "': " + e.what());
    }
    return j;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write output '" + path + "'");
    out << text;
}

// Writes pretty JSON to `path`, or stdout when the path is empty.
void emit_json(const nlohmann::json& j, const std::string& path) {
    if (path.empty()) std::cout << j.dump(2) << '\n';
    else write_file(path, j.dump(2) + "\n");
}

nlohmann::json withheld_json(Dimension dim,
                             const std::map<std::string, DimensionLabel>& withheld) {
    nlohmann::json scores = nlohmann::json::object();
    for (const auto& [user, label] : withheld) scores[user] = label.score;
    return {{"dimension", dimension_name(dim)}, {"scores", scores}};
}

// L/U split with optional under-sampling before or after. The balance stages
// draw from derived seed streams so they never perturb the split itself.
SplitResult split_with_balance(const LearningDataset& ds, Dimension dim, double ratio,
                               std::uint64_t seed, const std::string& balance) {
    if (balance == "before-split") {
        LearningDataset pool = restrict_rows(ds, labeled_row_indices(ds, dim));
        LearningDataset balanced = under_sample(pool, dim, derive_seed(seed, 10));
        std::set<std::string> kept;
        for (const auto& r : balanced.rows) kept.insert(r.user_id);
        const auto& labels = ds.labels_for(dim);
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < ds.rows.size(); ++i)
            if (kept.count(ds.rows[i].user_id) || !labels.count(ds.rows[i].user_id))
                keep.push_back(i);
        return split_labeled_unlabeled(restrict_rows(ds, keep), dim, ratio, seed);
    }
    SplitResult s = split_labeled_unlabeled(ds, dim, ratio, seed);
    if (balance == "after-split") s.labeled = under_sample(s.labeled, dim, derive_seed(seed, 11));
    return s;
}

TriTrainConfig tri_config_from_json(const nlohmann::json& j) {
    TriTrainConfig cfg;
    try {
        if (j.contains("base")) {
            const auto& arr = j.at("base");
            if (arr.size() != 3) throw ConfigError("tri-training needs exactly three base configs");
            for (std::size_t i = 0; i < 3; ++i) cfg.base[i] = TrainConfig::from_json(arr[i]);
        }
        cfg.bootstrap = j.value("bootstrap", cfg.bootstrap);
        cfg.max_rounds = j.value("max_rounds", cfg.max_rounds);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed tri-training config: ") + e.what());
    }
    return cfg;
}

// --- chart/CSV emission from report JSON (the `report` subcommand) ---

std::string csv_opt_json(const nlohmann::json& j) {
    return j.is_number() ? j.dump() : std::string();
}

std::string sweep_csv(const nlohmann::json& rep) {
    std::ostringstream out;
    out << "dimension,ratio,kind,seed,n_labeled,n_unlabeled,n_holdout,"
           "accuracy,precision,recall,specificity,auc,accuracy_st\n";
    for (const auto& c : rep.at("cells")) {
        const auto& h = c.at("holdout");
        out << rep.at("dimension").get<std::string>() << ',' << c.at("ratio").dump() << ','
            << c.at("kind").get<std::string>() << ',' << c.at("seed").dump() << ','
            << c.at("n_labeled").dump() << ',' << c.at("n_unlabeled").dump() << ','
            << c.at("n_holdout").dump() << ',' << csv_opt_json(h.at("accuracy")) << ','
            << csv_opt_json(h.at("precision")) << ',' << csv_opt_json(h.at("recall")) << ','
            << csv_opt_json(h.at("specificity")) << ',' << csv_opt_json(h.at("auc")) << ','
            << csv_opt_json(c.at("accuracy_st")) << '\n';
    }
    return out.str();
}

std::string sweep_chart(const nlohmann::json& rep) {
    // One series per final-model kind; each point is the mean holdout
    // accuracy at one ratio, averaged over the seeds where it is defined.
    std::vector<std::string> kinds;
    std::map<std::string, std::map<double, std::pair<double, std::size_t>>> sums;
    for (const auto& c : rep.at("cells")) {
        std::string kind = c.at("kind").get<std::string>();
        if (!sums.count(kind)) kinds.push_back(kind);
        const auto& acc = c.at("holdout").at("accuracy");
        if (!acc.is_number()) {
            sums[kind];
            continue;
        }
        auto& cell = sums[kind][c.at("ratio").get<double>()];
        cell.first += acc.get<double>();
        cell.second += 1;
    }
    std::vector<ChartSeries> series;
    for (const auto& kind : kinds) {
        ChartSeries s{kind, {}};
        for (const auto& [ratio, agg] : sums[kind])
            if (agg.second > 0) s.points.emplace_back(ratio, agg.first / agg.second);
        series.push_back(std::move(s));
    }
    return render_line_chart("Accuracy vs labeled ratio (" +
                                 rep.at("dimension").get<std::string>() + ")",
                             "labeled ratio", "accuracy", series);
}

std::string compare_csv(const nlohmann::json& rep) {
    std::ostringstream out;
    out << "dimension,method,seed,accuracy,precision,recall,specificity,auc\n";
    const auto& methods = rep.at("methods");
    const auto& seeds = rep.at("spec").at("seeds");
    for (const auto& method : kCompareMethods) {
        const auto& cells = methods.at(method);
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const auto& cell = cells.at(s);
            out << rep.at("dimension").get<std::string>() << ',' << method << ','
                << seeds.at(s).dump() << ',' << csv_opt_json(cell.at("accuracy")) << ','
                << csv_opt_json(cell.at("precision")) << ',' << csv_opt_json(cell.at("recall"))
                << ',' << csv_opt_json(cell.at("specificity")) << ','
                << csv_opt_json(cell.at("auc")) << '\n';
        }
    }
    return out.str();
}

std::string compare_chart(const nlohmann::json& rep) {
    ChartBarGroup group{rep.at("dimension").get<std::string>(), {}};
    const auto& agg = rep.at("accuracy_by_method");
    for (const auto& method : kCompareMethods) {
        const auto& mean = agg.at(method).at("mean");
        if (mean.is_number()) group.bars.emplace_back(method, mean.get<double>());
    }
    return render_bar_chart("Method comparison (" + rep.at("dimension").get<std::string>() + ")",
                            "accuracy", {group});
}

std::string pipeline_csv(const nlohmann::json& rep) {
    std::ostringstream out;
    out << "dimension,labeling_cv_accuracy,final_holdout_accuracy,accuracy_st\n";
    for (const auto& d : rep) {
        out << d.at("dimension").get<std::string>() << ','
            << csv_opt_json(d.at("labeling_cv").at("accuracy").at("mean")) << ','
            << csv_opt_json(d.at("holdout").at("accuracy")) << ','
            << csv_opt_json(d.at("accuracy_st")) << '\n';
    }
    return out.str();
}

std::string pipeline_chart(const nlohmann::json& rep) {
    std::vector<ChartBarGroup> groups;
    for (const auto& d : rep) {
        ChartBarGroup g{d.at("dimension").get<std::string>(), {}};
        const auto& cv_mean = d.at("labeling_cv").at("accuracy").at("mean");
        const auto& acc = d.at("holdout").at("accuracy");
        const auto& st = d.at("accuracy_st");
        if (cv_mean.is_number()) g.bars.emplace_back("labeling_cv", cv_mean.get<double>());
        if (acc.is_number()) g.bars.emplace_back("final_holdout", acc.get<double>());
        if (st.is_number()) g.bars.emplace_back("accuracy_st", st.get<double>());
        groups.push_back(std::move(g));
    }
    return render_bar_chart("Per-dimension accuracy", "accuracy", groups);
}

// --- subcommand bodies ---

struct IngestOpts {
    std::string input, aliases, out, report;
    std::uint64_t min_events = 1;
    bool strict = false;
};

void cmd_ingest(const IngestOpts& o) {
    ParseOptions opts;
    opts.strict = o.strict;
    if (!o.aliases.empty()) {
        nlohmann::json j = read_json_file(o.aliases, "alias map");
        try {
            opts.aliases = j.get<std::map<std::string, std::vector<std::string>>>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed alias map: ") + e.what());
        }
    }
    std::ifstream in(o.input);
    if (!in) throw ConfigError("cannot open events file '" + o.input + "'");
    ParseResult parsed = parse_event_log(in, opts);
    FilterResult filtered = remove_incomplete_users(parsed.records, o.min_events);

    std::ostringstream canon;
    write_canonical_events(canon, filtered.records);
    write_file(o.out, canon.str());

    CleaningReport rep = parsed.report;
    rep.users_removed_incomplete = filtered.report.users_removed_incomplete;
    rep.rows_kept = filtered.records.size();
    emit_json({{"rows_read", rep.rows_read},
               {"rows_kept", rep.rows_kept},
               {"rows_dropped_malformed", rep.rows_dropped_malformed},
               {"fields_dropped", rep.fields_dropped},
               {"users_removed_incomplete", rep.users_removed_incomplete},
               {"out", o.out}},
              o.report);
}

struct FeaturesOpts {
    std::string events, mapping, ils, out;
};

void cmd_features(const FeaturesOpts& o) {
    std::ifstream in(o.events);
    if (!in) throw ConfigError("cannot open events file '" + o.events + "'");
    ParseResult parsed = parse_event_log(in);
    FeatureMapping mapping =
        o.mapping.empty() ? FeatureMapping::default_mapping() : FeatureMapping::load(o.mapping);
    std::vector<StudentProfile> profiles = build_profiles(parsed.records, mapping);

    AssembleResult assembled;
    if (o.ils.empty()) {
        assembled = assemble_dataset(profiles, mapping.feature_names, {});
    } else {
        std::ifstream ils(o.ils);
        if (!ils) throw ConfigError("cannot open ILS file '" + o.ils + "'");
        assembled =
            assemble_dataset_from_ils(profiles, mapping.feature_names, parse_ils_file(ils));
    }
    assembled.dataset.save(o.out);

    std::uint64_t unmapped = 0;
    for (const auto& p : profiles) unmapped += p.unmapped_events;
    emit_json({{"n_students", assembled.dataset.rows.size()},
               {"n_features", assembled.dataset.feature_names.size()},
               {"unmapped_events", unmapped},
               {"rejected_users", assembled.rejected_users},
               {"out", o.out}},
              "");
}

struct SplitOpts {
    std::string dataset, dimension = "processing", out_dir = "out";
    double ratio = 0.1;
    std::uint64_t seed = 1;
    std::size_t folds = 0;
    std::string folds_out;
    bool no_stratify = false;
};

void cmd_split(const SplitOpts& o) {
    LearningDataset ds = LearningDataset::load(o.dataset);
    Dimension dim = dimension_from_name(o.dimension);
    if (o.folds > 0) {
        LearningDataset pool = restrict_rows(ds, labeled_row_indices(ds, dim));
        LabeledMatrix m = labeled_matrix(pool, dim);
        FoldPlan plan = o.no_stratify ? make_folds(m.y.size(), o.folds, o.seed)
                                      : make_folds(m.y, o.folds, o.seed);
        nlohmann::json j = plan.to_json();
        j["users"] = m.user_ids;
        emit_json(j, o.folds_out);
        return;
    }
    SplitResult s = split_labeled_unlabeled(ds, dim, o.ratio, o.seed, !o.no_stratify);
    std::filesystem::create_directories(o.out_dir);
    s.labeled.save(o.out_dir + "/labeled.json");
    s.unlabeled.save(o.out_dir + "/unlabeled.json");
    emit_json(withheld_json(dim, s.withheld), o.out_dir + "/withheld.json");
    emit_json({{"n_labeled", s.labeled.rows.size()},
               {"n_unlabeled", s.unlabeled.rows.size()},
               {"n_withheld", s.withheld.size()},
               {"out_dir", o.out_dir}},
              "");
}

struct TrainOpts {
    std::string dataset, dimension = "processing", model, config, out;
};

void cmd_train(const TrainOpts& o) {
    LearningDataset ds = LearningDataset::load(o.dataset);
    Dimension dim = dimension_from_name(o.dimension);
    TrainConfig cfg = o.config.empty() ? TrainConfig{} : TrainConfig::load(o.config);
    if (!o.model.empty()) cfg.kind = o.model;
    cfg.validate();
    TrainedModel model = fit(ds, dim, cfg);
    model.save(o.out);
    emit_json({{"kind", model.kind},
               {"dimension", dimension_name(dim)},
               {"converged", model.converged},
               {"n_rows", labeled_row_indices(ds, dim).size()},
               {"out", o.out}},
              "");
}

struct SelfTrainOpts {
    std::string dataset, dimension = "processing", final_kind, config, balance = "none", out,
                report;
    double ratio = 0.1;
    std::uint64_t seed = 1;
};

void cmd_selftrain(const SelfTrainOpts& o) {
    LearningDataset ds = LearningDataset::load(o.dataset);
    Dimension dim = dimension_from_name(o.dimension);
    TrainConfig final_cfg = o.config.empty() ? TrainConfig{} : TrainConfig::load(o.config);
    if (!o.final_kind.empty()) final_cfg.kind = o.final_kind;
    final_cfg.validate();

    SplitResult split = split_with_balance(ds, dim, o.ratio, o.seed, o.balance);
    SelfTrainRun run = self_train(split.labeled, split.unlabeled, dim, final_cfg.svm, final_cfg);
    run.save(o.out);

    nlohmann::json summary = {{"n_labeled", run.n_labeled},
                              {"n_unlabeled", run.n_unlabeled},
                              {"final_kind", run.final_model.kind},
                              {"out", o.out}};
    // Self-taught accuracy needs ground truth for every pooled row; rows that
    // arrived unlabeled have none, so the score is reported only when whole.
    if (split.withheld.size() == split.unlabeled.rows.size() && !split.unlabeled.rows.empty()) {
        std::size_t correct = 0;
        for (const auto& row : split.unlabeled.rows)
            if (run.labeling_model.predict_one(row.counts) ==
                split.withheld.at(row.user_id).pole_sign())
                ++correct;
        summary["accuracy_st"] =
            self_taught_accuracy(run.n_labeled, correct, run.n_labeled + run.n_unlabeled);
    }
    emit_json(summary, o.report);
}

struct TriTrainOpts {
    std::string dataset, dimension = "processing", config, balance = "none", out;
    double ratio = 0.1;
    std::uint64_t seed = 1;
};

void cmd_tritrain(const TriTrainOpts& o) {
    LearningDataset ds = LearningDataset::load(o.dataset);
    Dimension dim = dimension_from_name(o.dimension);
    TriTrainConfig cfg;
    if (!o.config.empty()) cfg = tri_config_from_json(read_json_file(o.config, "tri config"));
    for (const auto& b : cfg.base) b.validate();

    SplitResult split = split_with_balance(ds, dim, o.ratio, o.seed, o.balance);
    TrainedModel model = tri_train(split.labeled, split.unlabeled, dim, cfg,
                                   derive_seed(o.seed, 1));
    model.save(o.out);
    emit_json({{"kind", model.kind},
               {"converged", model.converged},
               {"n_labeled", split.labeled.rows.size()},
               {"n_unlabeled", split.unlabeled.rows.size()},
               {"out", o.out}},
              "");
}

struct EvalOpts {
    std::string model, dataset, dimension, config, out;
    std::size_t folds = 0;
    std::uint64_t seed = 1;
    bool no_stratify = false;
};

void cmd_eval(const EvalOpts& o) {
    LearningDataset ds = LearningDataset::load(o.dataset);
    if (o.folds > 0) {
        if (o.dimension.empty())
            throw ConfigError("cross-validation needs --dimension");
        Dimension dim = dimension_from_name(o.dimension);
        TrainConfig cfg = o.config.empty() ? TrainConfig{} : TrainConfig::load(o.config);
        cfg.validate();
        CvReport rep = cross_validate(ds, dim, cfg, o.folds, o.seed, !o.no_stratify);
        nlohmann::json j = rep.to_json();
        j["dimension"] = dimension_name(dim);
        emit_json(j, o.out);
        return;
    }
    if (o.model.empty()) throw ConfigError("eval needs --model, or --folds for cross-validation");
    TrainedModel model = TrainedModel::load(o.model);
    Dimension dim = o.dimension.empty() ? model.dimension : dimension_from_name(o.dimension);
    LearningDataset pool = restrict_rows(ds, labeled_row_indices(ds, dim));
    LabeledMatrix m = labeled_matrix(pool, dim);
    TrainedModel::Predictions preds = model.predict(m.x);
    Metrics met = evaluate(preds.poles, preds.scores, m.y);
    emit_json({{"dimension", dimension_name(dim)},
               {"kind", model.kind},
               {"n_rows", m.y.size()},
               {"metrics", met.to_json()}},
              o.out);
}

struct SweepOpts {
    std::string dataset, dimension = "processing", spec, out, csv, svg;
};

void cmd_sweep(const SweepOpts& o) {
    LearningDataset ds = LearningDataset::load(o.dataset);
    Dimension dim = dimension_from_name(o.dimension);
    SweepSpec spec;
    if (!o.spec.empty()) spec = SweepSpec::from_json(read_json_file(o.spec, "sweep spec"));
    SweepReport rep = ratio_sweep(ds, dim, spec);
    nlohmann::json j = rep.to_json();
    emit_json(j, o.out);
    if (!o.csv.empty()) write_file(o.csv, rep.to_csv());
    if (!o.svg.empty()) write_file(o.svg, sweep_chart(j));
}

struct CompareOpts {
    std::string dataset, dimension = "processing", spec, out, csv, svg;
};

void cmd_compare(const CompareOpts& o) {
    LearningDataset ds = LearningDataset::load(o.dataset);
    Dimension dim = dimension_from_name(o.dimension);
    CompareSpec spec;
    if (!o.spec.empty()) spec = CompareSpec::from_json(read_json_file(o.spec, "compare spec"));
    CompareReport rep = compare_methods(ds, dim, spec);
    nlohmann::json j = rep.to_json();
    emit_json(j, o.out);
    if (!o.csv.empty()) write_file(o.csv, rep.to_csv());
    if (!o.svg.empty()) write_file(o.svg, compare_chart(j));
}

struct TTestOpts {
    std::string pairs, out;
    std::vector<double> a, b;
};

void cmd_ttest(const TTestOpts& o) {
    std::vector<double> a = o.a, b = o.b;
    if (!o.pairs.empty()) {
        if (!a.empty() || !b.empty())
            throw ConfigError("give either --pairs or --a/--b, not both");
        std::ifstream in(o.pairs);
        if (!in) throw ConfigError("cannot open pairs file '" + o.pairs + "'");
        CsvReader reader(in);
        std::vector<std::string> fields;
        while (reader.next(fields)) {
            if (fields.size() != 2)
                throw DataError("pairs file line " + std::to_string(reader.record_line()) +
                                ": expected two columns, got " + std::to_string(fields.size()));
            try {
                double x = std::stod(fields[0]);
                double y = std::stod(fields[1]);
                a.push_back(x);
                b.push_back(y);
            } catch (const std::exception&) {
                if (reader.record_line() == 1 && a.empty()) continue; // header row
                throw DataError("pairs file line " + std::to_string(reader.record_line()) +
                                ": non-numeric value");
            }
        }
    }
    TTestResult r = paired_t_test(a, b);
    emit_json({{"t_value", r.t_value},
               {"p_value", r.p_value},
               {"df", r.df},
               {"n_pairs", r.n_pairs}},
              o.out);
}

struct SynthOpts {
    std::string spec, out, truth;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::size_t bayes_draws = 0;
};

void cmd_synth(const SynthOpts& o) {
    SynthSpec spec = SynthSpec::load(o.spec);
    if (o.seed_given) spec.seed = o.seed;
    SynthResult res = generate(spec);
    res.dataset.save(o.out);
    if (!o.truth.empty()) emit_json(withheld_json(spec.dimension, res.truth), o.truth);

    nlohmann::json summary = {{"n_students", res.dataset.rows.size()},
                              {"n_labeled", res.dataset.labels_for(spec.dimension).size()},
                              {"out", o.out}};
    if (o.bayes_draws > 0) {
        BayesRateEstimate est = bayes_rate(spec, o.bayes_draws);
        summary["bayes_rate"] = {{"accuracy", est.accuracy},
                                 {"std_error", est.std_error},
                                 {"n_draws", est.n_draws}};
    }
    emit_json(summary, "");
}

struct ReportOpts {
    std::string run, format = "json", out;
};

void cmd_report(const ReportOpts& o) {
    nlohmann::json rep = read_json_file(o.run, "report file");
    std::string kind;
    if (rep.is_array()) kind = "pipeline";
    else if (rep.contains("accuracy_by_method")) kind = "compare";
    else if (rep.contains("cells")) kind = "sweep";
    else throw DataError("unrecognized report shape in '" + o.run + "'");

    if (o.format == "json") {
        emit_json(rep, o.out);
        return;
    }
    std::string text;
    if (o.format == "csv")
        text = kind == "sweep" ? sweep_csv(rep)
                               : (kind == "compare" ? compare_csv(rep) : pipeline_csv(rep));
    else if (o.format == "svg")
        text = kind == "sweep" ? sweep_chart(rep)
                               : (kind == "compare" ? compare_chart(rep) : pipeline_chart(rep));
    else
        throw ConfigError("unknown report format '" + o.format + "'");
    if (o.out.empty()) std::cout << text;
    else write_file(o.out, text);
}

struct RunOpts {
    std::string config, out_dir, dimension, balance;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double ratio = -1.0;
};

void cmd_run(const RunOpts& o) {
    nlohmann::json j = read_json_file(o.config, "pipeline config");
    if (o.seed_given) j["seed"] = o.seed;
    if (!o.out_dir.empty()) j["out_dir"] = o.out_dir;
    if (!o.dimension.empty()) j["dimensions"] = {o.dimension};
    if (!o.balance.empty()) j["balance"] = o.balance;
    if (o.ratio >= 0.0) j["ratio"] = o.ratio;
    PipelineConfig cfg = PipelineConfig::from_json(j);
    RunManifest manifest = run_pipeline(cfg);
    emit_json({{"status", manifest.status},
               {"manifest", cfg.out_dir + "/manifest.json"},
               {"outputs", manifest.outputs}},
              "");
}

struct RerunOpts {
    std::string manifest, out_dir;
};

void cmd_rerun(const RerunOpts& o) {
    RunManifest manifest = rerun(o.manifest, o.out_dir);
    emit_json({{"status", manifest.status}, {"outputs", manifest.outputs}}, "");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stylemill: semi-supervised learning-style detection from LMS event logs"};
    app.require_subcommand(1);

    auto ing = std::make_shared<IngestOpts>();
    {
        auto* c = app.add_subcommand("ingest", "Clean a raw event export into the canonical "
                                               "five-column file");
        c->add_option("--input", ing->input, "raw export CSV")->required();
        c->add_option("--aliases", ing->aliases, "JSON map of canonical field -> header spellings");
        c->add_option("--min-events", ing->min_events, "drop users with fewer events (default 1)");
        c->add_flag("--strict", ing->strict, "abort on the first malformed row");
        c->add_option("--out", ing->out, "canonical events CSV")->required();
        c->add_option("--report", ing->report, "cleaning report JSON (default stdout)");
        c->callback([ing] { cmd_ingest(*ing); });
    }

    auto fea = std::make_shared<FeaturesOpts>();
    {
        auto* c = app.add_subcommand("features", "Count learning-object interactions per student "
                                                 "and attach ILS labels");
        c->add_option("--events", fea->events, "events CSV (raw or canonical)")->required();
        c->add_option("--mapping", fea->mapping, "mapping rules JSON (default: built-in)");
        c->add_option("--ils", fea->ils, "ILS questionnaire CSV (omit for an unlabeled dataset)");
        c->add_option("--out", fea->out, "dataset JSON")->required();
        c->callback([fea] { cmd_features(*fea); });
    }

    auto spl = std::make_shared<SplitOpts>();
    {
        auto* c = app.add_subcommand("split", "Carve a labeled/unlabeled split or a fold plan");
        c->add_option("--dataset", spl->dataset, "dataset JSON")->required();
        c->add_option("--dimension", spl->dimension, "dimension name (default processing)");
        c->add_option("--ratio", spl->ratio, "labeled ratio r in (0,1] (default 0.1)");
        c->add_option("--seed", spl->seed, "split seed (default 1)");
        c->add_option("--folds", spl->folds, "emit a k-fold plan instead of a split");
        c->add_option("--out", spl->folds_out, "fold plan JSON (default stdout)");
        c->add_option("--out-dir", spl->out_dir, "split output directory (default out)");
        c->add_flag("--no-stratify", spl->no_stratify, "disable pole stratification");
        c->callback([spl] { cmd_split(*spl); });
    }

    auto trn = std::make_shared<TrainOpts>();
    {
        auto* c = app.add_subcommand("train", "Fit one supervised model on the labeled rows");
        c->add_option("--dataset", trn->dataset, "dataset JSON")->required();
        c->add_option("--dimension", trn->dimension, "dimension name (default processing)");
        c->add_option("--model", trn->model, "svm|nb|tree|forest|mlp (overrides config)");
        c->add_option("--config", trn->config, "train config JSON");
        c->add_option("--out", trn->out, "model JSON")->required();
        c->callback([trn] { cmd_train(*trn); });
    }

    auto slf = std::make_shared<SelfTrainOpts>();
    {
        auto* c = app.add_subcommand("selftrain", "One-pass self-training: SVM labels U, final "
                                                  "model trains on L + U");
        c->add_option("--dataset", slf->dataset, "dataset JSON")->required();
        c->add_option("--dimension", slf->dimension, "dimension name (default processing)");
        c->add_option("--ratio", slf->ratio, "labeled ratio r in (0,1] (default 0.1)");
        c->add_option("--seed", slf->seed, "split seed (default 1)");
        c->add_option("--final", slf->final_kind, "final model kind (overrides config)");
        c->add_option("--config", slf->config, "train config JSON (svm block also sets the "
                                               "labeling SVM)");
        c->add_option("--balance", slf->balance, "none|before-split|after-split (default none)")
            ->check(CLI::IsMember({"none", "before-split", "after-split"}));
        c->add_option("--out", slf->out, "run file JSON")->required();
        c->add_option("--report", slf->report, "summary JSON (default stdout)");
        c->callback([slf] { cmd_selftrain(*slf); });
    }

    auto tri = std::make_shared<TriTrainOpts>();
    {
        auto* c = app.add_subcommand("tritrain", "Tri-training over the same labeled/unlabeled "
                                                 "split");
        c->add_option("--dataset", tri->dataset, "dataset JSON")->required();
        c->add_option("--dimension", tri->dimension, "dimension name (default processing)");
        c->add_option("--ratio", tri->ratio, "labeled ratio r in (0,1] (default 0.1)");
        c->add_option("--seed", tri->seed, "split seed; bootstraps use a derived stream");
        c->add_option("--config", tri->config, "tri config JSON {base:[3 train configs], "
                                               "bootstrap, max_rounds}");
        c->add_option("--balance", tri->balance, "none|before-split|after-split (default none)")
            ->check(CLI::IsMember({"none", "before-split", "after-split"}));
        c->add_option("--out", tri->out, "model JSON")->required();
        c->callback([tri] { cmd_tritrain(*tri); });
    }

    auto evl = std::make_shared<EvalOpts>();
    {
        auto* c = app.add_subcommand("eval", "Score a model file, or cross-validate a config");
        c->add_option("--dataset", evl->dataset, "dataset JSON")->required();
        c->add_option("--model", evl->model, "model JSON (direct evaluation)");
        c->add_option("--dimension", evl->dimension, "dimension name (default: the model's)");
        c->add_option("--folds", evl->folds, "run k-fold cross-validation instead");
        c->add_option("--config", evl->config, "train config JSON for cross-validation");
        c->add_option("--seed", evl->seed, "fold seed (default 1)");
        c->add_flag("--no-stratify", evl->no_stratify, "disable stratified folds");
        c->add_option("--out", evl->out, "report JSON (default stdout)");
        c->callback([evl] { cmd_eval(*evl); });
    }

    auto swp = std::make_shared<SweepOpts>();
    {
        auto* c = app.add_subcommand("sweep", "Labeled-ratio sweep of self-training");
        c->add_option("--dataset", swp->dataset, "fully labeled dataset JSON")->required();
        c->add_option("--dimension", swp->dimension, "dimension name (default processing)");
        c->add_option("--spec", swp->spec, "sweep spec JSON (default: built-in)");
        c->add_option("--out", swp->out, "report JSON (default stdout)");
        c->add_option("--csv", swp->csv, "also write the flat CSV here");
        c->add_option("--svg", swp->svg, "also write the line chart here");
        c->callback([swp] { cmd_sweep(*swp); });
    }

    auto cmp = std::make_shared<CompareOpts>();
    {
        auto* c = app.add_subcommand("compare", "SL vs SSL vs tri-training with paired t-tests");
        c->add_option("--dataset", cmp->dataset, "fully labeled dataset JSON")->required();
        c->add_option("--dimension", cmp->dimension, "dimension name (default processing)");
        c->add_option("--spec", cmp->spec, "compare spec JSON (default: built-in)");
        c->add_option("--out", cmp->out, "report JSON (default stdout)");
        c->add_option("--csv", cmp->csv, "also write the flat CSV here");
        c->add_option("--svg", cmp->svg, "also write the bar chart here");
        c->callback([cmp] { cmd_compare(*cmp); });
    }

    auto tst = std::make_shared<TTestOpts>();
    {
        auto* c = app.add_subcommand("ttest", "Two-sided paired t-test");
        c->add_option("--pairs", tst->pairs, "CSV of value pairs (optional header)");
        c->add_option("--a", tst->a, "first sample (repeat or comma-separate)")->delimiter(',');
        c->add_option("--b", tst->b, "second sample, paired with --a")->delimiter(',');
        c->add_option("--out", tst->out, "result JSON (default stdout)");
        c->callback([tst] { cmd_ttest(*tst); });
    }

    auto syn = std::make_shared<SynthOpts>();
    {
        auto* c = app.add_subcommand("synth", "Generate a synthetic dataset with known poles");
        c->add_option("--spec", syn->spec, "generator spec JSON")->required();
        auto* seed_opt = c->add_option("--seed", syn->seed, "override the spec seed");
        c->add_option("--out", syn->out, "dataset JSON")->required();
        c->add_option("--truth", syn->truth, "ground-truth JSON (user -> score)");
        c->add_option("--bayes-draws", syn->bayes_draws,
                      "estimate the Bayes-optimal accuracy with this many draws");
        c->callback([syn, seed_opt] {
            syn->seed_given = seed_opt->count() > 0;
            cmd_synth(*syn);
        });
    }

    auto rpt = std::make_shared<ReportOpts>();
    {
        auto* c = app.add_subcommand("report", "Re-emit a report file as json, csv, or svg");
        c->add_option("--run", rpt->run, "report JSON (sweep, compare, or pipeline)")->required();
        c->add_option("--format", rpt->format, "json|csv|svg (default json)")
            ->check(CLI::IsMember({"json", "csv", "svg"}));
        c->add_option("--out", rpt->out, "output file (default stdout)");
        c->callback([rpt] { cmd_report(*rpt); });
    }

    auto run = std::make_shared<RunOpts>();
    {
        auto* c = app.add_subcommand("run", "Execute the full pipeline from a config file");
        c->add_option("--config", run->config, "pipeline config JSON")->required();
        auto* seed_opt = c->add_option("--seed", run->seed, "override the config seed");
        c->add_option("--out-dir", run->out_dir, "override the output directory");
        c->add_option("--dimension", run->dimension, "restrict to one dimension");
        c->add_option("--balance", run->balance, "override none|before-split|after-split")
            ->check(CLI::IsMember({"none", "before-split", "after-split"}));
        c->add_option("--ratio", run->ratio, "override the labeled ratio");
        c->callback([run, seed_opt] {
            run->seed_given = seed_opt->count() > 0;
            cmd_run(*run);
        });
    }

    auto rrn = std::make_shared<RerunOpts>();
    {
        auto* c = app.add_subcommand("rerun", "Re-execute a recorded run after verifying its "
                                              "input digests");
        c->add_option("--manifest", rrn->manifest, "manifest JSON from a previous run")->required();
        c->add_option("--out-dir", rrn->out_dir, "redirect outputs (default: original directory)");
        c->callback([rrn] { cmd_rerun(*rrn); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
