#include "stylemill/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <utility>

#include "stylemill/chart.hpp"
#include "stylemill/errors.hpp"
#include "stylemill/features.hpp"
#include "stylemill/ingest.hpp"
#include "stylemill/rng.hpp"
#include "stylemill/sampling.hpp"
#include "stylemill/semisup.hpp"

namespace stylemill {

namespace fs = std::filesystem;

void PipelineConfig::validate() const {
    if (events_path.empty()) throw ConfigError("pipeline config needs an events path");
    if (mapping_path.empty()) throw ConfigError("pipeline config needs a mapping path");
    if (ils_path.empty()) throw ConfigError("pipeline config needs an ILS responses path");
    if (out_dir.empty()) throw ConfigError("pipeline config needs an output directory");
    if (dimensions.empty()) throw ConfigError("pipeline config selects no dimensions");
    if (!seed_set) throw ConfigError("pipeline config must set an explicit seed");
    if (balance != "none" && balance != "before-split" && balance != "after-split")
        throw ConfigError("balance must be none, before-split, or after-split; got '" +
                          balance + "'");
    if (!(ratio > 0.0) || ratio > 1.0)
        throw ConfigError("labeled ratio must lie in (0, 1], got " + std::to_string(ratio));
    if (!(holdout_fraction > 0.0) || !(holdout_fraction < 1.0))
        throw ConfigError("holdout fraction must lie in (0, 1)");
    if (cv_folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    for (const auto& fmt : emit)
        if (fmt != "json" && fmt != "csv" && fmt != "svg")
            throw ConfigError("unknown emit format '" + fmt + "'");
    final_config.validate();
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json dims = nlohmann::json::array();
    for (Dimension d : dimensions) dims.push_back(dimension_name(d));
    TrainConfig labeling_holder;
    labeling_holder.svm = labeling;
    return {{"events", events_path},
            {"mapping", mapping_path},
            {"ils", ils_path},
            {"out_dir", out_dir},
            {"dimensions", dims},
            {"min_events", min_events},
            {"balance", balance},
            {"ratio", ratio},
            {"holdout_fraction", holdout_fraction},
            {"cv_folds", cv_folds},
            {"seed", seed},
            {"labeling", labeling_holder.to_json().at("svm")},
            {"final", final_config.to_json()},
            {"emit", emit}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig c;
    try {
        c.events_path = j.value("events", c.events_path);
        c.mapping_path = j.value("mapping", c.mapping_path);
        c.ils_path = j.value("ils", c.ils_path);
        c.out_dir = j.value("out_dir", c.out_dir);
        if (j.contains("dimensions")) {
            c.dimensions.clear();
            for (const auto& jd : j.at("dimensions"))
                c.dimensions.push_back(dimension_from_name(jd.get<std::string>()));
        }
        c.min_events = j.value("min_events", c.min_events);
        c.balance = j.value("balance", c.balance);
        c.ratio = j.value("ratio", c.ratio);
        c.holdout_fraction = j.value("holdout_fraction", c.holdout_fraction);
        c.cv_folds = j.value("cv_folds", c.cv_folds);
        if (j.contains("seed")) {
            c.seed = j.at("seed").get<std::uint64_t>();
            c.seed_set = true;
        }
        if (j.contains("labeling"))
            c.labeling = TrainConfig::from_json({{"svm", j.at("labeling")}}).svm;
        if (j.contains("final")) c.final_config = TrainConfig::from_json(j.at("final"));
        c.emit = j.value("emit", c.emit);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed pipeline config: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open pipeline config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse pipeline config '" + path + "': " + e.what());
    }
    return from_json(j);
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json jt = nlohmann::json::array();
    for (const auto& [stage, ms] : timings_ms) jt.push_back({{"stage", stage}, {"ms", ms}});
    return {{"config", config},   {"inputs", inputs},   {"versions", versions},
            {"timings", jt},      {"outputs", outputs}, {"status", status},
            {"error", error}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
    RunManifest m;
    try {
        m.config = j.at("config");
        m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
        m.versions = j.at("versions").get<std::map<std::string, std::string>>();
        for (const auto& jt : j.at("timings"))
            m.timings_ms.emplace_back(jt.at("stage").get<std::string>(),
                                      jt.at("ms").get<double>());
        m.outputs = j.at("outputs").get<std::vector<std::string>>();
        m.status = j.at("status").get<std::string>();
        m.error = j.at("error").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void RunManifest::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest '" + path + "'");
    out << to_json().dump(2) << '\n';
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("cannot parse manifest '" + path + "': " + e.what());
    }
    return from_json(j);
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input '" + path + "' for digesting");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::ostringstream hex;
    hex << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(buf.str());
    return hex.str();
}

namespace {

class StageClock {
  public:
    explicit StageClock(RunManifest& manifest) : manifest_(manifest) {}

    template <typename F>
    auto run(const std::string& stage, F&& f) {
        auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            record(stage, start);
        } else {
            auto result = f();
            record(stage, start);
            return result;
        }
    }

  private:
    void record(const std::string& stage,
                std::chrono::steady_clock::time_point start) {
        double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
        manifest_.timings_ms.emplace_back(stage, ms);
    }

    RunManifest& manifest_;
};

void write_text(RunManifest& manifest, const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write output '" + path + "'");
    out << text;
    manifest.outputs.push_back(path);
}

struct DimensionOutcome {
    nlohmann::json report;
    double labeling_cv_accuracy = 0.0;
    double final_holdout_accuracy = 0.0;
    double accuracy_st = 0.0;
};

DimensionOutcome run_dimension(const PipelineConfig& cfg, const LearningDataset& full,
                               Dimension dim, RunManifest& manifest) {
    std::uint64_t dim_seed = derive_seed(cfg.seed, dimension_index(dim));

    LearningDataset pool = restrict_rows(full, labeled_row_indices(full, dim));
    if (pool.rows.empty())
        throw DataError("no labeled rows for dimension " + dimension_name(dim));
    if (cfg.balance == "before-split") pool = under_sample(pool, dim, derive_seed(dim_seed, 0));

    SplitResult carve =
        split_labeled_unlabeled(pool, dim, 1.0 - cfg.holdout_fraction, derive_seed(dim_seed, 1));
    LearningDataset working = carve.labeled;

    // Table-V-style check of the labeling stage on its own: k-fold CV of the
    // labeling SVM over the working pool.
    TrainConfig labeling_cfg;
    labeling_cfg.kind = "svm";
    labeling_cfg.svm = cfg.labeling;
    CvReport cv =
        cross_validate(working, dim, labeling_cfg, cfg.cv_folds, derive_seed(dim_seed, 2));

    SplitResult split = split_labeled_unlabeled(working, dim, cfg.ratio, derive_seed(dim_seed, 3));
    LearningDataset labeled_part = split.labeled;
    if (cfg.balance == "after-split")
        labeled_part = under_sample(labeled_part, dim, derive_seed(dim_seed, 4));

    SelfTrainRun run =
        self_train(labeled_part, split.unlabeled, dim, cfg.labeling, cfg.final_config);

    // Final model vs the held-out truth.
    std::vector<int> preds, truth;
    std::vector<double> scores;
    for (const auto& row : carve.unlabeled.rows) {
        double s = run.final_model.decision_value(row.counts);
        scores.push_back(s);
        preds.push_back(s >= 0.0 ? +1 : -1);
        truth.push_back(carve.withheld.at(row.user_id).pole_sign());
    }
    Metrics holdout = evaluate(preds, scores, truth);

    // Self-taught accuracy over the split pool.
    std::size_t correct = 0;
    for (const auto& row : split.unlabeled.rows)
        if (run.labeling_model.predict_one(row.counts) ==
            split.withheld.at(row.user_id).pole_sign())
            ++correct;
    double acc_st = self_taught_accuracy(run.n_labeled, correct,
                                         run.n_labeled + run.n_unlabeled);

    std::string prefix = cfg.out_dir + "/" + dimension_name(dim);
    run.labeling_model.save(prefix + "_labeling_model.json");
    manifest.outputs.push_back(prefix + "_labeling_model.json");
    run.final_model.save(prefix + "_final_model.json");
    manifest.outputs.push_back(prefix + "_final_model.json");
    run.save(prefix + "_run.json");
    manifest.outputs.push_back(prefix + "_run.json");

    DimensionOutcome outcome;
    outcome.labeling_cv_accuracy = cv.accuracy.mean.value.value_or(0.0);
    outcome.final_holdout_accuracy = holdout.accuracy.value.value_or(0.0);
    outcome.accuracy_st = acc_st;
    outcome.report = {{"dimension", dimension_name(dim)},
                      {"n_pool", pool.rows.size()},
                      {"n_holdout", carve.unlabeled.rows.size()},
                      {"n_labeled", run.n_labeled},
                      {"n_unlabeled", run.n_unlabeled},
                      {"labeling_cv", cv.to_json()},
                      {"holdout", holdout.to_json()},
                      {"accuracy_st", acc_st}};
    return outcome;
}

} // namespace

RunManifest run_pipeline(const PipelineConfig& config) {
    config.validate();
    for (const std::string& path : {config.events_path, config.mapping_path, config.ils_path})
        if (!fs::exists(path)) throw ConfigError("input file '" + path + "' does not exist");

    RunManifest manifest;
    manifest.config = config.to_json();
    manifest.inputs = {{config.events_path, file_digest(config.events_path)},
                       {config.mapping_path, file_digest(config.mapping_path)},
                       {config.ils_path, file_digest(config.ils_path)}};
    manifest.versions = {{"stylemill", "1.0.0"},
                         {"dataset_schema", std::to_string(kDatasetSchemaVersion)},
                         {"model_schema", std::to_string(kModelSchemaVersion)}};

    fs::create_directories(config.out_dir);
    StageClock clock(manifest);
    bool emit_csv = std::find(config.emit.begin(), config.emit.end(), "csv") != config.emit.end();
    bool emit_svg = std::find(config.emit.begin(), config.emit.end(), "svg") != config.emit.end();

    try {
        auto [records, cleaning] = clock.run("ingest", [&] {
            std::ifstream in(config.events_path);
            if (!in) throw DataError("cannot open events file '" + config.events_path + "'");
            ParseResult parsed = parse_event_log(in);
            FilterResult filtered = remove_incomplete_users(parsed.records, config.min_events);
            CleaningReport merged = parsed.report;
            merged.users_removed_incomplete = filtered.report.users_removed_incomplete;
            merged.rows_kept = filtered.records.size();
            return std::make_pair(std::move(filtered.records), merged);
        });
        {
            std::ostringstream cleaned;
            write_canonical_events(cleaned, records);
            write_text(manifest, config.out_dir + "/cleaned_events.csv", cleaned.str());
        }

        LearningDataset dataset = clock.run("features", [&] {
            FeatureMapping mapping = FeatureMapping::load(config.mapping_path);
            std::vector<StudentProfile> profiles = build_profiles(records, mapping);
            std::ifstream ils(config.ils_path);
            if (!ils) throw DataError("cannot open ILS file '" + config.ils_path + "'");
            std::vector<ILSResponse> responses = parse_ils_file(ils);
            AssembleResult assembled =
                assemble_dataset_from_ils(profiles, mapping.feature_names, responses);

            nlohmann::json ingest_report = {
                {"rows_read", cleaning.rows_read},
                {"rows_kept", cleaning.rows_kept},
                {"rows_dropped_malformed", cleaning.rows_dropped_malformed},
                {"fields_dropped", cleaning.fields_dropped},
                {"users_removed_incomplete", cleaning.users_removed_incomplete},
                {"ils_rows", responses.size()},
                {"ils_rejected_users", assembled.rejected_users}};
            write_text(manifest, config.out_dir + "/ingest_report.json",
                       ingest_report.dump(2) + "\n");
            assembled.dataset.save(config.out_dir + "/dataset.json");
            manifest.outputs.push_back(config.out_dir + "/dataset.json");
            return std::move(assembled.dataset);
        });

        nlohmann::json combined = nlohmann::json::array();
        std::vector<ChartBarGroup> chart_groups;
        for (Dimension dim : config.dimensions) {
            DimensionOutcome outcome = clock.run(dimension_name(dim), [&] {
                return run_dimension(config, dataset, dim, manifest);
            });
            write_text(manifest,
                       config.out_dir + "/" + dimension_name(dim) + "_report.json",
                       outcome.report.dump(2) + "\n");
            combined.push_back(outcome.report);
            chart_groups.push_back(
                {dimension_name(dim),
                 {{"labeling_cv", outcome.labeling_cv_accuracy},
                  {"final_holdout", outcome.final_holdout_accuracy},
                  {"accuracy_st", outcome.accuracy_st}}});
        }
        write_text(manifest, config.out_dir + "/report.json", combined.dump(2) + "\n");
        if (emit_csv) {
            std::ostringstream csv;
            csv << "dimension,labeling_cv_accuracy,final_holdout_accuracy,accuracy_st\n";
            for (const auto& g : chart_groups)
                csv << g.label << ',' << fmt_double(g.bars[0].second) << ','
                    << fmt_double(g.bars[1].second) << ',' << fmt_double(g.bars[2].second)
                    << '\n';
            write_text(manifest, config.out_dir + "/report.csv", csv.str());
        }
        if (emit_svg)
            write_text(manifest, config.out_dir + "/report.svg",
                       render_bar_chart("Per-dimension accuracy", "accuracy", chart_groups));
    } catch (...) {
        manifest.status = "failed";
        try {
            throw;
        } catch (const std::exception& e) {
            manifest.error = e.what();
        } catch (...) {
            manifest.error = "unknown error";
        }
        manifest.save(config.out_dir + "/manifest.json");
        throw;
    }

    manifest.save(config.out_dir + "/manifest.json");
    return manifest;
}

RunManifest rerun(const std::string& manifest_path, const std::string& out_dir_override) {
    RunManifest manifest = RunManifest::load(manifest_path);
    PipelineConfig config = PipelineConfig::from_json(manifest.config);
    for (const auto& [path, digest] : manifest.inputs) {
        if (!fs::exists(path))
            throw DataError("manifest input '" + path + "' no longer exists");
        if (file_digest(path) != digest)
            throw DataError("manifest input '" + path + "' changed since the recorded run");
    }
    if (!out_dir_override.empty()) config.out_dir = out_dir_override;
    return run_pipeline(config);
}

} // namespace stylemill
