#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stylemill/errors.hpp"
#include "stylemill/learners.hpp"
#include "stylemill/pipeline.hpp"

using namespace stylemill;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
}

PipelineConfig sample_config(const std::string& out_dir) {
    PipelineConfig cfg;
    cfg.events_path = std::string(STYLEMILL_SOURCE_DIR) + "/data/sample/events.csv";
    cfg.mapping_path = std::string(STYLEMILL_SOURCE_DIR) + "/data/default_mapping.json";
    cfg.ils_path = std::string(STYLEMILL_SOURCE_DIR) + "/data/sample/ils.csv";
    cfg.out_dir = out_dir;
    cfg.min_events = 3;
    cfg.ratio = 0.5;
    cfg.holdout_fraction = 0.25;
    cfg.cv_folds = 5;
    cfg.seed = 7;
    cfg.seed_set = true;
    cfg.emit = {"json", "csv", "svg"};
    return cfg;
}

} // namespace

TEST_CASE("fnv1a64 matches the canonical test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("file digests are prefixed lowercase hex of the raw bytes") {
    write_file("digest_fixture.bin", "foobar");
    CHECK(file_digest("digest_fixture.bin") == "fnv1a64:85944171f73967e8");
    fs::remove("digest_fixture.bin");

    write_file("digest_empty.bin", "");
    CHECK(file_digest("digest_empty.bin") == "fnv1a64:cbf29ce484222325");
    fs::remove("digest_empty.bin");

    CHECK_THROWS_AS(file_digest("no_such_input.bin"), DataError);
}

TEST_CASE("pipeline configs enforce explicit seeds and bounded knobs") {
    PipelineConfig cfg = sample_config("unused");
    cfg.validate();

    nlohmann::json j = cfg.to_json();
    PipelineConfig back = PipelineConfig::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.seed_set);

    nlohmann::json seedless = j;
    seedless.erase("seed");
    CHECK_THROWS_AS(PipelineConfig::from_json(seedless), ConfigError);

    PipelineConfig bad = cfg;
    bad.balance = "sometimes";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.ratio = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.ratio = 1.0;
    bad.validate(); // a fully labeled run is legal
    bad = cfg;
    bad.holdout_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.cv_folds = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.emit = {"pdf"};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.dimensions.clear();
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    CHECK_THROWS_AS(PipelineConfig::load("no_such_config.json"), ConfigError);
}

TEST_CASE("run manifests round-trip through JSON and disk") {
    RunManifest m;
    m.config = {{"seed", 7}};
    m.inputs = {{"a.csv", "fnv1a64:0123456789abcdef"}};
    m.versions = {{"stylemill", "1.0.0"}};
    m.timings_ms = {{"ingest", 12.5}, {"features", 3.25}};
    m.outputs = {"out/report.json"};
    m.status = "ok";

    RunManifest back = RunManifest::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    CHECK(back.timings_ms == m.timings_ms);

    m.save("manifest_roundtrip.json");
    CHECK(RunManifest::load("manifest_roundtrip.json").to_json() == m.to_json());
    fs::remove("manifest_roundtrip.json");

    CHECK_THROWS_AS(RunManifest::from_json(nlohmann::json::object()), DataError);
    CHECK_THROWS_AS(RunManifest::load("no_such_manifest.json"), DataError);
}

TEST_CASE("the pipeline runs end to end on the bundled sample") {
    fs::remove_all("pl_out");
    fs::remove_all("pl_out2");

    PipelineConfig cfg = sample_config("pl_out");
    RunManifest manifest = run_pipeline(cfg);

    CHECK(manifest.status == "ok");
    CHECK(manifest.error.empty());
    REQUIRE(manifest.inputs.size() == 3);
    for (const auto& [path, digest] : manifest.inputs) {
        CHECK(digest.rfind("fnv1a64:", 0) == 0);
        CHECK(digest.size() == 8 + 16);
    }
    CHECK(manifest.versions.at("stylemill") == "1.0.0");
    CHECK_FALSE(manifest.timings_ms.empty());
    for (const auto& [stage, ms] : manifest.timings_ms) {
        CAPTURE(stage);
        CHECK(ms >= 0.0);
    }

    // Every recorded output exists; the key artifacts are all present.
    for (const auto& path : manifest.outputs) CHECK(fs::exists(path));
    for (const char* name :
         {"cleaned_events.csv", "ingest_report.json", "dataset.json", "report.json",
          "report.csv", "report.svg", "manifest.json", "processing_run.json",
          "processing_labeling_model.json", "processing_final_model.json",
          "understanding_report.json"})
        CHECK(fs::exists("pl_out/" + std::string(name)));

    // The saved manifest is the returned one.
    CHECK(RunManifest::load("pl_out/manifest.json").to_json() == manifest.to_json());

    // One report entry per requested dimension, in order.
    nlohmann::json report;
    std::ifstream("pl_out/report.json") >> report;
    REQUIRE(report.is_array());
    REQUIRE(report.size() == 4);
    CHECK(report[0].at("dimension") == "processing");
    CHECK(report[1].at("dimension") == "input");
    CHECK(report[3].at("dimension") == "perception");
    for (const auto& entry : report) {
        CHECK(entry.contains("n_pool"));
        CHECK(entry.contains("n_holdout"));
        CHECK(entry.contains("labeling_cv"));
        CHECK(entry.contains("holdout"));
        CHECK(entry.contains("accuracy_st"));
    }

    // Saved models reload and carry the configured kind.
    TrainedModel final_model = TrainedModel::load("pl_out/processing_final_model.json");
    CHECK(final_model.kind == cfg.final_config.kind);
    CHECK(final_model.dimension == Dimension::Processing);

    // Re-running from the manifest reproduces every report byte for byte.
    RunManifest second = rerun("pl_out/manifest.json", "pl_out2");
    CHECK(second.status == "ok");
    for (const char* name : {"report.json", "report.csv", "report.svg", "dataset.json",
                             "ingest_report.json", "processing_run.json",
                             "input_final_model.json"})
        CHECK(read_file("pl_out2/" + std::string(name)) ==
              read_file("pl_out/" + std::string(name)));

    // Tampered digests and vanished inputs are both rejected.
    nlohmann::json tampered;
    std::ifstream("pl_out/manifest.json") >> tampered;
    tampered["inputs"][cfg.events_path] = "fnv1a64:0000000000000000";
    write_file("tampered_manifest.json", tampered.dump(2) + "\n");
    CHECK_THROWS_AS(rerun("tampered_manifest.json"), DataError);
    fs::remove("tampered_manifest.json");

    nlohmann::json vanished;
    std::ifstream("pl_out/manifest.json") >> vanished;
    vanished["inputs"]["no_such_shadow_input.csv"] = "fnv1a64:0000000000000000";
    write_file("vanished_manifest.json", vanished.dump(2) + "\n");
    CHECK_THROWS_AS(rerun("vanished_manifest.json"), DataError);
    fs::remove("vanished_manifest.json");

    fs::remove_all("pl_out");
    fs::remove_all("pl_out2");
}

TEST_CASE("a failing stage still writes a failed manifest before rethrowing") {
    fs::remove_all("pl_fail_out");
    write_file("bad_events.csv", "foo,bar\n1,2\n");

    PipelineConfig cfg = sample_config("pl_fail_out");
    cfg.events_path = "bad_events.csv";
    CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);

    RunManifest failed = RunManifest::load("pl_fail_out/manifest.json");
    CHECK(failed.status == "failed");
    CHECK_FALSE(failed.error.empty());

    fs::remove("bad_events.csv");
    fs::remove_all("pl_fail_out");
}

TEST_CASE("missing inputs are rejected before any work happens") {
    PipelineConfig cfg = sample_config("pl_never_out");
    cfg.ils_path = "no_such_ils.csv";
    CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
    CHECK_FALSE(fs::exists("pl_never_out"));
}
