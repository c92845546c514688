#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stylemill/dimension.hpp"
#include "stylemill/eval.hpp"
#include "stylemill/learners.hpp"

namespace stylemill {

// End-to-end run description. Seeds are mandatory and explicit: nothing in
// a run may depend on the wall clock.
struct PipelineConfig {
    std::string events_path;
    std::string mapping_path;
    std::string ils_path;
    std::string out_dir = "out";
    std::vector<Dimension> dimensions = {kAllDimensions.begin(), kAllDimensions.end()};
    std::uint64_t min_events = 1;
    std::string balance = "after-split"; // none | before-split | after-split
    double ratio = 0.1;
    double holdout_fraction = 0.25;
    std::size_t cv_folds = 10;
    std::uint64_t seed = 0;
    bool seed_set = false;
    SvmConfig labeling;
    TrainConfig final_config;
    std::vector<std::string> emit = {"json", "csv"}; // json | csv | svg

    void validate() const;
    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::string& path);
};

struct RunManifest {
    nlohmann::json config;                        // snapshot
    std::map<std::string, std::string> inputs;    // path -> fnv1a-64 digest
    std::map<std::string, std::string> versions;
    std::vector<std::pair<std::string, double>> timings_ms; // per stage
    std::vector<std::string> outputs;
    std::string status = "ok";
    std::string error;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
    void save(const std::string& path) const;
    static RunManifest load(const std::string& path);
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string file_digest(const std::string& path);

// ingest -> features -> per-dimension split / balance / self-train / eval.
// Writes every artifact plus the manifest under config.out_dir; on a stage
// error the partial manifest is still written (status "failed") before the
// error propagates.
RunManifest run_pipeline(const PipelineConfig& config);

// Re-executes the run recorded in a manifest after verifying the input
// digests still match. `out_dir_override` redirects the outputs (empty =
// the original directory).
RunManifest rerun(const std::string& manifest_path, const std::string& out_dir_override = "");

} // namespace stylemill
