#pragma once

// Experiment orchestration: named experiments over seed grids, CSV/JSON
// artifacts with provenance, deterministic under any worker count.

#include <filesystem>
#include <nlohmann/json.hpp>

#include "intermix/assumptions.hpp"
#include "intermix/correlation.hpp"
#include "intermix/distortion.hpp"

namespace intermix {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& w) : std::runtime_error(w) {}
};

struct ExperimentConfig {
    std::string experiment;
    ParamDistribution distribution;
    std::vector<uint64_t> seeds;
    std::filesystem::path out_dir = "out";
    int threads = 0;  // 0 = hardware
    json params;      // experiment-specific knobs (validated per experiment)

    // defaults < config file < flag overrides
    static ExperimentConfig from_json(const json& j);
    json to_json() const;

    double param(const std::string& key, double dflt) const;
    int param_int(const std::string& key, int dflt) const;

    void validate() const;
};

struct OutputFile {
    std::string path;     // relative to out_dir
    uint64_t checksum = 0;  // fnv1a64 of the bytes
    uint64_t bytes = 0;
};

struct RunManifest {
    std::string experiment;
    json config_echo;
    std::string version;
    double wall_time_s = 0.0;
    int threads = 0;
    int tasks = 0;
    json derived_constants;
    std::vector<OutputFile> outputs;
    std::vector<std::string> failures;
    std::string status;  // running | done | partial

    json to_json() const;
};

struct ExperimentInfo {
    std::string name;
    std::string claim;   // the quantitative statement the experiment exercises
    std::string params_doc;
};

const std::vector<ExperimentInfo>& experiment_catalog();

// Runs the named experiment; writes outputs and manifest.json under
// config.out_dir (atomically: temp file + rename). Partial failures keep the
// remaining grid points and are listed in the manifest.
RunManifest run_experiment(const ExperimentConfig& config);

// Atomic text-file write helper (temp + rename) returning the checksum entry.
OutputFile write_artifact(const std::filesystem::path& out_dir, const std::string& name,
                          const std::string& content);

std::string format_full(double v);  // round-trip precision formatting

}  // namespace intermix
