#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "lstrack/adaptive_tracker.hpp"
#include "lstrack/forward_models.hpp"
#include "lstrack/megpc_adaptive.hpp"
#include "lstrack/regression.hpp"

namespace lstrack {

inline constexpr int kSchemaVersion = 1;

struct ModelSpec {
    std::string name = "burgers";  // burgers | burgers_fv | co2 | blackbox
    BurgersRiemannConfig burgers;
    int fv_cells = 400;
    FvOptions fv;
    CO2ModelConfig co2;
    std::string command;
    int dim = 2;
    std::string work_dir;
};

// Names accepted by make_model.
std::vector<std::string> model_names();
std::unique_ptr<ForwardModel> make_model(const ModelSpec& spec);

struct TessellationConfig {
    int coarse_n = 4;
    double min_sep_factor = 0.5;  // in finest level-set grid spacings
    int max_sweeps = 100;
    bool split_mixed = true;
};

struct RegressionConfig {
    double eps_svd = 1e-8;
    LadOptions lad;
    bool repair = false;
    double jump_floor = 0.0;  // 0: estimated from the cache
};

struct MetricConfig {
    int grid_m = 241;            // ME-gPC metric grid; tracker runs use the finest tracker grid
    int refine = 0;              // extra refinements of the metric grid (0 or 1)
    std::size_t mc_samples = 0;  // 0: skip moment errors
};

struct SweepConfig {
    std::vector<int> levels{2};
    std::vector<int> orders{2};
    std::vector<std::string> solvers{"lad"};        // lad | ols
    std::vector<std::string> classifiers{"computed"};  // computed | exact (fgpc)
    std::vector<double> theta1{1e-3};               // megpc
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string id = "experiment";
    std::string method = "fgpc";  // megpc | sop | fgpc
    ModelSpec model;
    bool has_reference_model = false;
    ModelSpec reference_model;
    TrackerConfig tracker;
    MegpcConfig megpc;
    TessellationConfig tessellation;
    RegressionConfig regression;
    MetricConfig metrics;
    SweepConfig sweep;
    std::uint64_t seed = 1;
    int workers = 1;
    bool dumps = true;  // field, cache and mesh CSV files
};

// Strict parsing: unknown keys, wrong types and invalid values raise
// Error(ConfigError). Omitted keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Entry A__B=value (prefix already stripped) sets key a.b, lower-cased; the
// value is parsed as JSON and taken as a string when that fails.
void apply_env_overrides(nlohmann::json& j, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> environment_with_prefix(const std::string& prefix = "LSTRACK_");

// Reads the file, applies overrides and parses.
ExperimentConfig load_config(const std::string& path, const std::map<std::string, std::string>& env = {});

}  // namespace lstrack
