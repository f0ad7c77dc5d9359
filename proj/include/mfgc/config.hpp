#pragma once

#include "mfgc/mfg_solver.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace mfgc {

using Json = nlohmann::json;

struct GridConfig {
    int d = 1;
    int n = 32;
    double T = 1.0;
    int nt = 64;
};

/// Parsed run configuration. The model block is kept as (path-resolved)
/// JSON so it can be re-sampled on refined grids.
struct RunConfig {
    Json model;
    GridConfig grid;
    SolveOptions solver;
    ValidationOptions validation;
    std::string output_dir;
    std::uint64_t seed = 20240531;
    std::filesystem::path base_dir;  ///< directory relative CSV paths resolve against
};

/// Throws MfgcError(Schema) with a JSON-pointer path, or (Io) for unreadable files.
RunConfig parse_config(const Json& document, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Resolved configuration with every default filled in.
Json to_json(const RunConfig& config);

/// Samples the model block on a d-dimensional grid with n nodes per axis.
ModelSpec build_model(const RunConfig& config, int n);
ModelSpec build_model(const RunConfig& config);

Grids build_grids(const RunConfig& config, int n, int nt);

/// true when every field of the model block is closed form (re-sampleable)
bool model_is_resampleable(const Json& model);

}  // namespace mfgc
