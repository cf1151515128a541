#pragma once

// YAML run configuration for the command-line front end.
//
// Either a registered benchmark is referenced with `case: <id>` (then only
// `solver` overrides and `output` may follow), or the problem is described in
// full by `domain`, `points`, `material`, `boundary` and `solver` blocks.
// Unknown keys are rejected with the offending key and line.

#include "fpm/bench.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fpm {

struct PointsConfig {
    enum class Layout { File, Grid, CellCentered, Random } layout = Layout::Grid;
    std::filesystem::path file;
    std::vector<int> counts;  // grid / cell_centered: per-axis counts
    int total = 0;            // random
    int boundary = 0;         // random
    std::uint64_t seed = 0;   // random
};

struct OutputConfig {
    std::filesystem::path directory = "out";
    std::set<std::string> formats = {"csv", "json"};
    std::vector<double> snapshots;  // empty: every step / interval end
    bool matrices = false;          // Matrix Market export of C and K
};

struct RunConfig {
    std::string source;              // file name used in diagnostics
    std::optional<std::string> case_id;
    CaseOverrides overrides;         // case mode only
    // Full-description mode.
    ConvexDomain domain;
    PointsConfig points;
    ProblemSpec problem;
    AssemblyOptions assembly;
    Scheme scheme = LvimConfig{};
    double dt = 0.0;
    double T = 0.0;                  // 0: steady
    OutputConfig output;
};

/// Throws IoError if the file cannot be read, SchemaError on invalid content.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_string(const std::string& text, const std::string& source = "<string>");

/// Materializes the configured case; `seed` overrides the random-layout seed.
BenchmarkCase build_case(const RunConfig& config, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace fpm
