#pragma once

#include "gds/pipeline.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace gds {

// Flat run configuration: one "dotted.key=value" per line, '#' comments.
// "supervoxel.seed_resolution" is applied first and re-derives every
// length-scale default; the remaining keys are applied on top. Unknown keys,
// repeated keys and ill-typed values throw ConfigError naming the key.
using ConfigOverrides = std::map<std::string, std::string>;

// All accepted keys, in the order format_run_config writes them.
std::vector<std::string> run_config_keys();

PipelineConfig parse_run_config(const std::string& text, const ConfigOverrides& overrides = {});
PipelineConfig load_run_config(const std::filesystem::path& path,
                               const ConfigOverrides& overrides = {});

// Every key with its resolved value; parse_run_config(format_run_config(c))
// reproduces `c` exactly.
std::string format_run_config(const PipelineConfig& config);

}  // namespace gds
