#pragma once

#include "gds/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace gds::cli {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kConfigError = 1, kDataError = 2, kPipelineError = 3 };

struct SegmentOptions {
  fs::path manifest;
  std::optional<fs::path> config;
  fs::path out_dir = "gds_out";
  std::optional<std::uint64_t> seed;
  ConfigOverrides overrides;  // dotted keys from flags, applied over the file
  bool dump_trees = false;
  bool quiet = false;
};

struct SynthOptions {
  fs::path scenario;
  fs::path out_dir = "gds_synth";
  std::optional<std::uint64_t> seed;
};

struct EvalOptions {
  fs::path run_dir;  // a segment output dir or a bare labels dir
  fs::path manifest;
  std::optional<fs::path> out_file;
  int tolerance = 1;
};

// Each command prints its diagnostic as one line on `err` and returns an
// ExitCode.
int cmd_segment(const SegmentOptions& opt, std::ostream& out, std::ostream& err);
int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err);
int cmd_inspect(const fs::path& file, std::ostream& out, std::ostream& err);

// Output layout of cmd_segment.
fs::path label_path(const fs::path& out_dir, int frame);
inline constexpr const char* kInteractionLog = "interactions.txt";
inline constexpr const char* kRunReport = "report.txt";
inline constexpr const char* kResolvedConfig = "config.txt";

}  // namespace gds::cli
