#include "commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace gds::cli;

// One "--<dotted.key>" flag per config key; values are type-checked by the
// config parser so errors name the key.
void add_config_flags(CLI::App& cmd, gds::ConfigOverrides& overrides) {
  for (const auto& key : gds::run_config_keys()) {
    if (key == "rng_seed") continue;  // --seed
    cmd.add_option_function<std::string>(
           "--" + key, [&overrides, key](const std::string& v) { overrides[key] = v; },
           "override " + key)
        ->group("Config keys");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object segmentation and interaction tracking for point cloud sequences"};
  app.require_subcommand(1);

  SegmentOptions seg;
  std::uint64_t seed = 0;
  auto* segment = app.add_subcommand("segment", "segment a sequence manifest");
  segment->add_option("manifest", seg.manifest, "sequence manifest")->required();
  segment->add_option("--config", seg.config, "key=value config file");
  segment->add_option("--out", seg.out_dir, "output directory")->capture_default_str();
  auto* seg_seed = segment->add_option("--seed", seed, "rng seed");
  segment->add_flag("--dump-trees", seg.dump_trees, "write a tree dump per frame");
  segment->add_flag("--quiet", seg.quiet, "no progress output");
  add_config_flags(*segment, seg.overrides);

  SynthOptions syn;
  auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
  synth->add_option("scenario", syn.scenario, "scenario file (key=value)")->required();
  synth->add_option("--config", syn.scenario, "scenario file, same as the positional");
  synth->add_option("--out", syn.out_dir, "output directory")->capture_default_str();
  auto* syn_seed = synth->add_option("--seed", seed, "overrides rng_seed in the scenario file");

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "score labels against ground truth");
  eval->add_option("labels", ev.run_dir, "segment output dir or labels dir")->required();
  eval->add_option("manifest", ev.manifest, "sequence manifest with ground truth")->required();
  eval->add_option("--out", ev.out_file, "also write the report here");
  eval->add_option("--tolerance", ev.tolerance, "interaction endpoint tolerance (frames)")
      ->capture_default_str();

  std::filesystem::path inspect_file;
  auto* inspect = app.add_subcommand("inspect", "summarize a frame, label or tree dump file");
  inspect->add_option("file", inspect_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigError;
  }

  if (*segment) {
    if (*seg_seed) seg.seed = seed;
    return cmd_segment(seg, std::cout, std::cerr);
  }
  if (*synth) {
    if (*syn_seed) syn.seed = seed;
    return cmd_synth(syn, std::cout, std::cerr);
  }
  if (*eval) return cmd_eval(ev, std::cout, std::cerr);
  return cmd_inspect(inspect_file, std::cout, std::cerr);
}
