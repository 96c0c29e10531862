#include "commands.hpp"

#include "gds/eval.hpp"
#include "gds/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace gds::cli {

namespace {

std::string frame_stem(int frame) {
  std::ostringstream s;
  s << "frame_" << std::setw(4) << std::setfill('0') << frame;
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw DataError("cannot write " + path.string());
}

// Runs `fn`, translating the error hierarchy into exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const PipelineError& e) {
    err << "pipeline error: " << e.what() << '\n';
    return kPipelineError;
  } catch (const Error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
}

std::string first_token(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string token;
  in >> token;
  return token;
}

void inspect_frame(const fs::path& path, std::ostream& out) {
  std::vector<std::string> warnings;
  const PointCloudFrame f = load_frame(path, 0, &warnings);
  out << "frame file " << path.string() << '\n';
  out << "points " << f.size() << '\n';
  for (const auto& w : warnings) out << "warning " << w << '\n';
  if (f.empty()) return;
  Vec3 lo = f.points[0].position, hi = lo, sum = Vec3::Zero();
  double r = 0, g = 0, b = 0;
  for (const auto& p : f.points) {
    lo = lo.cwiseMin(p.position);
    hi = hi.cwiseMax(p.position);
    sum += p.position;
    r += p.r;
    g += p.g;
    b += p.b;
  }
  const double n = static_cast<double>(f.size());
  out << std::fixed << std::setprecision(4);
  out << "bbox_min " << lo.x() << ' ' << lo.y() << ' ' << lo.z() << '\n';
  out << "bbox_max " << hi.x() << ' ' << hi.y() << ' ' << hi.z() << '\n';
  out << "centroid " << sum.x() / n << ' ' << sum.y() / n << ' ' << sum.z() / n << '\n';
  out << std::setprecision(1) << "mean_rgb " << r / n << ' ' << g / n << ' ' << b / n << '\n';
  out << std::defaultfloat;
}

void inspect_labels(const fs::path& path, const LabeledFrame& f, const char* what,
                    std::ostream& out) {
  std::map<int, int> counts;
  for (int l : f.labels) ++counts[l];
  out << what << ' ' << path.string() << '\n';
  out << "points " << f.labels.size() << '\n';
  out << std::left << std::setw(8) << "label" << std::right << std::setw(10) << "points" << '\n';
  for (const auto& [l, c] : counts) {
    out << std::left << std::setw(8) << l << std::right << std::setw(10) << c << '\n';
  }
}

void inspect_tree(const fs::path& path, std::ostream& out) {
  std::ifstream in(path);
  std::string line;
  int objects = 0, components = 0, segments = 0;
  std::ostringstream body;
  while (std::getline(in, line)) {
    std::istringstream tok(line);
    std::string kind;
    tok >> kind;
    if (kind == "object") ++objects;
    else if (kind == "component") ++components;
    else if (kind == "segment") ++segments;
    body << line << '\n';
  }
  out << "tree dump " << path.string() << '\n';
  out << "objects " << objects << " components " << components << " segments " << segments
      << '\n';
  out << body.str();
}

}  // namespace

fs::path label_path(const fs::path& out_dir, int frame) {
  return out_dir / "labels" / (frame_stem(frame) + ".lbl");
}

int cmd_segment(const SegmentOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ConfigOverrides overrides = opt.overrides;
    if (opt.seed) overrides["rng_seed"] = std::to_string(*opt.seed);
    const PipelineConfig config = opt.config ? load_run_config(*opt.config, overrides)
                                             : parse_run_config("", overrides);
    const SequenceManifest manifest = load_sequence(opt.manifest);

    fs::create_directories(opt.out_dir / "labels");
    if (opt.dump_trees) fs::create_directories(opt.out_dir / "trees");
    write_text(opt.out_dir / kResolvedConfig, format_run_config(config));

    const auto result = run_sequence(manifest, config, [&](const FrameResult& r) {
      const int f = r.labels.frame_index;
      if (r.labels.labels.empty()) {
        write_text(label_path(opt.out_dir, f), "");
      } else {
        write_labels(r.labels, label_path(opt.out_dir, f));
      }
      if (opt.dump_trees) {
        std::ostringstream dump;
        dump_tree(r.tree, dump);
        write_text(opt.out_dir / "trees" / (frame_stem(f) + ".tree"), dump.str());
      }
      if (!opt.quiet) {
        out << "frame " << f << ": " << r.labels.labels.size() << " points, "
            << r.tree.num_live_objects() << " objects\n";
      }
    });

    write_interaction_log(result.interactions, opt.out_dir / kInteractionLog);
    std::ostringstream report;
    write_run_report(result, report);
    write_text(opt.out_dir / kRunReport, report.str());
    if (!opt.quiet) out << report.str();
    return kOk;
  });
}

int cmd_synth(const SynthOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    SynthScenario scenario = load_scenario(opt.scenario);
    if (opt.seed) scenario.rng_seed = *opt.seed;
    const auto seq = generate_scenario(scenario);
    const std::string name = opt.scenario.stem().string();
    const fs::path manifest = write_generated(seq, name, opt.out_dir);
    write_text(opt.out_dir / "scenario.txt", format_scenario(scenario));
    out << "wrote " << seq.frames.size() << " frames, " << seq.interactions.size()
        << " interactions to " << manifest.string() << '\n';
    return kOk;
  });
}

int cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const SequenceManifest manifest = load_sequence(opt.manifest);
    if (!manifest.has_ground_truth()) {
      throw DataError("manifest " + opt.manifest.string() + " has no ground truth");
    }
    const fs::path labels_dir =
        fs::is_directory(opt.run_dir / "labels") ? opt.run_dir / "labels" : opt.run_dir;
    std::vector<LabeledFrame> labeled, truth;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      const int f = static_cast<int>(i);
      const fs::path lp = labels_dir / (frame_stem(f) + ".lbl");
      if (!fs::exists(lp)) throw DataError("missing label file " + lp.string());
      LabeledFrame l = load_labels(lp);
      l.frame_index = f;
      labeled.push_back(std::move(l));
      truth.push_back(load_ground_truth(manifest.ground_truth_paths[i], f));
    }
    std::vector<InteractionEvent> found, expected;
    if (fs::exists(opt.run_dir / kInteractionLog)) {
      found = load_interaction_log(opt.run_dir / kInteractionLog);
    }
    if (manifest.interactions_path) expected = load_interaction_log(*manifest.interactions_path);

    const MetricsReport report = evaluate_sequence(labeled, truth, found, expected, opt.tolerance);
    std::ostringstream text;
    write_metrics_report(report, text);
    out << text.str();
    if (opt.out_file) write_text(*opt.out_file, text.str());
    return kOk;
  });
}

int cmd_inspect(const fs::path& file, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string kind = first_token(file);
    if (kind == "ptseq") inspect_frame(file, out);
    else if (kind == "ptlab") inspect_labels(file, load_ground_truth(file), "ground truth", out);
    else if (kind == "tree") inspect_tree(file, out);
    else if (kind.empty() || std::isdigit(static_cast<unsigned char>(kind[0])))
      inspect_labels(file, load_labels(file), "label file", out);
    else throw DataError("unrecognized file type in " + file.string());
    return kOk;
  });
}

}  // namespace gds::cli
