#include "gds/eval.hpp"

#include "gds/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace gds {

namespace {

// Dense overlap table between two label vectors.
struct Overlap {
  std::vector<int> row_labels;
  std::vector<int> col_labels;
  std::vector<std::vector<double>> count;
};

void add_overlap(Overlap& o, std::map<int, int>& rows, std::map<int, int>& cols,
                 const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [r, new_row] = rows.try_emplace(a[i], static_cast<int>(rows.size()));
    if (new_row) {
      o.row_labels.push_back(a[i]);
      o.count.emplace_back(o.col_labels.size(), 0.0);
    }
    auto [c, new_col] = cols.try_emplace(b[i], static_cast<int>(cols.size()));
    if (new_col) {
      o.col_labels.push_back(b[i]);
      for (auto& row : o.count) row.push_back(0.0);
    }
    o.count[r->second][c->second] += 1.0;
  }
}

Vec3 gaussian3(CounterRng& rng, double sigma) {
  auto normal = [&] {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };
  const double x = normal();
  const double y = normal();
  const double z = normal();
  return sigma * Vec3(x, y, z);
}

struct Shape {
  bool sphere = true;
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
  Vec3 extent = Vec3::Zero();  // full box size
  std::uint8_t r = 0, g = 0, b = 0;
  int label = 0;
};

Vec3 sample_surface(const Shape& s, CounterRng& rng) {
  if (s.sphere) {
    Vec3 d = gaussian3(rng, 1.0);
    while (d.norm() < 1e-12) d = gaussian3(rng, 1.0);
    return s.center + s.radius * d.normalized();
  }
  const Vec3 e = s.extent;
  const double areas[3] = {e.y() * e.z(), e.x() * e.z(), e.x() * e.y()};  // faces normal to x, y, z
  const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
  double pick = rng.uniform() * total;
  int axis = 0;
  while (axis < 2 && pick >= 2.0 * areas[axis]) pick -= 2.0 * areas[axis++];
  const bool far_side = rng.uniform() < 0.5;
  Vec3 p;
  for (int k = 0; k < 3; ++k) p[k] = (rng.uniform() - 0.5) * e[k];
  p[axis] = (far_side ? 0.5 : -0.5) * e[axis];
  return s.center + p;
}

std::uint8_t jitter(std::uint8_t base, CounterRng& rng) {
  const int v = static_cast<int>(base) + static_cast<int>(rng.below(9)) - 4;
  return static_cast<std::uint8_t>(std::clamp(v, 0, 255));
}

double sphere_gap(const Shape& a, const Shape& b) {
  return (a.center - b.center).norm() - a.radius - b.radius;
}

std::vector<Shape> shapes_at(const SynthScenario& s, int t) {
  const double mid = 0.5 * (s.frames - 1);
  Shape a{true, Vec3::Zero(), s.sphere_radius, Vec3::Zero(), 200, 40, 40, 1};
  Shape b{true, Vec3::Zero(), s.sphere_radius, Vec3::Zero(), 40, 60, 200, 2};
  switch (s.kind) {
    case ScenarioKind::kStatic:
      a.center = Vec3(-0.5 * s.separation, 0, 0);
      b.center = Vec3(0.5 * s.separation, 0, 0);
      return {a, b};
    case ScenarioKind::kApproachMergeSplit: {
      const int c0 = (s.frames - s.contact_frames) / 2;
      const int c1 = c0 + s.contact_frames - 1;
      const int away = std::max({0, c0 - t, t - c1});
      const double gap = s.contact_gap + s.closing_speed * away;
      const double x = 0.5 * gap + s.sphere_radius;
      a.center = Vec3(-x, 0, 0);
      b.center = Vec3(x, 0, 0);
      return {a, b};
    }
    case ScenarioKind::kCrossing: {
      const double dx = s.closing_speed * (t - mid);
      const double y = s.sphere_radius + 0.5 * s.contact_gap;
      a.center = Vec3(-0.5 * dx, -y, 0);
      b.center = Vec3(0.5 * dx, y, 0);
      return {a, b};
    }
    case ScenarioKind::kOcclusionSplit: {
      Shape box{false, Vec3::Zero(), 0.0, Vec3(s.box_x, s.box_y, s.box_z), 60, 170, 60, 1};
      return {box};
    }
  }
  return {};
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("scenario key \"" + key + "\": bad value \"" + text + "\"");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ConfigError("scenario key \"" + key + "\": not finite");
  }
  return v;
}

}  // namespace

std::vector<int> max_weight_matching(const std::vector<std::vector<double>>& weight) {
  const int rows = static_cast<int>(weight.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(weight[0].size());
  const int n = std::max(rows, cols);
  if (n == 0) return std::vector<int>(rows, -1);
  auto cost = [&](int i, int j) {
    return i < rows && j < cols ? -weight[i][j] : 0.0;
  };
  // Hungarian algorithm with potentials, 1-based.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(rows, -1);
  for (int j = 1; j <= n; ++j) {
    const int i = p[j] - 1;
    if (i >= 0 && i < rows && j - 1 < cols) match[i] = j - 1;
  }
  return match;
}

double segmentation_error(const LabeledFrame& labeled, const LabeledFrame& truth) {
  if (labeled.labels.size() != truth.labels.size()) {
    throw DataError("frame " + std::to_string(truth.frame_index) + ": " +
                    std::to_string(labeled.labels.size()) + " labels vs " +
                    std::to_string(truth.labels.size()) + " ground-truth points");
  }
  if (truth.labels.empty()) return 0.0;
  Overlap o;
  std::map<int, int> rows, cols;
  add_overlap(o, rows, cols, labeled.labels, truth.labels);
  const auto match = max_weight_matching(o.count);
  double matched = 0.0;
  for (std::size_t r = 0; r < match.size(); ++r) {
    if (match[r] >= 0) matched += o.count[r][match[r]];
  }
  return 1.0 - matched / static_cast<double>(truth.labels.size());
}

std::map<int, int> match_labels(const std::vector<LabeledFrame>& labeled,
                                const std::vector<LabeledFrame>& truth) {
  if (labeled.size() != truth.size()) throw DataError("label and truth frame counts differ");
  Overlap o;
  std::map<int, int> rows, cols;
  for (std::size_t f = 0; f < labeled.size(); ++f) {
    if (labeled[f].labels.size() != truth[f].labels.size()) {
      throw DataError("frame " + std::to_string(f) + ": label count mismatch");
    }
    add_overlap(o, rows, cols, labeled[f].labels, truth[f].labels);
  }
  const auto match = max_weight_matching(o.count);
  std::map<int, int> out;
  for (std::size_t r = 0; r < match.size(); ++r) {
    if (match[r] >= 0 && o.count[r][match[r]] > 0.0) out[o.row_labels[r]] = o.col_labels[match[r]];
  }
  return out;
}

InteractionScore interaction_score(const std::vector<InteractionEvent>& found,
                                   const std::vector<InteractionEvent>& truth,
                                   int tolerance_frames, const std::map<int, int>& id_map) {
  InteractionScore s;
  s.found = static_cast<int>(found.size());
  s.truth = static_cast<int>(truth.size());
  std::vector<std::vector<double>> ok(found.size(), std::vector<double>(truth.size(), 0.0));
  for (std::size_t i = 0; i < found.size(); ++i) {
    std::set<int> mapped;
    for (int id : found[i].object_ids) {
      auto it = id_map.find(id);
      mapped.insert(it == id_map.end() ? id : it->second);
    }
    for (std::size_t j = 0; j < truth.size(); ++j) {
      const std::set<int> want(truth[j].object_ids.begin(), truth[j].object_ids.end());
      if (mapped != want) continue;
      if (std::abs(found[i].start_frame - truth[j].start_frame) > tolerance_frames) continue;
      if (std::abs(found[i].end_frame - truth[j].end_frame) > tolerance_frames) continue;
      ok[i][j] = 1.0;
    }
  }
  const auto match = max_weight_matching(ok);
  for (std::size_t i = 0; i < match.size(); ++i) {
    if (match[i] >= 0 && ok[i][match[i]] > 0.0) ++s.matched;
  }
  if (s.found > 0) s.precision = static_cast<double>(s.matched) / s.found;
  if (s.truth > 0) s.recall = static_cast<double>(s.matched) / s.truth;
  return s;
}

MetricsReport evaluate_sequence(const std::vector<LabeledFrame>& labeled,
                                const std::vector<LabeledFrame>& truth,
                                const std::vector<InteractionEvent>& found,
                                const std::vector<InteractionEvent>& truth_events,
                                int tolerance_frames) {
  if (labeled.size() != truth.size()) throw DataError("label and truth frame counts differ");
  MetricsReport r;
  for (std::size_t f = 0; f < labeled.size(); ++f) {
    r.frame_errors.push_back(segmentation_error(labeled[f], truth[f]));
  }
  if (!r.frame_errors.empty()) {
    double sum = 0.0;
    for (double e : r.frame_errors) sum += e;
    r.mean_error = sum / static_cast<double>(r.frame_errors.size());
  }
  r.interactions =
      interaction_score(found, truth_events, tolerance_frames, match_labels(labeled, truth));
  auto covered = [](const std::vector<InteractionEvent>& events) {
    std::set<int> frames;
    for (const auto& e : events)
      for (int f = e.start_frame; f <= e.end_frame; ++f) frames.insert(f);
    return static_cast<int>(frames.size());
  };
  r.found_interaction_frames = covered(found);
  r.truth_interaction_frames = covered(truth_events);
  return r;
}

void write_metrics_report(const MetricsReport& report, std::ostream& out) {
  out << std::left << std::setw(7) << "frame" << std::right << std::setw(10) << "error" << '\n';
  out << std::fixed << std::setprecision(4);
  for (std::size_t f = 0; f < report.frame_errors.size(); ++f) {
    out << std::left << std::setw(7) << f << std::right << std::setw(10) << report.frame_errors[f]
        << '\n';
  }
  out << std::left << std::setw(7) << "mean" << std::right << std::setw(10) << report.mean_error
      << '\n';
  const auto& s = report.interactions;
  out << "interactions detected " << s.matched << " / " << s.truth << " (found " << s.found
      << ")\n";
  out << "\nmetrics v1\n";
  out << "frames=" << report.frame_errors.size() << '\n';
  out << "mean_segmentation_error=" << report.mean_error << '\n';
  out << "interactions_found=" << s.found << '\n';
  out << "interactions_truth=" << s.truth << '\n';
  out << "interactions_matched=" << s.matched << '\n';
  out << "interaction_precision=" << s.precision << '\n';
  out << "interaction_recall=" << s.recall << '\n';
  out << "interaction_frames_found=" << report.found_interaction_frames << '\n';
  out << "interaction_frames_truth=" << report.truth_interaction_frames << '\n';
  out << std::defaultfloat;
}

void SynthScenario::validate() const {
  if (frames < 1) throw ConfigError("scenario key \"frames\": must be >= 1");
  if (points_per_object < 1) throw ConfigError("scenario key \"points_per_object\": must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("scenario key \"noise_sigma\": must be >= 0");
  if (!(sphere_radius > 0.0)) throw ConfigError("scenario key \"sphere_radius\": must be > 0");
  if (!(box_x > 0.0 && box_y > 0.0 && box_z > 0.0)) {
    throw ConfigError("scenario keys \"box_x/box_y/box_z\": must be > 0");
  }
  if (!(separation >= 0.0)) throw ConfigError("scenario key \"separation\": must be >= 0");
  if (!(closing_speed >= 0.0)) throw ConfigError("scenario key \"closing_speed\": must be >= 0");
  if (!(contact_gap >= 0.0)) throw ConfigError("scenario key \"contact_gap\": must be >= 0");
  if (contact_frames < 0 ||
      (kind == ScenarioKind::kApproachMergeSplit && contact_frames > frames)) {
    throw ConfigError("scenario key \"contact_frames\": must lie in [0, frames]");
  }
  if (!(mask_width > 0.0)) throw ConfigError("scenario key \"mask_width\": must be > 0");
  if (!(contact_threshold > 0.0)) {
    throw ConfigError("scenario key \"contact_threshold\": must be > 0");
  }
}

std::string scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kStatic: return "static";
    case ScenarioKind::kApproachMergeSplit: return "approach_merge_split";
    case ScenarioKind::kOcclusionSplit: return "occlusion_split";
    case ScenarioKind::kCrossing: return "crossing";
  }
  return "static";
}

SynthScenario parse_scenario(const std::string& text) {
  SynthScenario s;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("scenario line without '=': \"" + line + "\"");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ConfigError("scenario key \"" + key + "\" given twice");
    if (key == "kind") {
      if (value == "static") s.kind = ScenarioKind::kStatic;
      else if (value == "approach_merge_split") s.kind = ScenarioKind::kApproachMergeSplit;
      else if (value == "occlusion_split") s.kind = ScenarioKind::kOcclusionSplit;
      else if (value == "crossing") s.kind = ScenarioKind::kCrossing;
      else throw ConfigError("scenario key \"kind\": unknown kind \"" + value + "\"");
    } else if (key == "frames") s.frames = parse_value<int>(key, value);
    else if (key == "points_per_object") s.points_per_object = parse_value<int>(key, value);
    else if (key == "noise_sigma") s.noise_sigma = parse_value<double>(key, value);
    else if (key == "sphere_radius") s.sphere_radius = parse_value<double>(key, value);
    else if (key == "box_x") s.box_x = parse_value<double>(key, value);
    else if (key == "box_y") s.box_y = parse_value<double>(key, value);
    else if (key == "box_z") s.box_z = parse_value<double>(key, value);
    else if (key == "separation") s.separation = parse_value<double>(key, value);
    else if (key == "closing_speed") s.closing_speed = parse_value<double>(key, value);
    else if (key == "contact_gap") s.contact_gap = parse_value<double>(key, value);
    else if (key == "contact_frames") s.contact_frames = parse_value<int>(key, value);
    else if (key == "mask_width") s.mask_width = parse_value<double>(key, value);
    else if (key == "mask_speed") s.mask_speed = parse_value<double>(key, value);
    else if (key == "mask_center_frame") s.mask_center_frame = parse_value<double>(key, value);
    else if (key == "contact_threshold") s.contact_threshold = parse_value<double>(key, value);
    else if (key == "rng_seed") s.rng_seed = parse_value<std::uint64_t>(key, value);
    else throw ConfigError("unknown scenario key \"" + key + "\"");
  }
  s.validate();
  return s;
}

SynthScenario load_scenario(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string format_scenario(const SynthScenario& s) {
  std::ostringstream out;
  out << "kind=" << scenario_kind_name(s.kind) << '\n'
      << "frames=" << s.frames << '\n'
      << "points_per_object=" << s.points_per_object << '\n'
      << "noise_sigma=" << format_double(s.noise_sigma) << '\n'
      << "sphere_radius=" << format_double(s.sphere_radius) << '\n'
      << "box_x=" << format_double(s.box_x) << '\n'
      << "box_y=" << format_double(s.box_y) << '\n'
      << "box_z=" << format_double(s.box_z) << '\n'
      << "separation=" << format_double(s.separation) << '\n'
      << "closing_speed=" << format_double(s.closing_speed) << '\n'
      << "contact_gap=" << format_double(s.contact_gap) << '\n'
      << "contact_frames=" << s.contact_frames << '\n'
      << "mask_width=" << format_double(s.mask_width) << '\n'
      << "mask_speed=" << format_double(s.mask_speed) << '\n'
      << "mask_center_frame=" << format_double(s.mask_center_frame) << '\n'
      << "contact_threshold=" << format_double(s.contact_threshold) << '\n'
      << "rng_seed=" << s.rng_seed << '\n';
  return out.str();
}

GeneratedSequence generate_scenario(const SynthScenario& scenario) {
  scenario.validate();
  GeneratedSequence seq;
  const CounterRng keys(scenario.rng_seed);
  for (int t = 0; t < scenario.frames; ++t) {
    CounterRng rng(keys.at(static_cast<std::uint64_t>(t)));
    const auto shapes = shapes_at(scenario, t);
    PointCloudFrame frame;
    frame.frame_index = t;
    LabeledFrame truth;
    truth.frame_index = t;
    for (const auto& s : shapes) {
      for (int k = 0; k < scenario.points_per_object; ++k) {
        const Vec3 p = sample_surface(s, rng) + gaussian3(rng, scenario.noise_sigma);
        const std::uint8_t r = jitter(s.r, rng);
        const std::uint8_t g = jitter(s.g, rng);
        const std::uint8_t b = jitter(s.b, rng);
        if (scenario.kind == ScenarioKind::kOcclusionSplit) {
          const double m = scenario.mask_speed * (t - scenario.mask_center_frame);
          if (std::abs(p.x() - m) < 0.5 * scenario.mask_width) continue;
        }
        frame.points.push_back(Point{p, r, g, b});
        truth.labels.push_back(s.label);
      }
    }
    double gap = std::numeric_limits<double>::infinity();
    if (shapes.size() == 2) gap = sphere_gap(shapes[0], shapes[1]);
    seq.gaps.push_back(gap);
    seq.frames.push_back(std::move(frame));
    seq.truth.push_back(std::move(truth));
  }

  // Truth interactions: maximal runs of frames in contact.
  for (int t = 0; t < scenario.frames; ++t) {
    if (!(seq.gaps[t] < scenario.contact_threshold)) continue;
    if (!seq.interactions.empty() && seq.interactions.back().end_frame == t - 1) {
      seq.interactions.back().end_frame = t;
    } else {
      seq.interactions.push_back({t, t, {1, 2}, {}});
    }
  }
  return seq;
}

fs::path write_generated(const GeneratedSequence& sequence, const std::string& name,
                         const fs::path& dir) {
  fs::create_directories(dir / "frames");
  fs::create_directories(dir / "gt");
  SequenceManifest m;
  m.name = name;
  for (std::size_t t = 0; t < sequence.frames.size(); ++t) {
    std::ostringstream stem;
    stem << "frame_" << std::setw(4) << std::setfill('0') << t;
    const fs::path frame_path = dir / "frames" / (stem.str() + ".pts");
    const fs::path gt_path = dir / "gt" / (stem.str() + ".gt");
    write_frame(sequence.frames[t], frame_path);
    write_ground_truth(sequence.truth[t], gt_path);
    m.frame_paths.push_back(frame_path);
    m.ground_truth_paths.push_back(gt_path);
  }
  const fs::path log = dir / "interactions_truth.txt";
  write_interaction_log(sequence.interactions, log);
  m.interactions_path = log;
  const fs::path manifest = dir / (name + ".seq");
  write_manifest(m, manifest);
  return manifest;
}

}  // namespace gds
