#include "gds/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <utility>

namespace gds {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Runs `fn`, charging its wall time to `slot` and tagging failures with the
// stage name.
template <typename Fn>
auto stage(int frame, const char* name, double& slot, Fn&& fn) {
  const auto start = Clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      slot += elapsed_ms(start);
    } else {
      auto out = fn();
      slot += elapsed_ms(start);
      return out;
    }
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(frame, name, e.what());
  }
}

void check_positive(double v, const char* key) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be > 0");
}

void check_non_negative(double v, const char* key) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be >= 0");
}

bool event_less(const InteractionEvent& a, const InteractionEvent& b) {
  return std::tie(a.start_frame, a.end_frame, a.object_ids) <
         std::tie(b.start_frame, b.end_frame, b.object_ids);
}

}  // namespace

PipelineError::PipelineError(int frame_index, const std::string& stage, const std::string& what)
    : Error("frame " + std::to_string(frame_index) + ": " + stage + ": " + what),
      frame_index_(frame_index),
      stage_(stage) {}

PipelineConfig PipelineConfig::for_seed_resolution(double seed_resolution) {
  PipelineConfig c;
  c.supervoxel.seed_resolution = seed_resolution;
  c.graph = GraphConfig::for_seed_resolution(seed_resolution);
  c.energy = EnergyWeights::for_seed_resolution(seed_resolution);
  c.cut = CutParams::for_seed_resolution(seed_resolution);
  c.tree = TreeConfig::for_seed_resolution(seed_resolution);
  return c;
}

void PipelineConfig::validate() const {
  supervoxel.validate();
  check_positive(graph.seed_resolution, "graph.seed_resolution");
  check_non_negative(graph.adjacency_radius, "graph.adjacency_radius");
  check_positive(graph.sigma_color, "graph.sigma_color");
  check_positive(graph.sigma_distance, "graph.sigma_distance");
  check_non_negative(energy.appearance, "energy.appearance");
  check_non_negative(energy.displacement, "energy.displacement");
  check_non_negative(energy.uncovered_blob, "energy.uncovered_blob");
  check_non_negative(energy.motion_coherence, "energy.motion_coherence");
  check_non_negative(energy.unassigned_segment, "energy.unassigned_segment");
  ga.validate();
  check_non_negative(cut.lambda, "cut.lambda");
  check_non_negative(cut.mu, "cut.mu");
  check_positive(cut.sigma_boundary, "cut.sigma_boundary");
  check_positive(cut.seed_resolution, "cut.seed_resolution");
  tree.validate();
}

AssignmentProblem make_assignment_problem(const SegTree& previous, const AdjacencyGraph& graph,
                                          const std::vector<Blob>& blobs,
                                          const EnergyWeights& weights) {
  AssignmentProblem p;
  p.weights = weights;
  for (const auto& s : previous.tracked_segments()) {
    p.segments.push_back({s.centroid, s.mean_color_lab, s.component_id, s.object_id});
  }
  for (const auto& blob : blobs) {
    BlobFeature f;
    for (int sv : blob.member_supervoxels) {
      f.centroids.push_back(graph.nodes[sv].centroid);
      f.colors.push_back(graph.nodes[sv].mean_color_lab);
    }
    p.blobs.push_back(std::move(f));
  }
  return p;
}

PipelineState::PipelineState(PipelineConfig config) : config_(std::move(config)) {
  config_.validate();
}

FrameResult PipelineState::process_frame(const PointCloudFrame& frame) {
  const auto start = Clock::now();
  const int f = frame.frame_index;
  FrameResult result;
  auto& t = result.timings_ms;

  const auto supervoxels = stage(f, "supervoxels", t.supervoxels, [&] {
    return cluster_supervoxels(frame, config_.supervoxel);
  });
  result.num_supervoxels = static_cast<int>(supervoxels.size());
  const AdjacencyGraph graph =
      stage(f, "graph", t.graph, [&] { return build_graph(supervoxels, config_.graph); });
  const std::vector<Blob> blobs =
      stage(f, "blobs", t.graph, [&] { return connected_components(graph); });

  SegTree tree;
  if (!previous_) {
    tree = stage(f, "tree", t.tree, [&] { return init_tree(f, graph, blobs, config_.tree); });
  } else {
    const SegTree& prev = *previous_;
    const Assignment assignment = stage(f, "assignment", t.assignment, [&] {
      GAConfig ga = config_.ga;
      ga.rng_seed = config_.rng_seed ^ static_cast<std::uint64_t>(f);
      return solve_ga(make_assignment_problem(prev, graph, blobs, config_.energy), ga);
    });
    result.assignment_energy = assignment.energy;
    const auto cuts = stage(f, "cut", t.cut, [&] {
      return solve_blob_cuts(prev, graph, blobs, assignment.labels, config_.cut);
    });
    tree = stage(f, "tree", t.tree, [&] {
      SegTree next = update_tree(prev, f, graph, blobs, assignment.labels, cuts, config_.tree);
      accumulate_similarities(next, prev);
      return next;
    });
    result.changes = stage(f, "confirm", t.confirm, [&] {
      return confirm_splits_merges(tree, graph, config_.tree);
    });
  }

  stage(f, "interactions", t.interactions, [&] {
    result.events_closed = tracker_.observe(tree);
    for (const auto& e : tracker_.open_events()) {
      if (e.start_frame == f) result.events_opened.push_back(e);
    }
    closed_.insert(closed_.end(), result.events_closed.begin(), result.events_closed.end());
  });

  result.labels.frame_index = f;
  result.labels.labels.resize(frame.size(), -1);
  for (const auto& sv : graph.nodes) {
    const int object = tree.supervoxel_object[sv.id];
    for (int i : sv.point_indices) result.labels.labels[i] = object;
  }
  if (std::find(result.labels.labels.begin(), result.labels.labels.end(), -1) !=
      result.labels.labels.end()) {
    throw PipelineError(f, "labels", "a point was left without an object");
  }

  result.tree = tree;
  previous_ = std::move(tree);
  t.total = elapsed_ms(start);
  return result;
}

std::vector<InteractionEvent> PipelineState::finish() {
  auto rest = tracker_.finish();
  closed_.insert(closed_.end(), rest.begin(), rest.end());
  std::vector<InteractionEvent> out = closed_;
  std::sort(out.begin(), out.end(), event_less);
  return out;
}

SequenceResult run_sequence(const SequenceManifest& manifest, const PipelineConfig& config,
                            const std::function<void(const FrameResult&)>& on_frame) {
  PipelineState state(config);
  SequenceResult out;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const PointCloudFrame frame = load_frame(manifest.frame_paths[i], static_cast<int>(i));
    out.frames.push_back(state.process_frame(frame));
    if (on_frame) on_frame(out.frames.back());
  }
  out.interactions = state.finish();
  return out;
}

void write_run_report(const SequenceResult& result, std::ostream& out) {
  out << std::left << std::setw(7) << "frame" << std::right << std::setw(8) << "points"
      << std::setw(6) << "svs" << std::setw(7) << "blobs" << std::setw(8) << "objects"
      << std::setw(7) << "comps" << std::setw(6) << "segs" << std::setw(11) << "energy"
      << std::setw(8) << "merges" << std::setw(8) << "splits" << std::setw(10) << "ms" << '\n';
  int merges = 0, splits = 0;
  double total_ms = 0;
  for (const auto& r : result.frames) {
    int m = 0, s = 0;
    for (const auto& c : r.changes) (c.kind == TreeChange::kMerge ? m : s) += 1;
    merges += m;
    splits += s;
    total_ms += r.timings_ms.total;
    out << std::left << std::setw(7) << r.labels.frame_index << std::right << std::setw(8)
        << r.labels.labels.size() << std::setw(6) << r.num_supervoxels << std::setw(7)
        << r.tree.blobs.size() << std::setw(8) << r.tree.num_live_objects() << std::setw(7)
        << r.tree.components.size() << std::setw(6) << r.tree.segments.size() << std::setw(11)
        << std::fixed << std::setprecision(4) << r.assignment_energy << std::setw(8) << m
        << std::setw(8) << s << std::setw(10) << std::setprecision(1) << r.timings_ms.total
        << '\n';
  }
  out << std::defaultfloat;
  out << "frames " << result.frames.size() << '\n';
  out << "interactions " << result.interactions.size() << '\n';
  out << "merges " << merges << '\n';
  out << "splits " << splits << '\n';
  out << std::fixed << std::setprecision(1) << "total_ms " << total_ms << '\n'
      << std::defaultfloat;
  if (!result.frames.empty()) {
    StageTimings sum;
    for (const auto& r : result.frames) {
      const auto& t = r.timings_ms;
      sum.supervoxels += t.supervoxels;
      sum.graph += t.graph;
      sum.assignment += t.assignment;
      sum.cut += t.cut;
      sum.tree += t.tree;
      sum.confirm += t.confirm;
      sum.interactions += t.interactions;
    }
    out << std::fixed << std::setprecision(1) << "stage_ms supervoxels " << sum.supervoxels
        << " graph " << sum.graph << " assignment " << sum.assignment << " cut " << sum.cut
        << " tree " << sum.tree << " confirm " << sum.confirm << " interactions "
        << sum.interactions << '\n'
        << std::defaultfloat;
  }
}

}  // namespace gds
