#pragma once

#include "gds/assignment.hpp"
#include "gds/cloud_io.hpp"
#include "gds/graph.hpp"
#include "gds/graphcut.hpp"
#include "gds/supervoxel.hpp"
#include "gds/tree.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gds {

// A stage failure inside the per-frame pipeline. The message starts with
// the frame index and stage name.
class PipelineError : public Error {
 public:
  PipelineError(int frame_index, const std::string& stage, const std::string& what);
  int frame_index() const { return frame_index_; }
  const std::string& stage() const { return stage_; }

 private:
  int frame_index_;
  std::string stage_;
};

struct PipelineConfig {
  SupervoxelConfig supervoxel;
  GraphConfig graph;
  EnergyWeights energy;
  GAConfig ga;  // ga.rng_seed is replaced per frame
  CutParams cut;
  TreeConfig tree;
  std::uint64_t rng_seed = 0;

  // Defaults with every length scale derived from `seed_resolution`.
  static PipelineConfig for_seed_resolution(double seed_resolution);
  void validate() const;
};

struct StageTimings {
  double supervoxels = 0;
  double graph = 0;
  double assignment = 0;
  double cut = 0;
  double tree = 0;
  double confirm = 0;
  double interactions = 0;
  double total = 0;
};

struct FrameResult {
  LabeledFrame labels;
  SegTree tree;
  StageTimings timings_ms;
  int num_supervoxels = 0;
  double assignment_energy = 0.0;  // 0 on the first frame
  std::vector<TreeChange> changes;
  std::vector<InteractionEvent> events_opened;
  std::vector<InteractionEvent> events_closed;
};

class PipelineState {
 public:
  explicit PipelineState(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }
  // Tree of the last processed frame, if any.
  const std::optional<SegTree>& previous() const { return previous_; }

  FrameResult process_frame(const PointCloudFrame& frame);

  // Closes the open interactions and returns every event of the run,
  // ordered by (start, end, ids).
  std::vector<InteractionEvent> finish();

 private:
  PipelineConfig config_;
  std::optional<SegTree> previous_;
  InteractionTracker tracker_;
  std::vector<InteractionEvent> closed_;
};

// Builds the assignment instance from the previous tree's tracked segments
// and the current blobs.
AssignmentProblem make_assignment_problem(const SegTree& previous, const AdjacencyGraph& graph,
                                          const std::vector<Blob>& blobs,
                                          const EnergyWeights& weights);

struct SequenceResult {
  std::vector<FrameResult> frames;
  std::vector<InteractionEvent> interactions;
};

// Processes the manifest's frames in order. `on_frame`, if set, sees every
// result before the next frame is loaded.
SequenceResult run_sequence(const SequenceManifest& manifest, const PipelineConfig& config,
                            const std::function<void(const FrameResult&)>& on_frame = {});

// Aligned-column per-frame summary followed by run totals.
void write_run_report(const SequenceResult& result, std::ostream& out);

}  // namespace gds
