#pragma once

#include "gds/cloud_io.hpp"
#include "gds/interaction.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace gds {

// Maximum-weight one-to-one matching on a rows x cols weight matrix.
// Returns the matched column per row, or -1.
std::vector<int> max_weight_matching(const std::vector<std::vector<double>>& weight);

// 1 - (optimally matched overlap) / (points). 0 for an empty frame.
double segmentation_error(const LabeledFrame& labeled, const LabeledFrame& truth);

// Output id -> truth id from the optimal matching of overlaps summed over
// all frames.
std::map<int, int> match_labels(const std::vector<LabeledFrame>& labeled,
                                const std::vector<LabeledFrame>& truth);

struct InteractionScore {
  int found = 0;
  int truth = 0;
  int matched = 0;
  double precision = 1.0;  // 1 when nothing was found
  double recall = 1.0;     // 1 when nothing was expected
};

// A found event matches a truth event when its ids, mapped through
// `id_map` (identity for unmapped ids), equal the truth ids and both
// endpoints lie within `tolerance_frames`. One-to-one.
InteractionScore interaction_score(const std::vector<InteractionEvent>& found,
                                   const std::vector<InteractionEvent>& truth,
                                   int tolerance_frames = 1,
                                   const std::map<int, int>& id_map = {});

struct MetricsReport {
  std::vector<double> frame_errors;
  double mean_error = 0.0;
  InteractionScore interactions;
  int found_interaction_frames = 0;  // frames covered by any found event
  int truth_interaction_frames = 0;
};

MetricsReport evaluate_sequence(const std::vector<LabeledFrame>& labeled,
                                const std::vector<LabeledFrame>& truth,
                                const std::vector<InteractionEvent>& found,
                                const std::vector<InteractionEvent>& truth_events,
                                int tolerance_frames = 1);

// Aligned per-frame table, then a "metrics v1" block of key=value lines.
void write_metrics_report(const MetricsReport& report, std::ostream& out);

enum class ScenarioKind { kStatic, kApproachMergeSplit, kOcclusionSplit, kCrossing };

struct SynthScenario {
  ScenarioKind kind = ScenarioKind::kStatic;
  int frames = 25;
  int points_per_object = 6000;
  double noise_sigma = 0.002;    // meters
  double sphere_radius = 0.12;
  double box_x = 1.0;
  double box_y = 0.2;
  double box_z = 0.2;
  double separation = 1.0;       // static: center distance
  double closing_speed = 0.17;   // approach: gap change per frame
  double contact_gap = 0.01;     // approach: gap while touching
  int contact_frames = 5;        // approach: frames spent touching
  double mask_width = 0.13;      // occlusion: width of the removed slab
  double mask_speed = 0.22;      // occlusion: slab travel per frame
  double mask_center_frame = 6.5;  // occlusion: frame at which the slab crosses x = 0
  double contact_threshold = 0.16;
  std::uint64_t rng_seed = 1;

  void validate() const;
};

std::string scenario_kind_name(ScenarioKind kind);

// key=value lines; '#' comments; unknown keys and bad values throw
// ConfigError naming the key.
SynthScenario parse_scenario(const std::string& text);
SynthScenario load_scenario(const fs::path& path);
std::string format_scenario(const SynthScenario& scenario);

struct GeneratedSequence {
  std::vector<PointCloudFrame> frames;
  std::vector<LabeledFrame> truth;
  std::vector<InteractionEvent> interactions;
  std::vector<double> gaps;  // minimum surface gap per frame (inf if < 2 objects)
};

GeneratedSequence generate_scenario(const SynthScenario& scenario);

// Writes frames, ground truth, the truth interaction log and a manifest
// named "<name>.seq" into `dir`. Returns the manifest path.
fs::path write_generated(const GeneratedSequence& sequence, const std::string& name,
                         const fs::path& dir);

}  // namespace gds
