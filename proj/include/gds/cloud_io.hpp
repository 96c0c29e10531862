#pragma once

#include "gds/common.hpp"
#include "gds/interaction.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace gds {

namespace fs = std::filesystem;

struct Point {
  Vec3 position = Vec3::Zero();
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

struct PointCloudFrame {
  int frame_index = 0;
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Per-point object ids aligned with a source frame. Also used for ground
// truth, where ids are the annotation's labels.
struct LabeledFrame {
  int frame_index = 0;
  std::vector<int> labels;
};

struct SequenceManifest {
  std::string name;
  std::vector<fs::path> frame_paths;
  std::vector<fs::path> ground_truth_paths;  // empty or parallel
  std::optional<fs::path> interactions_path;

  std::size_t size() const { return frame_paths.size(); }
  bool has_ground_truth() const { return !ground_truth_paths.empty(); }
};

// Frame files: "ptseq v1 <N>" then N lines "x y z r g b"; '#' comments.
// Colors outside [0,255] are clamped and reported through `warnings`.
PointCloudFrame load_frame(const fs::path& path, int frame_index = 0,
                           std::vector<std::string>* warnings = nullptr);
void write_frame(const PointCloudFrame& frame, const fs::path& path);

// Ground truth: "ptlab v1 <N>" then one integer label per line.
LabeledFrame load_ground_truth(const fs::path& path, int frame_index = 0);
void write_ground_truth(const LabeledFrame& truth, const fs::path& path);

// Label output: "frame_index point_index object_id" per line.
void write_labels(const LabeledFrame& frame, const fs::path& path);
LabeledFrame load_labels(const fs::path& path);

// Manifest lines: "name <s>", "frame <path>", "gt <path>" and
// "interactions <path>". Relative paths resolve against the manifest's
// directory. Every referenced file must exist.
SequenceManifest load_sequence(const fs::path& manifest_path);
void write_manifest(const SequenceManifest& manifest,
                    const fs::path& manifest_path);

// "start end blob_hint id1 id2 ..." sorted by start frame.
void write_interaction_log(std::vector<InteractionEvent> events,
                           const fs::path& path);
std::vector<InteractionEvent> load_interaction_log(const fs::path& path);

// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace gds
