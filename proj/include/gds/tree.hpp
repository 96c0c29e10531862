#pragma once

#include "gds/assignment.hpp"
#include "gds/graph.hpp"
#include "gds/graphcut.hpp"
#include "gds/interaction.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace gds {

struct TreeConfig {
  double merge_threshold = 0.7;   // T_merge
  double split_threshold = 0.3;   // T_split
  double sigma_distance = 0.16;   // 2 x seed_resolution
  double sigma_color = 30.0;
  double candidate_gap = 0.24;    // object pairs closer than this are scored
  int retention_frames = 10;      // K
  OversegConfig overseg;

  static TreeConfig for_seed_resolution(double seed_resolution);
  void validate() const;
};

struct ObjectNode {
  int object_id = 0;
  std::vector<int> component_ids;  // ascending; empty while dormant
  int birth_frame = 0;
  int last_seen_frame = 0;

  bool dormant() const { return component_ids.empty(); }
};

struct ComponentNode {
  int component_id = 0;
  int object_id = 0;
  int blob_id = 0;
  std::vector<int> supervoxel_ids;  // ascending, connected within the blob
};

struct SegmentNode {
  int segment_id = 0;
  int component_id = 0;
  int object_id = 0;
  std::vector<int> supervoxel_ids;
  Vec3 centroid = Vec3::Zero();
  Lab mean_color_lab;
  // Member supervoxel features at the segment's frame, parallel to
  // supervoxel_ids. Used to place cut seeds in later frames.
  std::vector<Vec3> member_centroids;
  std::vector<Lab> member_colors;
};

struct Similarity {
  double now = 0.0;
  double acc = 0.0;
};

// Symmetric pair table keyed by (smaller id, larger id).
class SimilarityTable {
 public:
  using Key = std::pair<int, int>;

  static Key key(int a, int b) { return a < b ? Key{a, b} : Key{b, a}; }
  void set(int a, int b, Similarity s) { table_[key(a, b)] = s; }
  const Similarity* find(int a, int b) const;
  Similarity* find(int a, int b);
  void erase_involving(int id);
  std::size_t size() const { return table_.size(); }
  auto begin() const { return table_.begin(); }
  auto end() const { return table_.end(); }
  auto begin() { return table_.begin(); }
  auto end() { return table_.end(); }

 private:
  std::map<Key, Similarity> table_;
};

struct SegTree {
  int frame_index = 0;
  std::vector<Blob> blobs;
  std::vector<ObjectNode> objects;        // ascending object_id, dormant included
  std::vector<ComponentNode> components;  // ascending component_id
  std::vector<SegmentNode> segments;      // live segments, segment_id == index
  std::vector<SegmentNode> dormant_segments;
  SimilarityTable object_similarity;
  SimilarityTable component_similarity;   // only pairs within one object
  std::vector<int> supervoxel_object;     // indexed by supervoxel id
  std::vector<Vec3> cut_boundary;         // midpoints of edges between objects

  int next_object_id = 0;
  int next_component_id = 0;

  const ObjectNode* object(int object_id) const;
  const ComponentNode* component(int component_id) const;
  int num_live_objects() const;

  // Segments fed to the next frame's assignment: live ones, then dormant.
  std::vector<SegmentNode> tracked_segments() const;
};

// Object id per supervoxel of one blob, as produced by restricted_cut.
using BlobCut = std::map<int, int>;

// Seeds each segment assigned to `blob` at the blob supervoxel closest to
// its centroid and color, plus the closest match of every member supervoxel
// whose match cost (distance / seed_resolution + dE / 100) is at most 1.
// Contested supervoxels go to the cheaper claim. Returns nothing when fewer
// than two objects keep a seed.
std::optional<CutProblem> make_blob_cut(const std::vector<SegmentNode>& segments,
                                        const std::vector<int>& assignment,
                                        const AdjacencyGraph& graph, const Blob& blob,
                                        const std::vector<Vec3>& previous_boundary,
                                        const CutParams& params);

// Cuts every blob whose assigned segments carry two or more objects, keyed
// by blob id. Blobs whose seeds collapse onto one object go to that object.
std::map<int, BlobCut> solve_blob_cuts(const SegTree& prev, const AdjacencyGraph& graph,
                                       const std::vector<Blob>& blobs,
                                       const std::vector<int>& assignment,
                                       const CutParams& params);

// exp(-gap / sigma_d) * exp(-dE(mean colors) / sigma_c); gap is the smallest
// centroid distance between the two supervoxel sets. Mean colors are
// point-weighted.
double compute_similarity(const std::vector<int>& a, const std::vector<int>& b,
                          const AdjacencyGraph& graph, const TreeConfig& config);

SegTree init_tree(int frame_index, const AdjacencyGraph& graph,
                  const std::vector<Blob>& blobs, const TreeConfig& config);

// `assignment` is aligned with prev.tracked_segments(); `cuts` must hold an
// entry for every blob whose assigned segments carry two or more objects.
SegTree update_tree(const SegTree& prev, int frame_index, const AdjacencyGraph& graph,
                    const std::vector<Blob>& blobs, const std::vector<int>& assignment,
                    const std::map<int, BlobCut>& cuts, const TreeConfig& config);

// S_acc = (S_now + S_acc_prev) / 2 for pairs present in `prev`, S_now
// otherwise.
void accumulate_similarities(SegTree& tree, const SegTree& prev);

struct TreeChange {
  enum Kind { kMerge, kSplit };
  Kind kind = kMerge;
  int object_id = 0;  // survivor of a merge, origin of a split
  int other_id = 0;   // absorbed or newly created object
};

// Applies merges (to a fixed point) and splits. Pairs touched by a change
// restart accumulation from their current similarity.
std::vector<TreeChange> confirm_splits_merges(SegTree& tree, const AdjacencyGraph& graph,
                                              const TreeConfig& config);

// Object ids hosted by each blob, by blob id.
std::map<int, std::vector<int>> blob_objects(const SegTree& tree);

// Tracks blobs hosting components of two or more objects.
class InteractionTracker {
 public:
  // Extends matching open events, opens new ones and returns the events
  // that lapsed this frame.
  std::vector<InteractionEvent> observe(const SegTree& tree);
  // Closes every open event.
  std::vector<InteractionEvent> finish();
  const std::vector<InteractionEvent>& open_events() const { return open_; }

 private:
  std::vector<InteractionEvent> open_;
};

// Indented text, one line per node: level, id, parent id, member count.
void dump_tree(const SegTree& tree, std::ostream& out);

}  // namespace gds
