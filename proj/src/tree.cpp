#include "gds/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <tuple>

namespace gds {

namespace {

// Largest match cost at which a previous member supervoxel seeds the cut.
constexpr double kSeedMatchCost = 1.0;

struct Features {
  Vec3 centroid = Vec3::Zero();
  Lab color;
};

// Point-weighted centroid and color over a supervoxel set.
Features features_of(const std::vector<int>& members, const AdjacencyGraph& graph) {
  Features f;
  double total = 0.0;
  for (int id : members) {
    const auto& sv = graph.nodes[id];
    const double w = static_cast<double>(sv.size());
    f.centroid += w * sv.centroid;
    f.color.L += w * sv.mean_color_lab.L;
    f.color.a += w * sv.mean_color_lab.a;
    f.color.b += w * sv.mean_color_lab.b;
    total += w;
  }
  if (total > 0.0) {
    f.centroid /= total;
    f.color.L /= total;
    f.color.a /= total;
    f.color.b /= total;
  }
  return f;
}

double min_gap(const std::vector<int>& a, const std::vector<int>& b,
               const AdjacencyGraph& graph) {
  double best = std::numeric_limits<double>::infinity();
  for (int i : a)
    for (int j : b) {
      best = std::min(best, (graph.nodes[i].centroid - graph.nodes[j].centroid).squaredNorm());
    }
  return std::sqrt(best);
}

// Connected pieces of `members` in the adjacency graph, each ascending,
// ordered by smallest id.
std::vector<std::vector<int>> connected_pieces(const std::vector<int>& members,
                                               const AdjacencyGraph& graph) {
  std::vector<std::vector<int>> out;
  for (auto& blob : connected_components(graph.induced(members))) {
    out.push_back(std::move(blob.member_supervoxels));
  }
  return out;
}

std::vector<int> object_supervoxels(const SegTree& tree, int object_id) {
  std::vector<int> out;
  for (const auto& c : tree.components) {
    if (c.object_id == object_id) {
      out.insert(out.end(), c.supervoxel_ids.begin(), c.supervoxel_ids.end());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ObjectNode* find_object(SegTree& tree, int object_id) {
  auto it = std::lower_bound(tree.objects.begin(), tree.objects.end(), object_id,
                             [](const ObjectNode& o, int id) { return o.object_id < id; });
  return it != tree.objects.end() && it->object_id == object_id ? &*it : nullptr;
}

void sort_tree(SegTree& tree) {
  std::sort(tree.objects.begin(), tree.objects.end(),
            [](const ObjectNode& a, const ObjectNode& b) { return a.object_id < b.object_id; });
  std::sort(tree.components.begin(), tree.components.end(),
            [](const ComponentNode& a, const ComponentNode& b) {
              return a.component_id < b.component_id;
            });
}

// Rebuilds component lists, the per-supervoxel object map and the cut
// boundary from the component set.
void refresh(SegTree& tree, const AdjacencyGraph& graph) {
  sort_tree(tree);
  for (auto& o : tree.objects) o.component_ids.clear();
  tree.supervoxel_object.assign(graph.num_nodes(), -1);
  for (const auto& c : tree.components) {
    ObjectNode* o = find_object(tree, c.object_id);
    if (o == nullptr) throw Error("component " + std::to_string(c.component_id) +
                                  " refers to unknown object " + std::to_string(c.object_id));
    o->component_ids.push_back(c.component_id);
    for (int sv : c.supervoxel_ids) tree.supervoxel_object[sv] = c.object_id;
  }
  tree.cut_boundary.clear();
  for (const auto& e : graph.edges()) {
    if (tree.supervoxel_object[e.u] != tree.supervoxel_object[e.v]) {
      tree.cut_boundary.push_back(0.5 * (graph.nodes[e.u].centroid + graph.nodes[e.v].centroid));
    }
  }
}

void resegment(SegTree& tree, const AdjacencyGraph& graph, const TreeConfig& config) {
  tree.segments.clear();
  for (const auto& c : tree.components) {
    const WeightedGraph sub = graph.induced(c.supervoxel_ids);
    for (const auto& part : oversegment(sub, config.overseg)) {
      SegmentNode s;
      s.segment_id = static_cast<int>(tree.segments.size());
      s.component_id = c.component_id;
      s.object_id = c.object_id;
      s.supervoxel_ids = part;
      std::sort(s.supervoxel_ids.begin(), s.supervoxel_ids.end());
      const Features f = features_of(s.supervoxel_ids, graph);
      s.centroid = f.centroid;
      s.mean_color_lab = f.color;
      for (int sv : s.supervoxel_ids) {
        s.member_centroids.push_back(graph.nodes[sv].centroid);
        s.member_colors.push_back(graph.nodes[sv].mean_color_lab);
      }
      tree.segments.push_back(std::move(s));
    }
  }
}

void score_object_pair(SegTree& tree, int a, int b, const std::vector<int>& sa,
                       const std::vector<int>& sb, const AdjacencyGraph& graph,
                       const TreeConfig& config, bool share_blob) {
  if (!share_blob && min_gap(sa, sb, graph) >= config.candidate_gap) return;
  const double s = compute_similarity(sa, sb, graph, config);
  tree.object_similarity.set(a, b, {s, s});
}

// Current similarities for every candidate pair; acc starts equal to now.
void score_all(SegTree& tree, const AdjacencyGraph& graph, const TreeConfig& config) {
  tree.object_similarity = {};
  tree.component_similarity = {};

  std::map<int, std::vector<int>> members;
  std::map<int, std::set<int>> blobs_of;
  for (const auto& c : tree.components) {
    auto& m = members[c.object_id];
    m.insert(m.end(), c.supervoxel_ids.begin(), c.supervoxel_ids.end());
    blobs_of[c.object_id].insert(c.blob_id);
  }
  for (auto a = members.begin(); a != members.end(); ++a) {
    for (auto b = std::next(a); b != members.end(); ++b) {
      const auto& ba = blobs_of[a->first];
      const auto& bb = blobs_of[b->first];
      const bool share = std::any_of(ba.begin(), ba.end(), [&](int x) { return bb.count(x); });
      score_object_pair(tree, a->first, b->first, a->second, b->second, graph, config, share);
    }
  }
  for (std::size_t i = 0; i < tree.components.size(); ++i) {
    for (std::size_t j = i + 1; j < tree.components.size(); ++j) {
      const auto& ci = tree.components[i];
      const auto& cj = tree.components[j];
      if (ci.object_id != cj.object_id) continue;
      const double s = compute_similarity(ci.supervoxel_ids, cj.supervoxel_ids, graph, config);
      tree.component_similarity.set(ci.component_id, cj.component_id, {s, s});
    }
  }
}

// Re-scores every pair involving `object_id` (object level) and every
// component pair inside it; accumulation restarts from the new values.
void rescore_object(SegTree& tree, int object_id, const AdjacencyGraph& graph,
                    const TreeConfig& config) {
  tree.object_similarity.erase_involving(object_id);
  const std::vector<int> mine = object_supervoxels(tree, object_id);
  std::set<int> my_blobs;
  for (const auto& c : tree.components) {
    if (c.object_id == object_id) my_blobs.insert(c.blob_id);
  }
  for (const auto& o : tree.objects) {
    if (o.object_id == object_id || o.dormant()) continue;
    bool share = false;
    for (const auto& c : tree.components) {
      if (c.object_id == o.object_id && my_blobs.count(c.blob_id)) share = true;
    }
    score_object_pair(tree, object_id, o.object_id, mine, object_supervoxels(tree, o.object_id),
                      graph, config, share);
  }
  std::vector<const ComponentNode*> comps;
  for (const auto& c : tree.components) {
    if (c.object_id == object_id) comps.push_back(&c);
  }
  for (const auto* c : comps) tree.component_similarity.erase_involving(c->component_id);
  for (std::size_t i = 0; i < comps.size(); ++i)
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      const double s =
          compute_similarity(comps[i]->supervoxel_ids, comps[j]->supervoxel_ids, graph, config);
      tree.component_similarity.set(comps[i]->component_id, comps[j]->component_id, {s, s});
    }
}

// After a merge an object may own several components in one blob; fuse them
// into maximal connected pieces. Piece ids go to the old component with the
// largest overlap (smaller id on ties).
void rebuild_components(SegTree& tree, int object_id, const AdjacencyGraph& graph) {
  std::map<int, std::vector<const ComponentNode*>> by_blob;
  for (const auto& c : tree.components) {
    if (c.object_id == object_id) by_blob[c.blob_id].push_back(&c);
  }
  std::vector<ComponentNode> rebuilt;
  std::set<int> removed;
  for (const auto& [blob_id, comps] : by_blob) {
    if (comps.size() < 2) continue;
    std::vector<int> all;
    std::map<int, int> owner;
    for (const auto* c : comps) {
      removed.insert(c->component_id);
      for (int sv : c->supervoxel_ids) {
        all.push_back(sv);
        owner[sv] = c->component_id;
      }
    }
    std::sort(all.begin(), all.end());
    std::set<int> used;
    for (auto& piece : connected_pieces(all, graph)) {
      std::map<int, int> overlap;
      for (int sv : piece) ++overlap[owner[sv]];
      int best = -1;
      for (const auto& [cid, n] : overlap) {
        if (used.count(cid)) continue;
        if (best < 0 || n > overlap[best]) best = cid;
      }
      if (best < 0) best = tree.next_component_id++;
      used.insert(best);
      rebuilt.push_back({best, object_id, blob_id, std::move(piece)});
    }
  }
  if (removed.empty()) return;
  std::erase_if(tree.components,
                [&](const ComponentNode& c) { return removed.count(c.component_id) > 0; });
  for (const int cid : removed) tree.component_similarity.erase_involving(cid);
  tree.components.insert(tree.components.end(), rebuilt.begin(), rebuilt.end());
  sort_tree(tree);
}

}  // namespace

TreeConfig TreeConfig::for_seed_resolution(double seed_resolution) {
  TreeConfig c;
  c.sigma_distance = 2.0 * seed_resolution;
  c.candidate_gap = 3.0 * seed_resolution;
  return c;
}

void TreeConfig::validate() const {
  if (!(split_threshold >= 0.0 && split_threshold <= 1.0)) {
    throw ConfigError("tree.split_threshold must lie in [0,1]");
  }
  if (!(merge_threshold >= 0.0 && merge_threshold <= 1.0)) {
    throw ConfigError("tree.merge_threshold must lie in [0,1]");
  }
  if (!(split_threshold < merge_threshold)) {
    throw ConfigError("tree.split_threshold must be below tree.merge_threshold");
  }
  if (!(sigma_distance > 0.0)) throw ConfigError("tree.sigma_distance must be > 0");
  if (!(sigma_color > 0.0)) throw ConfigError("tree.sigma_color must be > 0");
  if (!(candidate_gap >= 0.0)) throw ConfigError("tree.candidate_gap must be >= 0");
  if (retention_frames < 0) throw ConfigError("tree.retention_frames must be >= 0");
  overseg.validate();
}

const Similarity* SimilarityTable::find(int a, int b) const {
  auto it = table_.find(key(a, b));
  return it == table_.end() ? nullptr : &it->second;
}

Similarity* SimilarityTable::find(int a, int b) {
  auto it = table_.find(key(a, b));
  return it == table_.end() ? nullptr : &it->second;
}

void SimilarityTable::erase_involving(int id) {
  std::erase_if(table_, [id](const auto& kv) {
    return kv.first.first == id || kv.first.second == id;
  });
}

const ObjectNode* SegTree::object(int object_id) const {
  return find_object(const_cast<SegTree&>(*this), object_id);
}

const ComponentNode* SegTree::component(int component_id) const {
  auto it = std::lower_bound(
      components.begin(), components.end(), component_id,
      [](const ComponentNode& c, int id) { return c.component_id < id; });
  return it != components.end() && it->component_id == component_id ? &*it : nullptr;
}

int SegTree::num_live_objects() const {
  return static_cast<int>(std::count_if(objects.begin(), objects.end(),
                                        [](const ObjectNode& o) { return !o.dormant(); }));
}

std::vector<SegmentNode> SegTree::tracked_segments() const {
  std::vector<SegmentNode> out = segments;
  out.insert(out.end(), dormant_segments.begin(), dormant_segments.end());
  return out;
}

double compute_similarity(const std::vector<int>& a, const std::vector<int>& b,
                          const AdjacencyGraph& graph, const TreeConfig& config) {
  if (a.empty() || b.empty()) throw DataError("similarity of an empty supervoxel set");
  const double gap = min_gap(a, b, graph);
  const double color = delta_e(features_of(a, graph).color, features_of(b, graph).color);
  return std::exp(-gap / config.sigma_distance) * std::exp(-color / config.sigma_color);
}

std::optional<CutProblem> make_blob_cut(const std::vector<SegmentNode>& segments,
                                        const std::vector<int>& assignment,
                                        const AdjacencyGraph& graph, const Blob& blob,
                                        const std::vector<Vec3>& previous_boundary,
                                        const CutParams& params) {
  struct Claim {
    double cost;
    int object;
  };
  std::map<int, Claim> claims;  // supervoxel id -> cheapest claim
  auto cost = [&](int sv, const Vec3& c, const Lab& color) {
    return (graph.nodes[sv].centroid - c).norm() / params.seed_resolution +
           delta_e(graph.nodes[sv].mean_color_lab, color) / kLabScale;
  };
  auto claim = [&](const Vec3& c, const Lab& color, int object, double max_cost) {
    int best_sv = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int sv : blob.member_supervoxels) {
      const double d = cost(sv, c, color);
      if (d < best) {
        best = d;
        best_sv = sv;
      }
    }
    if (best_sv < 0 || best > max_cost) return;
    auto it = claims.find(best_sv);
    if (it == claims.end() || best < it->second.cost) claims[best_sv] = Claim{best, object};
  };
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (assignment[s] != blob.blob_id) continue;
    const SegmentNode& seg = segments[s];
    claim(seg.centroid, seg.mean_color_lab, seg.object_id,
          std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < seg.member_centroids.size(); ++k) {
      claim(seg.member_centroids[k], seg.member_colors[k], seg.object_id, kSeedMatchCost);
    }
  }
  CutProblem p;
  std::set<int> labels;
  for (const auto& [sv, c] : claims) {
    p.label_seeds[sv] = c.object;
    labels.insert(c.object);
  }
  if (labels.size() < 2) return std::nullopt;
  p.subgraph = graph.induced(blob.member_supervoxels);
  for (int id : p.subgraph.node_ids) {
    p.centroids.push_back(graph.nodes[id].centroid);
    p.colors.push_back(graph.nodes[id].mean_color_lab);
  }
  p.previous_cut_boundary = previous_boundary;
  p.params = params;
  return p;
}

SegTree init_tree(int frame_index, const AdjacencyGraph& graph,
                  const std::vector<Blob>& blobs, const TreeConfig& config) {
  SegTree tree;
  tree.frame_index = frame_index;
  tree.blobs = blobs;
  for (const auto& blob : blobs) {
    const int id = tree.next_object_id++;
    const int cid = tree.next_component_id++;
    tree.objects.push_back({id, {}, frame_index, frame_index});
    tree.components.push_back({cid, id, blob.blob_id, blob.member_supervoxels});
  }
  refresh(tree, graph);
  resegment(tree, graph, config);
  score_all(tree, graph, config);
  for (auto& [key, s] : tree.object_similarity) s.acc = 0.0;
  for (auto& [key, s] : tree.component_similarity) s.acc = 0.0;
  return tree;
}

SegTree update_tree(const SegTree& prev, int frame_index, const AdjacencyGraph& graph,
                    const std::vector<Blob>& blobs, const std::vector<int>& assignment,
                    const std::map<int, BlobCut>& cuts, const TreeConfig& config) {
  const std::vector<SegmentNode> tracked = prev.tracked_segments();
  if (assignment.size() != tracked.size()) {
    throw DataError("assignment covers " + std::to_string(assignment.size()) +
                    " segments, tree tracks " + std::to_string(tracked.size()));
  }
  for (std::size_t b = 0; b < blobs.size(); ++b) {
    if (blobs[b].blob_id != static_cast<int>(b)) throw DataError("blob ids must be 0..n-1");
  }
  for (int label : assignment) {
    if (label != kNoBlob && (label < 0 || label >= static_cast<int>(blobs.size()))) {
      throw DataError("assignment refers to unknown blob " + std::to_string(label));
    }
  }

  SegTree tree;
  tree.frame_index = frame_index;
  tree.blobs = blobs;
  tree.next_object_id = prev.next_object_id;
  tree.next_component_id = prev.next_component_id;

  std::vector<std::set<int>> blob_labels(blobs.size());
  for (std::size_t s = 0; s < tracked.size(); ++s) {
    if (assignment[s] != kNoBlob) blob_labels[assignment[s]].insert(tracked[s].object_id);
  }

  // Attribute supervoxels to objects, then cut (object, blob) sets into
  // connected components.
  std::vector<int> sv_object(graph.num_nodes(), -1);
  for (const auto& blob : blobs) {
    const auto& labels = blob_labels[blob.blob_id];
    if (labels.size() >= 2) {
      auto it = cuts.find(blob.blob_id);
      if (it == cuts.end()) {
        throw DataError("cut missing for multi-object blob " + std::to_string(blob.blob_id));
      }
      for (int sv : blob.member_supervoxels) {
        auto l = it->second.find(sv);
        if (l == it->second.end() || !labels.count(l->second)) {
          throw DataError("cut of blob " + std::to_string(blob.blob_id) +
                          " does not label supervoxel " + std::to_string(sv) + " validly");
        }
        sv_object[sv] = l->second;
      }
    } else {
      const int id = labels.empty() ? tree.next_object_id++ : *labels.begin();
      for (int sv : blob.member_supervoxels) sv_object[sv] = id;
    }
  }

  struct Provisional {
    int object_id;
    int blob_id;
    std::vector<int> members;
  };
  std::vector<Provisional> provisional;
  std::vector<int> sv_piece(graph.num_nodes(), -1);
  for (const auto& blob : blobs) {
    std::map<int, std::vector<int>> by_object;
    for (int sv : blob.member_supervoxels) by_object[sv_object[sv]].push_back(sv);
    for (const auto& [object_id, members] : by_object) {
      for (auto& piece : connected_pieces(members, graph)) {
        for (int sv : piece) sv_piece[sv] = static_cast<int>(provisional.size());
        provisional.push_back({object_id, blob.blob_id, std::move(piece)});
      }
    }
  }

  // Component ids follow the segments: each previous component votes, by
  // supervoxel count, for the piece its assigned segments land in.
  std::map<std::pair<int, int>, double> votes;  // (prev component, piece)
  for (std::size_t s = 0; s < tracked.size(); ++s) {
    if (assignment[s] == kNoBlob) continue;
    const auto& seg = tracked[s];
    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int sv : blobs[assignment[s]].member_supervoxels) {
      if (sv_object[sv] != seg.object_id) continue;
      const double d = (graph.nodes[sv].centroid - seg.centroid).squaredNorm();
      if (d < best) {
        best = d;
        nearest = sv;
      }
    }
    if (nearest >= 0) {
      votes[{seg.component_id, sv_piece[nearest]}] += static_cast<double>(seg.supervoxel_ids.size());
    }
  }
  std::vector<std::tuple<double, int, int>> ranked;
  for (const auto& [key, v] : votes) ranked.emplace_back(-v, key.first, key.second);
  std::sort(ranked.begin(), ranked.end());
  std::vector<int> piece_id(provisional.size(), -1);
  std::set<int> taken;
  for (const auto& [neg, cid, piece] : ranked) {
    if (piece_id[piece] >= 0 || taken.count(cid)) continue;
    piece_id[piece] = cid;
    taken.insert(cid);
  }
  for (std::size_t k = 0; k < provisional.size(); ++k) {
    if (piece_id[k] < 0) piece_id[k] = tree.next_component_id++;
    tree.components.push_back({piece_id[k], provisional[k].object_id, provisional[k].blob_id,
                               std::move(provisional[k].members)});
  }

  // Objects: live ones carry their history, vanished ones go dormant until
  // the retention window runs out.
  std::set<int> live;
  for (const auto& c : tree.components) live.insert(c.object_id);
  for (int id : live) {
    const ObjectNode* old = prev.object(id);
    tree.objects.push_back({id, {}, old ? old->birth_frame : frame_index, frame_index});
  }
  for (const auto& o : prev.objects) {
    if (live.count(o.object_id)) continue;
    if (frame_index - o.last_seen_frame > config.retention_frames) continue;
    tree.objects.push_back({o.object_id, {}, o.birth_frame, o.last_seen_frame});
    const auto& source = o.dormant() ? prev.dormant_segments : prev.segments;
    for (const auto& s : source) {
      if (s.object_id == o.object_id) tree.dormant_segments.push_back(s);
    }
  }

  refresh(tree, graph);
  resegment(tree, graph, config);
  score_all(tree, graph, config);
  return tree;
}

std::map<int, BlobCut> solve_blob_cuts(const SegTree& prev, const AdjacencyGraph& graph,
                                       const std::vector<Blob>& blobs,
                                       const std::vector<int>& assignment,
                                       const CutParams& params) {
  const std::vector<SegmentNode> tracked = prev.tracked_segments();
  std::map<int, BlobCut> out;
  for (const auto& blob : blobs) {
    std::set<int> labels;
    for (std::size_t s = 0; s < tracked.size(); ++s) {
      if (assignment[s] == blob.blob_id) labels.insert(tracked[s].object_id);
    }
    if (labels.size() < 2) continue;
    auto problem = make_blob_cut(tracked, assignment, graph, blob, prev.cut_boundary, params);
    if (problem) {
      out[blob.blob_id] = restricted_cut(*problem);
    } else {
      // Every seed collapsed onto one object: the blob is that object's.
      int winner = -1;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < tracked.size(); ++s) {
        if (assignment[s] != blob.blob_id) continue;
        for (int sv : blob.member_supervoxels) {
          const double d = (graph.nodes[sv].centroid - tracked[s].centroid).norm();
          if (d < best) {
            best = d;
            winner = tracked[s].object_id;
          }
        }
      }
      BlobCut all;
      for (int sv : blob.member_supervoxels) all[sv] = winner;
      out[blob.blob_id] = std::move(all);
    }
  }
  return out;
}

void accumulate_similarities(SegTree& tree, const SegTree& prev) {
  for (auto& [key, s] : tree.object_similarity) {
    const Similarity* old = prev.object_similarity.find(key.first, key.second);
    s.acc = old ? 0.5 * (s.now + old->acc) : s.now;
  }
  for (auto& [key, s] : tree.component_similarity) {
    const Similarity* old = prev.component_similarity.find(key.first, key.second);
    s.acc = old ? 0.5 * (s.now + old->acc) : s.now;
  }
}

std::vector<TreeChange> confirm_splits_merges(SegTree& tree, const AdjacencyGraph& graph,
                                              const TreeConfig& config) {
  std::vector<TreeChange> changes;
  std::set<int> merged;

  // Merges, repeated until no pair exceeds the threshold.
  while (true) {
    std::map<int, int> parent;
    std::function<int(int)> root = [&](int x) {
      auto it = parent.find(x);
      if (it == parent.end() || it->second == x) return x;
      return it->second = root(it->second);
    };
    bool any = false;
    for (const auto& [key, s] : tree.object_similarity) {
      if (s.acc <= config.merge_threshold) continue;
      const int a = root(key.first);
      const int b = root(key.second);
      if (a == b) continue;
      parent[std::max(a, b)] = std::min(a, b);
      parent.try_emplace(std::min(a, b), std::min(a, b));
      any = true;
    }
    if (!any) break;
    std::set<int> survivors;
    for (const auto& [id, p] : std::map<int, int>(parent)) {
      const int r = root(id);
      if (r == id) continue;
      for (auto& c : tree.components) {
        if (c.object_id == id) c.object_id = r;
      }
      tree.object_similarity.erase_involving(id);
      std::erase_if(tree.objects, [id](const ObjectNode& o) { return o.object_id == id; });
      changes.push_back({TreeChange::kMerge, r, id});
      survivors.insert(r);
    }
    for (int r : survivors) {
      rebuild_components(tree, r, graph);
      merged.insert(r);
    }
    refresh(tree, graph);
    for (int r : survivors) rescore_object(tree, r, graph, config);
  }

  // Splits: single-link clusters of components; the cluster holding the
  // oldest component keeps the id.
  const std::vector<ObjectNode> snapshot = tree.objects;
  for (const auto& o : snapshot) {
    if (o.component_ids.size() < 2 || merged.count(o.object_id)) continue;
    const auto& ids = o.component_ids;
    std::map<int, int> index;
    for (std::size_t k = 0; k < ids.size(); ++k) index[ids[k]] = static_cast<int>(k);
    DisjointSets sets(static_cast<int>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const Similarity* s = tree.component_similarity.find(ids[i], ids[j]);
        if (s && s->acc > config.split_threshold) {
          sets.unite(static_cast<int>(i), static_cast<int>(j));
        }
      }
    std::map<int, int> new_object;  // cluster root -> object id
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const int r = sets.find(static_cast<int>(k));
      if (r == 0 || new_object.count(r)) continue;
      const int fresh = tree.next_object_id++;
      new_object[r] = fresh;
      tree.objects.push_back({fresh, {}, tree.frame_index, tree.frame_index});
      changes.push_back({TreeChange::kSplit, o.object_id, fresh});
    }
    if (new_object.empty()) continue;
    for (auto& c : tree.components) {
      auto it = index.find(c.component_id);
      if (it == index.end() || c.object_id != o.object_id) continue;
      const int r = sets.find(it->second);
      if (r != 0) c.object_id = new_object[r];
    }
    refresh(tree, graph);
    rescore_object(tree, o.object_id, graph, config);
    for (const auto& [r, id] : new_object) rescore_object(tree, id, graph, config);
  }

  if (!changes.empty()) {
    refresh(tree, graph);
    resegment(tree, graph, config);
  }
  return changes;
}

std::map<int, std::vector<int>> blob_objects(const SegTree& tree) {
  std::map<int, std::set<int>> sets;
  for (const auto& c : tree.components) sets[c.blob_id].insert(c.object_id);
  std::map<int, std::vector<int>> out;
  for (const auto& [blob, ids] : sets) out[blob] = std::vector<int>(ids.begin(), ids.end());
  return out;
}

std::vector<InteractionEvent> InteractionTracker::observe(const SegTree& tree) {
  std::vector<char> extended(open_.size(), 0);
  std::set<std::vector<int>> seen;
  std::vector<InteractionEvent> opened;
  for (const auto& [blob, ids] : blob_objects(tree)) {
    if (ids.size() < 2 || !seen.insert(ids).second) continue;
    bool matched = false;
    for (std::size_t k = 0; k < open_.size(); ++k) {
      if (!extended[k] && open_[k].object_ids == ids) {
        open_[k].end_frame = tree.frame_index;
        open_[k].blob_trace.push_back(blob);
        extended[k] = 1;
        matched = true;
        break;
      }
    }
    if (!matched) opened.push_back({tree.frame_index, tree.frame_index, ids, {blob}});
  }
  std::vector<InteractionEvent> closed;
  std::vector<InteractionEvent> still_open;
  for (std::size_t k = 0; k < open_.size(); ++k) {
    (extended[k] ? still_open : closed).push_back(std::move(open_[k]));
  }
  still_open.insert(still_open.end(), opened.begin(), opened.end());
  open_ = std::move(still_open);
  return closed;
}

std::vector<InteractionEvent> InteractionTracker::finish() {
  std::vector<InteractionEvent> out = std::move(open_);
  open_.clear();
  return out;
}

void dump_tree(const SegTree& tree, std::ostream& out) {
  out << "tree v1 frame " << tree.frame_index << '\n';
  out << "root 0 -1 " << tree.num_live_objects() << '\n';
  for (const auto& o : tree.objects) {
    out << "  object " << o.object_id << " 0 " << o.component_ids.size() << '\n';
    for (int cid : o.component_ids) {
      const ComponentNode* c = tree.component(cid);
      out << "    component " << c->component_id << ' ' << o.object_id << ' '
          << c->supervoxel_ids.size() << '\n';
      for (const auto& s : tree.segments) {
        if (s.component_id != cid) continue;
        out << "      segment " << s.segment_id << ' ' << cid << ' ' << s.supervoxel_ids.size()
            << '\n';
      }
    }
  }
}

}  // namespace gds
