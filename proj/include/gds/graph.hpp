#pragma once

#include "gds/supervoxel.hpp"

#include <vector>

namespace gds {

struct WeightedEdge {
  int u = 0;
  int v = 0;
  double weight = 0.0;
};

// Undirected weighted graph over local indices 0..n-1. `node_ids` maps
// local indices back to supervoxel ids.
struct WeightedGraph {
  std::vector<int> node_ids;
  std::vector<WeightedEdge> edges;  // u < v, sorted, no duplicates

  int num_nodes() const { return static_cast<int>(node_ids.size()); }
  std::vector<std::vector<std::pair<int, double>>> adjacency() const;
  bool is_connected() const;

  // Builds a graph with node_ids 0..n-1 from (u, v, w) triples.
  static WeightedGraph from_edges(int n, std::vector<WeightedEdge> edges);
};

struct GraphConfig {
  double seed_resolution = 0.08;
  double adjacency_radius = 0.12;  // 1.5 x seed_resolution
  double sigma_color = 30.0;
  double sigma_distance = 0.08;    // seed_resolution

  static GraphConfig for_seed_resolution(double seed_resolution);
};

// The adjacency graph G over one frame's supervoxels. Node index == id.
struct AdjacencyGraph {
  std::vector<SuperVoxel> nodes;
  WeightedGraph topology;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  const std::vector<WeightedEdge>& edges() const { return topology.edges; }
  double weight(int i, int j) const;  // 0 if no edge
  const std::vector<std::pair<int, double>>& neighbors(int i) const {
    return adjacency_[i];
  }

  // Graph induced by `members` (supervoxel ids); local order follows
  // `members` sorted ascending.
  WeightedGraph induced(std::vector<int> members) const;

  void finalize();  // rebuilds the adjacency cache from topology

 private:
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

struct Blob {
  int blob_id = 0;
  std::vector<int> member_supervoxels;  // ascending
};

double edge_weight(const SuperVoxel& a, const SuperVoxel& b,
                   const GraphConfig& config);

// Supervoxel ids must be a permutation of 0..n-1; input order is free.
AdjacencyGraph build_graph(std::vector<SuperVoxel> supervoxels,
                           const GraphConfig& config);

// Maximal connected node sets; blob ids follow each blob's smallest id.
std::vector<Blob> connected_components(const WeightedGraph& graph);
inline std::vector<Blob> connected_components(const AdjacencyGraph& graph) {
  return connected_components(graph.topology);
}

// Union-find with path compression and union by size; the representative
// of a set is always its smallest element.
class DisjointSets {
 public:
  explicit DisjointSets(int n);
  int find(int x);
  bool unite(int a, int b);

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
  std::vector<int> smallest_;
};

}  // namespace gds
