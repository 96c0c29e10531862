#include "gds/graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

namespace gds {

namespace {

std::uint64_t pack_key(const VoxelKey& k) {
  // 21 bits per axis (offset binary); +-8 km at the default resolution.
  constexpr std::int64_t kOffset = 1 << 20;
  auto axis = [](int c) {
    return static_cast<std::uint64_t>(static_cast<std::int64_t>(c) + kOffset) &
           ((std::uint64_t{1} << 21) - 1);
  };
  return (axis(k[0]) << 42) | (axis(k[1]) << 21) | axis(k[2]);
}

}  // namespace

std::vector<std::vector<std::pair<int, double>>> WeightedGraph::adjacency() const {
  std::vector<std::vector<std::pair<int, double>>> adj(node_ids.size());
  for (const auto& e : edges) {
    adj[e.u].emplace_back(e.v, e.weight);
    adj[e.v].emplace_back(e.u, e.weight);
  }
  return adj;
}

bool WeightedGraph::is_connected() const {
  const int n = num_nodes();
  if (n <= 1) return true;
  DisjointSets sets(n);
  int merges = 0;
  for (const auto& e : edges) merges += sets.unite(e.u, e.v) ? 1 : 0;
  return merges == n - 1;
}

WeightedGraph WeightedGraph::from_edges(int n, std::vector<WeightedEdge> edges) {
  WeightedGraph g;
  g.node_ids.resize(n);
  std::iota(g.node_ids.begin(), g.node_ids.end(), 0);
  for (auto& e : edges) {
    if (e.u == e.v) throw DataError("self-loop in edge list");
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u < 0 || e.v >= n) throw DataError("edge endpoint out of range");
  }
  std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].u == edges[i - 1].u && edges[i].v == edges[i - 1].v) {
      throw DataError("duplicate edge in edge list");
    }
  }
  g.edges = std::move(edges);
  return g;
}

GraphConfig GraphConfig::for_seed_resolution(double seed_resolution) {
  GraphConfig c;
  c.seed_resolution = seed_resolution;
  c.adjacency_radius = 1.5 * seed_resolution;
  c.sigma_distance = seed_resolution;
  return c;
}

double AdjacencyGraph::weight(int i, int j) const {
  for (const auto& [k, w] : adjacency_[i]) {
    if (k == j) return w;
  }
  return 0.0;
}

WeightedGraph AdjacencyGraph::induced(std::vector<int> members) const {
  std::sort(members.begin(), members.end());
  std::unordered_map<int, int> local;
  for (std::size_t k = 0; k < members.size(); ++k) {
    local.emplace(members[k], static_cast<int>(k));
  }
  WeightedGraph g;
  g.node_ids = members;
  for (std::size_t k = 0; k < members.size(); ++k) {
    for (const auto& [j, w] : adjacency_[members[k]]) {
      auto it = local.find(j);
      if (it != local.end() && it->second > static_cast<int>(k)) {
        g.edges.push_back({static_cast<int>(k), it->second, w});
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  return g;
}

void AdjacencyGraph::finalize() { adjacency_ = topology.adjacency(); }

double edge_weight(const SuperVoxel& a, const SuperVoxel& b,
                   const GraphConfig& config) {
  const double w = std::exp(-delta_e(a.mean_color_lab, b.mean_color_lab) /
                            config.sigma_color) *
                   std::exp(-(a.centroid - b.centroid).norm() /
                            config.sigma_distance);
  return std::max(w, std::numeric_limits<double>::min());
}

AdjacencyGraph build_graph(std::vector<SuperVoxel> supervoxels,
                           const GraphConfig& config) {
  std::sort(supervoxels.begin(), supervoxels.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  const int n = static_cast<int>(supervoxels.size());
  for (int i = 0; i < n; ++i) {
    if (supervoxels[i].id != i) {
      throw DataError("supervoxel ids must be 0..n-1 without gaps");
    }
  }

  std::set<std::pair<int, int>> pairs;

  std::unordered_map<std::uint64_t, int> owner;
  for (const auto& sv : supervoxels) {
    for (const auto& k : sv.voxel_keys) owner.emplace(pack_key(k), sv.id);
  }
  for (const auto& sv : supervoxels) {
    for (const auto& k : sv.voxel_keys) {
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            auto it = owner.find(pack_key({k[0] + dx, k[1] + dy, k[2] + dz}));
            if (it != owner.end() && it->second > sv.id) {
              pairs.emplace(sv.id, it->second);
            }
          }
        }
      }
    }
  }

  const double r2 = config.adjacency_radius * config.adjacency_radius;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((supervoxels[i].centroid - supervoxels[j].centroid).squaredNorm() < r2) {
        pairs.emplace(i, j);
      }
    }
  }

  AdjacencyGraph graph;
  graph.topology.node_ids.resize(n);
  std::iota(graph.topology.node_ids.begin(), graph.topology.node_ids.end(), 0);
  graph.topology.edges.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    graph.topology.edges.push_back(
        {i, j, edge_weight(supervoxels[i], supervoxels[j], config)});
  }
  graph.nodes = std::move(supervoxels);
  graph.finalize();
  return graph;
}

std::vector<Blob> connected_components(const WeightedGraph& graph) {
  const int n = graph.num_nodes();
  DisjointSets sets(n);
  for (const auto& e : graph.edges) sets.unite(e.u, e.v);

  // Local index order follows node_ids only when node_ids is ascending, so
  // order blobs by their smallest node id explicitly.
  std::unordered_map<int, std::size_t> slot;
  std::vector<Blob> blobs;
  for (int i = 0; i < n; ++i) {
    auto [it, inserted] = slot.try_emplace(sets.find(i), blobs.size());
    if (inserted) blobs.emplace_back();
    blobs[it->second].member_supervoxels.push_back(graph.node_ids[i]);
  }
  for (auto& b : blobs) {
    std::sort(b.member_supervoxels.begin(), b.member_supervoxels.end());
  }
  std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
    return a.member_supervoxels.front() < b.member_supervoxels.front();
  });
  for (std::size_t k = 0; k < blobs.size(); ++k) blobs[k].blob_id = static_cast<int>(k);
  return blobs;
}

DisjointSets::DisjointSets(int n) : parent_(n), size_(n, 1), smallest_(n) {
  std::iota(parent_.begin(), parent_.end(), 0);
  std::iota(smallest_.begin(), smallest_.end(), 0);
}

int DisjointSets::find(int x) {
  int root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    const int next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return smallest_[root];
}

bool DisjointSets::unite(int a, int b) {
  auto root_of = [this](int x) {
    while (parent_[x] != x) x = parent_[x];
    return x;
  };
  find(a);
  find(b);
  int ra = root_of(a);
  int rb = root_of(b);
  if (ra == rb) return false;
  if (size_[ra] < size_[rb]) std::swap(ra, rb);
  parent_[rb] = ra;
  size_[ra] += size_[rb];
  smallest_[ra] = std::min(smallest_[ra], smallest_[rb]);
  return true;
}

}  // namespace gds
