#pragma once

// Brute-force reference implementations and random instance generators used
// only by tests. Nothing here shares code paths with the library solvers.

#include "gds/assignment.hpp"
#include "gds/graph.hpp"
#include "gds/graphcut.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace gds::testing {

// Boolean transitive closure (Floyd-Warshall), then groups by reachability.
inline std::vector<std::set<int>> closure_components(int n,
                                                     const std::vector<WeightedEdge>& edges) {
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) reach[i][i] = 1;
  for (const auto& e : edges) reach[e.u][e.v] = reach[e.v][e.u] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (reach[i][k])
        for (int j = 0; j < n; ++j)
          if (reach[k][j]) reach[i][j] = 1;
  std::vector<std::set<int>> out;
  std::vector<char> seen(n, 0);
  for (int i = 0; i < n; ++i) {
    if (seen[i]) continue;
    std::set<int> group;
    for (int j = 0; j < n; ++j) {
      if (reach[i][j]) {
        group.insert(j);
        seen[j] = 1;
      }
    }
    out.push_back(group);
  }
  return out;
}

inline std::vector<WeightedEdge> random_edges(std::mt19937_64& rng, int n, double p,
                                              double wmin = 0.01, double wmax = 1.0) {
  std::bernoulli_distribution coin(p);
  std::uniform_real_distribution<double> weight(wmin, wmax);
  std::vector<WeightedEdge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) edges.push_back({i, j, weight(rng)});
  return edges;
}

// Random spanning tree plus extra random edges.
inline WeightedGraph random_connected_graph(std::mt19937_64& rng, int n, double p) {
  std::uniform_real_distribution<double> weight(0.01, 1.0);
  std::set<std::pair<int, int>> present;
  std::vector<WeightedEdge> edges;
  for (int i = 1; i < n; ++i) {
    const int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
    edges.push_back({j, i, weight(rng)});
    present.emplace(j, i);
  }
  std::bernoulli_distribution coin(p);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!present.count({i, j}) && coin(rng)) edges.push_back({i, j, weight(rng)});
  return WeightedGraph::from_edges(n, edges);
}

// Direct Ncut evaluation from the definition: assoc(X,V) = total weight of
// edges with an endpoint in X.
inline double ncut_direct(const WeightedGraph& g, std::uint64_t mask_a) {
  double cut = 0, assoc_a = 0, assoc_b = 0;
  for (const auto& e : g.edges) {
    const bool a = (mask_a >> e.u) & 1u;
    const bool b = (mask_a >> e.v) & 1u;
    if (a != b) cut += e.weight;
    if (a || b) assoc_a += e.weight;
    if (!a || !b) assoc_b += e.weight;
  }
  return cut / assoc_a + cut / assoc_b;
}

// Minimum over all 2^(n-1)-1 bipartitions (node n-1 fixed in B).
inline double brute_force_min_ncut(const WeightedGraph& g) {
  const int n = g.num_nodes();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    best = std::min(best, ncut_direct(g, mask));
  }
  return best;
}

// Energy of a labeling evaluated straight from the restricted-cut formula.
inline double cut_energy_direct(const CutProblem& p, const std::vector<int>& labels) {
  const auto& g = p.subgraph;
  const int n = g.num_nodes();
  std::map<int, int> local;
  for (int i = 0; i < n; ++i) local[g.node_ids[i]] = i;
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    auto seed = p.label_seeds.find(g.node_ids[i]);
    if (seed != p.label_seeds.end()) {
      if (seed->second != labels[i]) return std::numeric_limits<double>::infinity();
      continue;
    }
    double u = std::numeric_limits<double>::infinity();
    for (const auto& [sv, obj] : p.label_seeds) {
      if (obj != labels[i]) continue;
      const int s = local[sv];
      u = std::min(u, (p.centroids[i] - p.centroids[s]).norm() / p.params.seed_resolution +
                          delta_e(p.colors[i], p.colors[s]) / 100.0);
    }
    e += u;
  }
  for (const auto& edge : g.edges) {
    if (labels[edge.u] == labels[edge.v]) continue;
    double c = p.params.lambda * edge.weight;
    if (!p.previous_cut_boundary.empty()) {
      const Vec3 mid = 0.5 * (p.centroids[edge.u] + p.centroids[edge.v]);
      double d = std::numeric_limits<double>::infinity();
      for (const auto& b : p.previous_cut_boundary) d = std::min(d, (b - mid).norm());
      c += p.params.mu * std::exp(-d / p.params.sigma_boundary);
    }
    e += c;
  }
  return e;
}

// Minimum over all seed-consistent labelings (labels drawn from seed ids).
inline double brute_force_cut(const CutProblem& p) {
  std::set<int> label_set;
  for (const auto& [sv, obj] : p.label_seeds) label_set.insert(obj);
  const std::vector<int> labels(label_set.begin(), label_set.end());
  const int n = p.subgraph.num_nodes();
  const int k = static_cast<int>(labels.size());
  std::vector<int> free_nodes;
  std::vector<int> assignment(n, labels[0]);
  for (int i = 0; i < n; ++i) {
    auto seed = p.label_seeds.find(p.subgraph.node_ids[i]);
    if (seed != p.label_seeds.end()) assignment[i] = seed->second;
    else free_nodes.push_back(i);
  }
  double best = std::numeric_limits<double>::infinity();
  std::uint64_t total = 1;
  for (std::size_t f = 0; f < free_nodes.size(); ++f) total *= k;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (int i : free_nodes) {
      assignment[i] = labels[c % k];
      c /= k;
    }
    best = std::min(best, cut_energy_direct(p, assignment));
  }
  return best;
}

inline CutProblem random_cut_problem(std::mt19937_64& rng, int n, int num_labels,
                                     bool with_boundary) {
  CutProblem p;
  p.subgraph = random_connected_graph(rng, n, 0.3);
  std::uniform_real_distribution<double> pos(0.0, 0.3);
  std::uniform_real_distribution<double> col(-40.0, 40.0);
  for (int i = 0; i < n; ++i) {
    p.centroids.emplace_back(pos(rng), pos(rng), pos(rng));
    p.colors.push_back(Lab{50.0 + col(rng) / 2, col(rng), col(rng)});
  }
  std::vector<int> nodes(n);
  for (int i = 0; i < n; ++i) nodes[i] = i;
  std::shuffle(nodes.begin(), nodes.end(), rng);
  for (int l = 0; l < num_labels; ++l) p.label_seeds[nodes[l]] = 10 + 7 * l;
  if (with_boundary) {
    for (int b = 0; b < 3; ++b) p.previous_cut_boundary.emplace_back(pos(rng), pos(rng), pos(rng));
  }
  return p;
}

// Random assignment instance with M_s segments over `components`
// components and M_b blobs of 1-5 supervoxels each.
inline AssignmentProblem random_assignment_problem(std::mt19937_64& rng, int num_segments,
                                                   int num_blobs) {
  std::uniform_real_distribution<double> pos(0.0, 0.4);
  std::uniform_real_distribution<double> col(-30.0, 30.0);
  std::uniform_int_distribution<int> size(1, 5);
  AssignmentProblem p;
  for (int b = 0; b < num_blobs; ++b) {
    BlobFeature blob;
    const Vec3 center(pos(rng), pos(rng), pos(rng));
    const Lab tint{50.0 + col(rng) / 3, col(rng), col(rng)};
    const int m = size(rng);
    for (int k = 0; k < m; ++k) {
      blob.centroids.push_back(center + Vec3(pos(rng), pos(rng), pos(rng)) * 0.2);
      blob.colors.push_back(Lab{tint.L + col(rng) / 6, tint.a + col(rng) / 6, tint.b + col(rng) / 6});
    }
    p.blobs.push_back(blob);
  }
  std::uniform_int_distribution<int> comp(0, 1);
  for (int s = 0; s < num_segments; ++s) {
    SegmentFeature f;
    f.centroid = Vec3(pos(rng), pos(rng), pos(rng));
    f.mean_color_lab = Lab{50.0 + col(rng) / 3, col(rng), col(rng)};
    f.component_id = comp(rng);
    f.object_id = f.component_id;
    p.segments.push_back(f);
  }
  return p;
}

// Largest total weight of a one-to-one row/column matching, by exhaustive
// search over every injective partial assignment.
inline double brute_force_matching(const std::vector<std::vector<double>>& w) {
  const std::size_t rows = w.size();
  const std::size_t cols = rows == 0 ? 0 : w[0].size();
  std::vector<char> used(cols, 0);
  double best = 0.0;
  auto go = [&](auto&& self, std::size_t r, double acc) -> void {
    if (r == rows) {
      best = std::max(best, acc);
      return;
    }
    self(self, r + 1, acc);
    for (std::size_t c = 0; c < cols; ++c) {
      if (used[c]) continue;
      used[c] = 1;
      self(self, r + 1, acc + w[r][c]);
      used[c] = 0;
    }
  };
  go(go, 0, 0.0);
  return best;
}

// Mislabeled fraction under the best renaming of output labels, by counting
// overlaps in a map and matching exhaustively.
inline double brute_force_segmentation_error(const std::vector<int>& out,
                                             const std::vector<int>& truth) {
  if (truth.empty()) return 0.0;
  std::map<int, std::size_t> ro, ct;
  std::map<std::pair<int, int>, double> overlap;
  for (std::size_t i = 0; i < out.size(); ++i) {
    ro.emplace(out[i], ro.size());
    ct.emplace(truth[i], ct.size());
    overlap[{out[i], truth[i]}] += 1.0;
  }
  std::vector<std::vector<double>> w(ro.size(), std::vector<double>(ct.size(), 0.0));
  for (const auto& [key, n] : overlap) w[ro.at(key.first)][ct.at(key.second)] = n;
  return 1.0 - brute_force_matching(w) / static_cast<double>(truth.size());
}

}  // namespace gds::testing
