#pragma once

#include "gds/common.hpp"
#include "gds/graph.hpp"

#include <map>
#include <vector>

namespace gds {

struct CutParams {
  double lambda = 1.0;          // smoothness weight on cut edges
  double mu = 0.5;              // previous-boundary coherence bonus
  double sigma_boundary = 0.08; // seed_resolution
  double seed_resolution = 0.08;

  static CutParams for_seed_resolution(double seed_resolution);
};

// One blob to be split among the objects whose segments landed in it.
struct CutProblem {
  WeightedGraph subgraph;          // node_ids are supervoxel ids
  std::vector<Vec3> centroids;     // aligned with subgraph local indices
  std::vector<Lab> colors;
  std::map<int, int> label_seeds;  // supervoxel id -> object id
  std::vector<Vec3> previous_cut_boundary;
  CutParams params;

  void validate() const;
};

// Scores labelings of a CutProblem. Labels are object ids per local node.
class CutEnergy {
 public:
  explicit CutEnergy(const CutProblem& problem);

  double unary(int node, int label) const;      // +inf if a seed forbids it
  double pairwise(std::size_t edge) const { return pair_cost_[edge]; }
  double operator()(const std::vector<int>& labels) const;

  const std::vector<int>& labels() const { return labels_; }

 private:
  const CutProblem& problem_;
  std::vector<int> labels_;                // distinct seed object ids
  std::vector<std::vector<double>> unary_; // [node][label slot]
  std::vector<double> pair_cost_;          // cost paid when the edge is cut
};

// Exact min-cut for two labels; alpha-expansion otherwise. Result maps every
// supervoxel of the blob to one of the seed object ids.
std::map<int, int> restricted_cut(const CutProblem& problem);

struct OversegConfig {
  double ncut_threshold = 0.2;  // T_o
  int min_segment_supervoxels = 4;
  double eigen_tolerance = 1e-8;
  int eigen_max_iterations = 5000;

  void validate() const;
};

struct Bisection {
  std::vector<int> side_a;  // node ids
  std::vector<int> side_b;
  double ncut_cost = 0.0;
};

// cut/assoc(A,V) + cut/assoc(B,V), where assoc(X,V) is the total weight of
// edges with at least one endpoint in X.
double ncut_value(const WeightedGraph& graph, const std::vector<char>& in_a);

// Second-smallest generalized eigenvector of (D - W) x = lambda D x by
// shifted inverse iteration deflated against the constant vector.
std::vector<double> fiedler_vector(const WeightedGraph& graph,
                                   const OversegConfig& config = {});

// Spectral bisection; thresholds the Fiedler vector at 32 evenly spaced
// levels and keeps the one with the lowest Ncut.
Bisection normalized_cut_bisect(const WeightedGraph& graph,
                                const OversegConfig& config = {});

// Recursive bisection while the best cut costs <= T_o and both halves keep
// min_segment_supervoxels nodes. Returns a partition of the node ids.
std::vector<std::vector<int>> oversegment(const WeightedGraph& graph,
                                          const OversegConfig& config);

// Subgraph of `graph` over the given local indices.
WeightedGraph subgraph_of(const WeightedGraph& graph, const std::vector<int>& local);

}  // namespace gds
