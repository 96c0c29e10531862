#pragma once

#include <vector>

namespace gds {

// Dinic's algorithm on a dense-index residual network. Capacities are
// non-negative doubles.
class MaxFlow {
 public:
  explicit MaxFlow(int num_nodes);

  void add_edge(int from, int to, double capacity, double reverse_capacity = 0.0);
  double solve(int source, int sink);

  // After solve(): true if `node` is reachable from the source in the
  // residual network, i.e. lies on the source side of a minimum cut.
  bool on_source_side(int node) const { return source_side_[node] != 0; }

 private:
  struct Arc {
    int to;
    int rev;
    double residual;
  };

  bool build_levels(int source, int sink);
  double push(int node, int sink, double limit);

  std::vector<std::vector<Arc>> arcs_;
  std::vector<int> level_;
  std::vector<std::size_t> cursor_;
  std::vector<char> source_side_;
  double epsilon_ = 0.0;
};

// Pseudo-boolean energy with unary and submodular pairwise terms, minimized
// exactly by one minimum cut. x = 0 is the source side.
class BinaryEnergy {
 public:
  explicit BinaryEnergy(int num_vars);

  void add_unary(int i, double e0, double e1);
  // Requires e01 + e10 >= e00 + e11.
  void add_pairwise(int i, int j, double e00, double e01, double e10, double e11);

  // Returns the minimum energy; fills `labels` with the minimizer.
  double minimize(std::vector<int>& labels) const;

 private:
  int n_;
  double constant_ = 0.0;
  std::vector<double> cost1_;  // net cost of x_i = 1 over x_i = 0
  struct Pair {
    int i;
    int j;
    double w;
  };
  std::vector<Pair> pairs_;
};

}  // namespace gds
