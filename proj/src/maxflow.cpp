#include "gds/maxflow.hpp"

#include "gds/common.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace gds {

MaxFlow::MaxFlow(int num_nodes)
    : arcs_(num_nodes), level_(num_nodes), cursor_(num_nodes),
      source_side_(num_nodes, 0) {}

void MaxFlow::add_edge(int from, int to, double capacity, double reverse_capacity) {
  if (capacity < 0.0 || reverse_capacity < 0.0) {
    throw Error("negative capacity in flow network");
  }
  arcs_[from].push_back({to, static_cast<int>(arcs_[to].size()), capacity});
  arcs_[to].push_back({from, static_cast<int>(arcs_[from].size()) - 1,
                       reverse_capacity});
  epsilon_ = std::max(epsilon_, 1e-14 * std::max(capacity, reverse_capacity));
}

bool MaxFlow::build_levels(int source, int sink) {
  std::fill(level_.begin(), level_.end(), -1);
  std::queue<int> queue;
  level_[source] = 0;
  queue.push(source);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (const auto& a : arcs_[u]) {
      if (a.residual > epsilon_ && level_[a.to] < 0) {
        level_[a.to] = level_[u] + 1;
        queue.push(a.to);
      }
    }
  }
  return level_[sink] >= 0;
}

double MaxFlow::push(int node, int sink, double limit) {
  if (node == sink) return limit;
  for (auto& i = cursor_[node]; i < arcs_[node].size(); ++i) {
    Arc& a = arcs_[node][i];
    if (a.residual <= epsilon_ || level_[a.to] != level_[node] + 1) continue;
    const double pushed = push(a.to, sink, std::min(limit, a.residual));
    if (pushed > 0.0) {
      a.residual -= pushed;
      arcs_[a.to][a.rev].residual += pushed;
      return pushed;
    }
  }
  return 0.0;
}

double MaxFlow::solve(int source, int sink) {
  double flow = 0.0;
  while (build_levels(source, sink)) {
    std::fill(cursor_.begin(), cursor_.end(), 0);
    while (true) {
      const double pushed =
          push(source, sink, std::numeric_limits<double>::infinity());
      if (pushed <= 0.0) break;
      flow += pushed;
    }
  }
  // Residual reachability gives the source side of a minimum cut.
  std::fill(source_side_.begin(), source_side_.end(), 0);
  std::queue<int> queue;
  source_side_[source] = 1;
  queue.push(source);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (const auto& a : arcs_[u]) {
      if (a.residual > epsilon_ && !source_side_[a.to]) {
        source_side_[a.to] = 1;
        queue.push(a.to);
      }
    }
  }
  return flow;
}

BinaryEnergy::BinaryEnergy(int num_vars) : n_(num_vars), cost1_(num_vars, 0.0) {}

void BinaryEnergy::add_unary(int i, double e0, double e1) {
  constant_ += e0;
  cost1_[i] += e1 - e0;
}

void BinaryEnergy::add_pairwise(int i, int j, double e00, double e01, double e10,
                                double e11) {
  // E = e00 + (e10-e00) x_i + (e11-e10) x_j + (e01+e10-e00-e11)(1-x_i) x_j
  const double w = e01 + e10 - e00 - e11;
  if (w < -1e-12 * (std::abs(e01) + std::abs(e10) + std::abs(e00) + std::abs(e11))) {
    throw Error("non-submodular pairwise term");
  }
  constant_ += e00;
  cost1_[i] += e10 - e00;
  cost1_[j] += e11 - e10;
  if (w > 0.0) pairs_.push_back({i, j, w});
}

double BinaryEnergy::minimize(std::vector<int>& labels) const {
  const int source = n_;
  const int sink = n_ + 1;
  MaxFlow flow(n_ + 2);
  double constant = constant_;
  for (int i = 0; i < n_; ++i) {
    // x_i = 1 puts i on the sink side and cuts source->i.
    if (cost1_[i] > 0.0) {
      flow.add_edge(source, i, cost1_[i]);
    } else if (cost1_[i] < 0.0) {
      constant += cost1_[i];
      flow.add_edge(i, sink, -cost1_[i]);
    }
  }
  // (1 - x_i) x_j: i on the source side, j on the sink side cuts i->j.
  for (const auto& p : pairs_) flow.add_edge(p.i, p.j, p.w);
  const double cut = flow.solve(source, sink);
  labels.assign(n_, 0);
  for (int i = 0; i < n_; ++i) labels[i] = flow.on_source_side(i) ? 0 : 1;
  return constant + cut;
}

}  // namespace gds
