#include "gds/graphcut.hpp"

#include "gds/maxflow.hpp"
#include "gds/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>

namespace gds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kThresholdCandidates = 32;

class EigenSolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace

CutParams CutParams::for_seed_resolution(double seed_resolution) {
  CutParams p;
  p.sigma_boundary = seed_resolution;
  p.seed_resolution = seed_resolution;
  return p;
}

void CutProblem::validate() const {
  const auto n = static_cast<std::size_t>(subgraph.num_nodes());
  if (centroids.size() != n || colors.size() != n) {
    throw DataError("cut problem features must align with the subgraph");
  }
  std::set<int> distinct;
  for (const auto& [sv, object] : label_seeds) {
    if (std::find(subgraph.node_ids.begin(), subgraph.node_ids.end(), sv) ==
        subgraph.node_ids.end()) {
      throw DataError("seed supervoxel " + std::to_string(sv) + " not in blob");
    }
    distinct.insert(object);
  }
  if (distinct.size() < 2) {
    throw DataError("restricted cut needs at least two distinct seed labels");
  }
}

CutEnergy::CutEnergy(const CutProblem& problem) : problem_(problem) {
  problem.validate();
  for (const auto& [sv, object] : problem.label_seeds) labels_.push_back(object);
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());

  const auto& g = problem.subgraph;
  const int n = g.num_nodes();
  const auto& p = problem.params;

  std::map<int, int> local;
  for (int i = 0; i < n; ++i) local.emplace(g.node_ids[i], i);
  std::vector<int> seed_label(n, -1);  // label slot or -1
  for (const auto& [sv, object] : problem.label_seeds) {
    seed_label[local.at(sv)] = static_cast<int>(
        std::lower_bound(labels_.begin(), labels_.end(), object) - labels_.begin());
  }

  const int k = static_cast<int>(labels_.size());
  unary_.assign(n, std::vector<double>(k, kInf));
  for (int i = 0; i < n; ++i) {
    if (seed_label[i] >= 0) {
      unary_[i][seed_label[i]] = 0.0;
      continue;
    }
    for (int s = 0; s < n; ++s) {
      if (seed_label[s] < 0) continue;
      const double cost =
          (problem.centroids[i] - problem.centroids[s]).norm() / p.seed_resolution +
          delta_e(problem.colors[i], problem.colors[s]) / kLabScale;
      auto& slot = unary_[i][seed_label[s]];
      slot = std::min(slot, cost);
    }
  }

  pair_cost_.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    double cost = p.lambda * e.weight;
    if (p.mu != 0.0 && !problem.previous_cut_boundary.empty()) {
      const Vec3 mid = 0.5 * (problem.centroids[e.u] + problem.centroids[e.v]);
      double nearest = kInf;
      for (const auto& b : problem.previous_cut_boundary) {
        nearest = std::min(nearest, (b - mid).norm());
      }
      cost += p.mu * std::exp(-nearest / p.sigma_boundary);
    }
    pair_cost_.push_back(cost);
  }
}

double CutEnergy::unary(int node, int label) const {
  const auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return kInf;
  return unary_[node][it - labels_.begin()];
}

double CutEnergy::operator()(const std::vector<int>& labels) const {
  const auto& g = problem_.subgraph;
  double energy = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) energy += unary(i, labels[i]);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (labels[g.edges[e].u] != labels[g.edges[e].v]) energy += pair_cost_[e];
  }
  return energy;
}

std::map<int, int> restricted_cut(const CutProblem& problem) {
  const CutEnergy energy(problem);
  const auto& g = problem.subgraph;
  const int n = g.num_nodes();
  const auto& labels = energy.labels();

  // Stand-in for +inf unaries: exceeds any finite labeling's energy.
  double big = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int l : labels) {
      const double u = energy.unary(i, l);
      if (std::isfinite(u)) big += u;
    }
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) big += energy.pairwise(e);
  auto capped = [big](double u) { return std::isfinite(u) ? u : big; };

  std::vector<int> current(n);
  if (labels.size() == 2) {
    BinaryEnergy binary(n);
    for (int i = 0; i < n; ++i) {
      binary.add_unary(i, capped(energy.unary(i, labels[0])),
                       capped(energy.unary(i, labels[1])));
    }
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const double c = energy.pairwise(e);
      binary.add_pairwise(g.edges[e].u, g.edges[e].v, 0.0, c, c, 0.0);
    }
    std::vector<int> x;
    binary.minimize(x);
    for (int i = 0; i < n; ++i) current[i] = labels[x[i]];
  } else {
    for (int i = 0; i < n; ++i) {
      current[i] = labels[0];
      for (int l : labels) {
        if (energy.unary(i, l) < energy.unary(i, current[i])) current[i] = l;
      }
    }
    double current_energy = energy(current);
    bool improved = true;
    while (improved) {
      improved = false;
      for (int alpha : labels) {
        BinaryEnergy move(n);
        for (int i = 0; i < n; ++i) {
          move.add_unary(i, capped(energy.unary(i, current[i])),
                         capped(energy.unary(i, alpha)));
        }
        for (std::size_t e = 0; e < g.edges.size(); ++e) {
          const int li = current[g.edges[e].u];
          const int lj = current[g.edges[e].v];
          const double c = energy.pairwise(e);
          move.add_pairwise(g.edges[e].u, g.edges[e].v, li != lj ? c : 0.0,
                            li != alpha ? c : 0.0, alpha != lj ? c : 0.0, 0.0);
        }
        std::vector<int> x;
        move.minimize(x);
        std::vector<int> candidate = current;
        for (int i = 0; i < n; ++i) {
          if (x[i] == 1) candidate[i] = alpha;
        }
        const double e = energy(candidate);
        if (e < current_energy - 1e-12 * std::max(1.0, std::abs(current_energy))) {
          current = std::move(candidate);
          current_energy = e;
          improved = true;
        }
      }
    }
  }

  std::map<int, int> out;
  for (int i = 0; i < n; ++i) out.emplace(g.node_ids[i], current[i]);
  return out;
}

void OversegConfig::validate() const {
  if (!(ncut_threshold >= 0.0)) throw ConfigError("overseg.ncut_threshold must be >= 0");
  if (min_segment_supervoxels < 1) {
    throw ConfigError("overseg.min_segment_supervoxels must be >= 1");
  }
  if (!(eigen_tolerance > 0.0)) throw ConfigError("overseg.eigen_tolerance must be > 0");
  if (eigen_max_iterations < 1) {
    throw ConfigError("overseg.eigen_max_iterations must be >= 1");
  }
}

double ncut_value(const WeightedGraph& graph, const std::vector<char>& in_a) {
  // assoc(X, V) sums every edge touching X once: internal(X) + cut.
  double cut = 0.0;
  double internal_a = 0.0;
  double internal_b = 0.0;
  for (const auto& e : graph.edges) {
    const bool a_u = in_a[e.u] != 0;
    const bool a_v = in_a[e.v] != 0;
    if (a_u != a_v) {
      cut += e.weight;
    } else {
      (a_u ? internal_a : internal_b) += e.weight;
    }
  }
  const double assoc_a = internal_a + cut;
  const double assoc_b = internal_b + cut;
  if (assoc_a <= 0.0 || assoc_b <= 0.0) return kInf;
  return cut / assoc_a + cut / assoc_b;
}

std::vector<double> fiedler_vector(const WeightedGraph& graph,
                                   const OversegConfig& config) {
  const int n = graph.num_nodes();
  if (n < 2 || graph.edges.empty()) {
    throw DataError("bisection needs at least two nodes and one edge");
  }
  if (!graph.is_connected()) {
    throw DataError("bisection needs a connected graph; split components first");
  }

  Eigen::MatrixXd lsym = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (const auto& e : graph.edges) {
    degree[e.u] += e.weight;
    degree[e.v] += e.weight;
  }
  const Eigen::VectorXd inv_sqrt = degree.cwiseSqrt().cwiseInverse();
  for (const auto& e : graph.edges) {
    const double v = -e.weight * inv_sqrt[e.u] * inv_sqrt[e.v];
    lsym(e.u, e.v) = v;
    lsym(e.v, e.u) = v;
  }
  for (int i = 0; i < n; ++i) lsym(i, i) = 1.0;

  // Normalized Laplacian spectrum lies in [0, 2]; a small positive shift
  // keeps the factorization regular while targeting the bottom of it.
  constexpr double kShift = 1e-6;
  const Eigen::LDLT<Eigen::MatrixXd> solver(
      lsym + kShift * Eigen::MatrixXd::Identity(n, n));

  Eigen::VectorXd trivial = degree.cwiseSqrt();
  trivial.normalize();
  auto deflate = [&](Eigen::VectorXd& y) {
    y -= y.dot(trivial) * trivial;
    y -= y.dot(trivial) * trivial;
  };

  CounterRng rng(0x6E637574ull);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.uniform() - 0.5;
  deflate(y);
  y.normalize();

  bool converged = false;
  for (int it = 0; it < config.eigen_max_iterations; ++it) {
    Eigen::VectorXd next = solver.solve(y);
    deflate(next);
    const double norm = next.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    next /= norm;
    if (next.dot(y) < 0.0) next = -next;
    const double change = (next - y).norm();
    y = std::move(next);
    if (change < config.eigen_tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw EigenSolverError("inverse iteration did not converge within " +
                           std::to_string(config.eigen_max_iterations) +
                           " iterations");
  }

  // Fix the sign so the output does not depend on the start vector.
  int pivot = 0;
  for (int i = 1; i < n; ++i) {
    if (std::abs(y[i]) > std::abs(y[pivot]) + 1e-12) pivot = i;
  }
  if (y[pivot] < 0.0) y = -y;

  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = y[i] * inv_sqrt[i];
  return x;
}

Bisection normalized_cut_bisect(const WeightedGraph& graph,
                                const OversegConfig& config) {
  const std::vector<double> x = fiedler_vector(graph, config);
  const int n = graph.num_nodes();
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw Error("degenerate Fiedler vector");

  std::vector<char> best_side;
  double best_cost = kInf;
  std::vector<char> side(n);
  for (int k = 0; k < kThresholdCandidates; ++k) {
    const double t = lo + (hi - lo) * (k + 0.5) / kThresholdCandidates;
    for (int i = 0; i < n; ++i) side[i] = x[i] <= t ? 1 : 0;
    const double cost = ncut_value(graph, side);
    if (cost < best_cost) {
      best_cost = cost;
      best_side = side;
    }
  }

  Bisection out;
  out.ncut_cost = best_cost;
  for (int i = 0; i < n; ++i) {
    (best_side[i] ? out.side_a : out.side_b).push_back(graph.node_ids[i]);
  }
  return out;
}

WeightedGraph subgraph_of(const WeightedGraph& graph, const std::vector<int>& local) {
  std::vector<int> position(graph.num_nodes(), -1);
  WeightedGraph sub;
  for (std::size_t k = 0; k < local.size(); ++k) {
    position[local[k]] = static_cast<int>(k);
    sub.node_ids.push_back(graph.node_ids[local[k]]);
  }
  for (const auto& e : graph.edges) {
    const int u = position[e.u];
    const int v = position[e.v];
    if (u >= 0 && v >= 0) sub.edges.push_back({std::min(u, v), std::max(u, v), e.weight});
  }
  std::sort(sub.edges.begin(), sub.edges.end(), [](const auto& a, const auto& b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  });
  return sub;
}

std::vector<std::vector<int>> oversegment(const WeightedGraph& graph,
                                          const OversegConfig& config) {
  config.validate();
  const int n = graph.num_nodes();
  std::vector<std::vector<int>> segments;
  if (n == 0) return segments;

  std::map<int, int> local_of;
  for (int i = 0; i < n; ++i) local_of.emplace(graph.node_ids[i], i);

  std::vector<std::vector<int>> pending;
  pending.emplace_back(n);
  std::iota(pending.back().begin(), pending.back().end(), 0);

  const auto min_size = static_cast<std::size_t>(config.min_segment_supervoxels);
  while (!pending.empty()) {
    std::vector<int> part = std::move(pending.back());
    pending.pop_back();
    if (part.size() < 2 * min_size || part.size() < 2) {
      segments.push_back(std::move(part));
      continue;
    }
    const WeightedGraph sub = subgraph_of(graph, part);
    if (!sub.is_connected()) {
      // Halves of an accepted bisection may fall apart; each piece is its
      // own candidate.
      for (const auto& piece : connected_components(sub)) {
        std::vector<int> locals;
        for (int id : piece.member_supervoxels) locals.push_back(local_of.at(id));
        pending.push_back(std::move(locals));
      }
      continue;
    }
    Bisection cut;
    try {
      cut = normalized_cut_bisect(sub, config);
    } catch (const EigenSolverError&) {
      segments.push_back(std::move(part));
      continue;
    }
    if (cut.ncut_cost <= config.ncut_threshold && cut.side_a.size() >= min_size &&
        cut.side_b.size() >= min_size) {
      for (const auto* side : {&cut.side_b, &cut.side_a}) {
        std::vector<int> locals;
        for (int id : *side) locals.push_back(local_of.at(id));
        pending.push_back(std::move(locals));
      }
    } else {
      segments.push_back(std::move(part));
    }
  }

  std::vector<std::vector<int>> out;
  for (auto& seg : segments) {
    std::vector<int> ids;
    for (int i : seg) ids.push_back(graph.node_ids[i]);
    std::sort(ids.begin(), ids.end());
    out.push_back(std::move(ids));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

}  // namespace gds
