#include "gds/assignment.hpp"

#include "gds/rng.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace gds {

namespace {

constexpr int kAppearanceNeighbors = 3;
constexpr int kCloneRetries = 4;

// Blob order used internally by the GA. Sorting blobs by content makes the
// search trajectory independent of how the caller numbered them.
std::vector<int> canonical_blob_order(const AssignmentProblem& problem) {
  auto flat = [](const BlobFeature& b) {
    std::vector<double> v;
    v.reserve(b.centroids.size() * 6);
    for (const auto& c : b.centroids) v.insert(v.end(), {c.x(), c.y(), c.z()});
    for (const auto& c : b.colors) v.insert(v.end(), {c.L, c.a, c.b});
    return v;
  };
  std::vector<std::vector<double>> keys;
  for (const auto& b : problem.blobs) keys.push_back(flat(b));
  std::vector<int> order(problem.blobs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (keys[a].size() != keys[b].size()) return keys[a].size() < keys[b].size();
    return keys[a] < keys[b];
  });
  return order;
}

struct Individual {
  std::vector<int> genes;
  double energy = 0.0;
};

}  // namespace

EnergyWeights EnergyWeights::for_seed_resolution(double seed_resolution) {
  EnergyWeights w;
  w.displacement = 1.0 / seed_resolution;
  return w;
}

void AssignmentProblem::validate() const {
  for (const auto& b : blobs) {
    if (b.centroids.empty() || b.centroids.size() != b.colors.size()) {
      throw DataError("blob feature lists must be non-empty and aligned");
    }
  }
}

AssignmentEnergy::AssignmentEnergy(const AssignmentProblem& problem)
    : num_segments_(problem.num_segments()),
      num_blobs_(problem.num_blobs()),
      weights_(problem.weights) {
  problem.validate();
  unary_.resize(static_cast<std::size_t>(num_segments_) * num_blobs_);
  displacement_.resize(unary_.size());

  std::map<int, int> dense;
  for (const auto& s : problem.segments) {
    dense.try_emplace(s.component_id, static_cast<int>(dense.size()));
  }
  num_components_ = static_cast<int>(dense.size());
  for (const auto& s : problem.segments) component_of_.push_back(dense[s.component_id]);

  std::vector<std::pair<double, int>> by_distance;
  for (int s = 0; s < num_segments_; ++s) {
    const auto& seg = problem.segments[s];
    for (int b = 0; b < num_blobs_; ++b) {
      const auto& blob = problem.blobs[b];
      by_distance.clear();
      for (std::size_t k = 0; k < blob.centroids.size(); ++k) {
        by_distance.emplace_back((blob.centroids[k] - seg.centroid).norm(),
                                 static_cast<int>(k));
      }
      const std::size_t m =
          std::min<std::size_t>(kAppearanceNeighbors, by_distance.size());
      std::partial_sort(by_distance.begin(), by_distance.begin() + m,
                        by_distance.end());
      Lab mean;
      for (std::size_t k = 0; k < m; ++k) {
        const Lab& c = blob.colors[by_distance[k].second];
        mean.L += c.L;
        mean.a += c.a;
        mean.b += c.b;
      }
      mean.L /= m;
      mean.a /= m;
      mean.b /= m;
      const double appearance = delta_e(seg.mean_color_lab, mean);
      const double distance = by_distance.front().first;
      const std::size_t idx = static_cast<std::size_t>(s) * num_blobs_ + b;
      unary_[idx] = weights_.appearance * appearance +
                    weights_.displacement * distance;
      displacement_[idx] = blob.centroids[by_distance.front().second] - seg.centroid;
    }
  }
}

double AssignmentEnergy::unary(int segment, int label) const {
  if (label == kNoBlob) return weights_.unassigned_segment;
  return unary_[static_cast<std::size_t>(segment) * num_blobs_ + label];
}

double AssignmentEnergy::operator()(const std::vector<int>& labels) const {
  if (static_cast<int>(labels.size()) != num_segments_) {
    throw DataError("label vector length does not match segment count");
  }
  double energy = 0.0;
  std::vector<char> covered(num_blobs_, 0);
  for (int s = 0; s < num_segments_; ++s) {
    const int l = labels[s];
    if (l != kNoBlob && (l < 0 || l >= num_blobs_)) {
      throw DataError("invalid blob label " + std::to_string(l));
    }
    energy += unary(s, l);
    if (l != kNoBlob) covered[l] = 1;
  }
  const auto uncovered = std::count(covered.begin(), covered.end(), 0);
  energy += weights_.uncovered_blob * static_cast<double>(uncovered);

  if (weights_.motion_coherence != 0.0 && num_components_ > 0) {
    std::vector<Vec3> sum(num_components_, Vec3::Zero());
    std::vector<double> sq(num_components_, 0.0);
    std::vector<int> count(num_components_, 0);
    for (int s = 0; s < num_segments_; ++s) {
      if (labels[s] == kNoBlob) continue;
      const Vec3& d = displacement_[static_cast<std::size_t>(s) * num_blobs_ + labels[s]];
      const int c = component_of_[s];
      sum[c] += d;
      sq[c] += d.squaredNorm();
      ++count[c];
    }
    double variance = 0.0;
    for (int c = 0; c < num_components_; ++c) {
      if (count[c] < 2) continue;
      const double n = count[c];
      variance += std::max(0.0, sq[c] / n - (sum[c] / n).squaredNorm());
    }
    energy += weights_.motion_coherence * variance;
  }
  return energy;
}

double energy_of(const AssignmentProblem& problem, const std::vector<int>& labels) {
  return AssignmentEnergy(problem)(labels);
}

void GAConfig::validate() const {
  if (population < elitism + 2) throw ConfigError("ga.population must be >= ga.elitism + 2");
  if (elitism < 0) throw ConfigError("ga.elitism must be >= 0");
  if (generations < 0) throw ConfigError("ga.generations must be >= 0");
  if (tournament_size < 1) throw ConfigError("ga.tournament_size must be >= 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw ConfigError("ga.crossover_rate must lie in [0,1]");
  }
  if (mutation_rate > 1.0) throw ConfigError("ga.mutation_rate must lie in [0,1]");
  if (stagnation_stop < 1) throw ConfigError("ga.stagnation_stop must be >= 1");
}

GAResult solve_ga_traced(const AssignmentProblem& problem, const GAConfig& config) {
  config.validate();
  const int num_segments = problem.num_segments();
  const int num_blobs = problem.num_blobs();
  GAResult result;
  if (num_segments == 0) {
    result.best.energy = energy_of(problem, {});
    result.trace.push_back({0, result.best.energy, result.best.energy});
    return result;
  }

  // Work on a canonically ordered copy; map labels back at the end.
  const std::vector<int> order = canonical_blob_order(problem);
  AssignmentProblem canon = problem;
  for (int b = 0; b < num_blobs; ++b) canon.blobs[b] = problem.blobs[order[b]];
  const AssignmentEnergy energy(canon);

  const int alphabet = num_blobs + 1;  // last symbol is kNoBlob
  const double mutation =
      config.mutation_rate < 0.0 ? 1.0 / num_segments : config.mutation_rate;
  CounterRng rng(config.rng_seed);
  auto random_gene = [&] {
    const int v = static_cast<int>(rng.below(static_cast<std::uint32_t>(alphabet)));
    return v == num_blobs ? kNoBlob : v;
  };

  std::vector<Individual> population(config.population);
  {
    auto& greedy = population[0].genes;
    greedy.resize(num_segments);
    for (int s = 0; s < num_segments; ++s) {
      int best = kNoBlob;
      double best_cost = energy.unary(s, kNoBlob);
      for (int b = 0; b < num_blobs; ++b) {
        if (energy.unary(s, b) < best_cost) {
          best_cost = energy.unary(s, b);
          best = b;
        }
      }
      greedy[s] = best;
    }
  }
  for (int i = 1; i < config.population; ++i) {
    population[i].genes.resize(num_segments);
    for (auto& g : population[i].genes) g = random_gene();
  }
  for (auto& ind : population) ind.energy = energy(ind.genes);

  Individual best_ever;
  best_ever.energy = std::numeric_limits<double>::infinity();
  auto record = [&](int generation) {
    double sum = 0.0;
    const Individual* best = &population.front();
    for (const auto& ind : population) {
      sum += ind.energy;
      if (ind.energy < best->energy) best = &ind;
    }
    if (best->energy < best_ever.energy) best_ever = *best;
    result.trace.push_back({generation, best->energy, sum / population.size()});
  };
  record(0);

  auto tournament = [&]() -> const Individual& {
    int winner = static_cast<int>(rng.below(config.population));
    for (int k = 1; k < config.tournament_size; ++k) {
      const int c = static_cast<int>(rng.below(config.population));
      if (population[c].energy < population[winner].energy ||
          (population[c].energy == population[winner].energy && c < winner)) {
        winner = c;
      }
    }
    return population[winner];
  };

  int stagnant = 0;
  double last_best = best_ever.energy;
  for (int gen = 1; gen <= config.generations; ++gen) {
    std::vector<int> ranked(population.size());
    std::iota(ranked.begin(), ranked.end(), 0);
    std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
      return population[a].energy < population[b].energy;
    });

    std::vector<Individual> next;
    next.reserve(population.size());
    std::set<std::vector<int>> seen;
    for (int e = 0; e < config.elitism; ++e) {
      next.push_back(population[ranked[e]]);
      seen.insert(next.back().genes);
    }
    while (static_cast<int>(next.size()) < config.population) {
      const Individual& a = tournament();
      const Individual& b = tournament();
      Individual child;
      if (rng.uniform() < config.crossover_rate) {
        child.genes.resize(num_segments);
        for (int s = 0; s < num_segments; ++s) {
          child.genes[s] = (rng.next() & 1u) ? a.genes[s] : b.genes[s];
        }
      } else {
        child.genes = a.genes;
      }
      for (auto& g : child.genes) {
        if (rng.uniform() < mutation) g = random_gene();
      }
      // Clones of an existing member get extra mutations so the population
      // does not collapse onto a single genotype in small search spaces.
      for (int retry = 0; retry < kCloneRetries && seen.count(child.genes); ++retry) {
        child.genes[rng.below(static_cast<std::uint32_t>(num_segments))] = random_gene();
      }
      seen.insert(child.genes);
      next.push_back(std::move(child));
    }
    // Fitness evaluation is pure; order does not affect the stream.
    for (std::size_t i = config.elitism; i < next.size(); ++i) {
      next[i].energy = energy(next[i].genes);
    }
    population = std::move(next);
    record(gen);

    if (best_ever.energy < last_best) {
      last_best = best_ever.energy;
      stagnant = 0;
    } else if (++stagnant >= config.stagnation_stop) {
      break;
    }
  }

  result.best.labels.resize(num_segments);
  for (int s = 0; s < num_segments; ++s) {
    const int g = best_ever.genes[s];
    result.best.labels[s] = g == kNoBlob ? kNoBlob : order[g];
  }
  result.best.energy = energy_of(problem, result.best.labels);
  return result;
}

Assignment solve_ga(const AssignmentProblem& problem, const GAConfig& config) {
  return solve_ga_traced(problem, config).best;
}

double exhaustive_candidate_count(const AssignmentProblem& problem) {
  return std::pow(static_cast<double>(problem.num_blobs() + 1), problem.num_segments());
}

Assignment solve_exhaustive(const AssignmentProblem& problem) {
  constexpr double kLimit = 1e7;
  const int num_segments = problem.num_segments();
  const int num_blobs = problem.num_blobs();
  if (exhaustive_candidate_count(problem) > kLimit) {
    throw DataError("instance too large for exhaustive search: (" +
                    std::to_string(num_blobs) + "+1)^" +
                    std::to_string(num_segments) + " > 1e7");
  }
  const AssignmentEnergy energy(problem);

  // Odometer over {kNoBlob, 0, .., M_b-1}, first segment most significant,
  // so candidates are visited in lexicographic order.
  std::vector<int> labels(num_segments, kNoBlob);
  Assignment best{labels, energy(labels)};
  while (true) {
    int pos = num_segments - 1;
    while (pos >= 0 && labels[pos] == num_blobs - 1) {
      labels[pos] = kNoBlob;
      --pos;
    }
    if (pos < 0) break;
    ++labels[pos];
    const double e = energy(labels);
    if (e < best.energy) best = Assignment{labels, e};
  }
  return best;
}

}  // namespace gds
