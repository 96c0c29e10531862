#include "doctest.h"

#include "gds/assignment.hpp"
#include "oracles.hpp"

#include <random>

using namespace gds;

namespace {

BlobFeature single_sv_blob(const Vec3& c, const Lab& lab) {
  return BlobFeature{{c}, {lab}};
}

// Two segments of one component, two one-supervoxel blobs. Energies below
// were evaluated by hand from the energy definition with default weights
// (alpha 0.01, beta 12.5, gamma 2, delta 1, rho 1.5).
AssignmentProblem hand_problem() {
  AssignmentProblem p;
  p.segments = {
      {Vec3(0.0, 0.0, 0.0), Lab{50, 0, 0}, 0, 0},
      {Vec3(0.1, 0.0, 0.0), Lab{50, 10, 0}, 0, 0},
  };
  p.blobs = {
      single_sv_blob(Vec3(0.02, 0.0, 0.0), Lab{50, 0, 0}),
      single_sv_blob(Vec3(0.1, 0.04, 0.0), Lab{50, 10, 0}),
  };
  return p;
}

}  // namespace

TEST_CASE("energy with no segments charges every uncovered blob") {
  AssignmentProblem p;
  p.blobs = {single_sv_blob({0, 0, 0}, {}), single_sv_blob({1, 0, 0}, {}),
             single_sv_blob({2, 0, 0}, {})};
  CHECK(energy_of(p, {}) == doctest::Approx(3 * 2.0));
  const auto a = solve_ga(p, {});
  CHECK(a.labels.empty());
  CHECK(a.energy == doctest::Approx(6.0));
}

TEST_CASE("energy vanishes for a segment sitting on an identical blob") {
  AssignmentProblem p;
  p.segments = {{Vec3(0.3, 0.1, 0.2), Lab{40, 5, -5}, 0, 0}};
  p.blobs = {single_sv_blob(Vec3(0.3, 0.1, 0.2), Lab{40, 5, -5})};
  CHECK(energy_of(p, {0}) == 0.0);
  const auto a = solve_ga(p, {});
  CHECK(a.labels == std::vector<int>{0});
  CHECK(a.energy == 0.0);
}

TEST_CASE("energy matches hand evaluation on a 2x2 instance") {
  const auto p = hand_problem();
  // s0->b0: D=0.02 -> 0.25; s1->b1: D=0.04 -> 0.5; displacements
  // (0.02,0,0), (0,0.04,0) have population variance 0.0005.
  CHECK(energy_of(p, {0, 1}) == doctest::Approx(0.7505).epsilon(1e-12));
  // s1->b0: A=10 -> 0.1, D=0.08 -> 1.0; blob 1 uncovered -> 2; variance of
  // (0.02,0,0), (-0.08,0,0) is 0.0025.
  CHECK(energy_of(p, {0, 0}) == doctest::Approx(3.3525).epsilon(1e-12));
  // rho + 0.5 + one uncovered blob.
  CHECK(energy_of(p, {kNoBlob, 1}) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(energy_of(p, {0, 2}), DataError);
  CHECK_THROWS_AS(energy_of(p, {0}), DataError);

  const auto best = solve_exhaustive(p);
  CHECK(best.labels == std::vector<int>{0, 1});
}

TEST_CASE("appearance uses the three nearest supervoxels of the blob") {
  AssignmentProblem p;
  p.weights.displacement = 0.0;
  p.weights.uncovered_blob = 0.0;
  p.weights.motion_coherence = 0.0;
  p.segments = {{Vec3(0, 0, 0), Lab{50, 0, 0}, 0, 0}};
  BlobFeature blob;
  blob.centroids = {Vec3(0.01, 0, 0), Vec3(0.02, 0, 0), Vec3(0.03, 0, 0), Vec3(0.5, 0, 0)};
  blob.colors = {Lab{50, 3, 0}, Lab{50, 6, 0}, Lab{50, 9, 0}, Lab{50, 90, 0}};
  p.blobs = {blob};
  // mean a* of the 3 nearest = 6 -> dE 6 -> 0.06
  CHECK(energy_of(p, {0}) == doctest::Approx(0.06).epsilon(1e-12));
}

TEST_CASE("exhaustive search sizes and limits") {
  std::mt19937_64 rng(1);
  const auto small = testing::random_assignment_problem(rng, 1, 2);
  CHECK(exhaustive_candidate_count(small) == 3.0);
  const auto best = solve_exhaustive(small);
  double manual = energy_of(small, {kNoBlob});
  for (int b = 0; b < 2; ++b) manual = std::min(manual, energy_of(small, {b}));
  CHECK(best.energy == manual);

  const auto six = testing::random_assignment_problem(rng, 6, 3);
  CHECK(exhaustive_candidate_count(six) == 4096.0);
  CHECK(solve_exhaustive(six).labels.size() == 6);

  const auto huge = testing::random_assignment_problem(rng, 20, 9);
  try {
    solve_exhaustive(huge);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("instance too large") != std::string::npos);
  }
}

TEST_CASE("exhaustive ties resolve to the lexicographically smallest labels") {
  AssignmentProblem p;
  p.weights = EnergyWeights{0, 0, 0, 0, 0};
  p.segments = {{Vec3(0, 0, 0), Lab{}, 0, 0}, {Vec3(0, 0, 0), Lab{}, 0, 0}};
  p.blobs = {single_sv_blob({0, 0, 0}, {})};
  const auto a = solve_exhaustive(p);
  CHECK(a.labels == std::vector<int>{kNoBlob, kNoBlob});
}

TEST_CASE("GA reaches the exhaustive optimum on a seeded 5x3 instance") {
  std::mt19937_64 rng(42);
  const auto p = testing::random_assignment_problem(rng, 5, 3);
  CHECK(exhaustive_candidate_count(p) == 1024.0);
  const auto oracle = solve_exhaustive(p);
  GAConfig cfg;
  cfg.rng_seed = 42;
  const auto ga = solve_ga(p, cfg);
  CHECK(ga.energy == doctest::Approx(oracle.energy).epsilon(1e-12));
  CHECK(ga.energy == energy_of(p, ga.labels));

  for (std::uint64_t seed : {7ull, 123456789ull}) {
    cfg.rng_seed = seed;
    const auto other = solve_ga(p, cfg);
    CHECK(other.energy <= oracle.energy * 1.05 + 1e-12);
  }
}

TEST_CASE("GA is deterministic per seed and never loses its initial best") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = testing::random_assignment_problem(rng, 2 + trial % 5, 1 + trial % 3);
    GAConfig cfg;
    cfg.rng_seed = 1000 + trial;
    const auto a = solve_ga_traced(p, cfg);
    const auto b = solve_ga_traced(p, cfg);
    CHECK(a.best.labels == b.best.labels);
    CHECK(a.best.energy == b.best.energy);
    REQUIRE(!a.trace.empty());
    CHECK(a.best.energy <= a.trace.front().best_energy + 1e-12);
    for (std::size_t g = 1; g < a.trace.size(); ++g) {
      CHECK(a.trace[g].best_energy <= a.trace[g - 1].best_energy);
    }
  }
}

TEST_CASE("energy is non-negative and finite on random label vectors") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int ms = 1 + trial % 6;
    const int mb = 1 + trial % 4;
    const auto p = testing::random_assignment_problem(rng, ms, mb);
    std::uniform_int_distribution<int> label(-1, mb - 1);
    for (int k = 0; k < 20; ++k) {
      std::vector<int> v(ms);
      for (auto& x : v) x = label(rng);
      const double e = energy_of(p, v);
      CHECK(std::isfinite(e));
      CHECK(e >= 0.0);
    }
  }
}

TEST_CASE("GA matches the oracle on random small instances") {
  std::mt19937_64 rng(77);
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int ms = 1 + trial % 6;
    const int mb = 1 + (trial / 6) % 3;
    const auto p = testing::random_assignment_problem(rng, ms, mb);
    GAConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(trial);
    const double ga = solve_ga(p, cfg).energy;
    const double opt = solve_exhaustive(p).energy;
    if (std::abs(ga - opt) <= 1e-12 * std::max(1.0, opt)) ++exact;
    CHECK(ga <= opt * 1.05 + 1e-12);
  }
  CHECK(exact >= 95);
}

TEST_CASE("permuting blobs permutes the GA labels") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = testing::random_assignment_problem(rng, 6, 3);
    std::vector<int> perm = {2, 0, 1};  // new blob k is old blob perm[k]
    std::shuffle(perm.begin(), perm.end(), rng);
    AssignmentProblem q = p;
    for (int k = 0; k < 3; ++k) q.blobs[k] = p.blobs[perm[k]];
    GAConfig cfg;
    cfg.rng_seed = 99;
    const auto a = solve_ga(p, cfg);
    const auto b = solve_ga(q, cfg);
    REQUIRE(a.labels.size() == b.labels.size());
    for (std::size_t s = 0; s < a.labels.size(); ++s) {
      if (a.labels[s] == kNoBlob) {
        CHECK(b.labels[s] == kNoBlob);
      } else {
        CHECK(perm[b.labels[s]] == a.labels[s]);
      }
    }
    CHECK(a.energy == doctest::Approx(b.energy).epsilon(1e-12));
  }
}

TEST_CASE("GA config validation") {
  GAConfig c;
  c.population = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.crossover_rate = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
