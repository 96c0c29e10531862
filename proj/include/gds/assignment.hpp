#pragma once

#include "gds/common.hpp"

#include <cstdint>
#include <vector>

namespace gds {

// Label for a segment that has no support in the current frame.
inline constexpr int kNoBlob = -1;

struct SegmentFeature {
  Vec3 centroid = Vec3::Zero();
  Lab mean_color_lab;
  int component_id = 0;
  int object_id = 0;
};

struct BlobFeature {
  std::vector<Vec3> centroids;  // one per supervoxel
  std::vector<Lab> colors;
};

// Weights of the assignment energy. A zero weight switches a term off.
struct EnergyWeights {
  double appearance = 1.0 / 100.0;    // alpha, per Lab unit
  double displacement = 1.0 / 0.08;   // beta, per meter (1 / seed_resolution)
  double uncovered_blob = 2.0;        // gamma
  double motion_coherence = 1.0;      // delta
  double unassigned_segment = 1.5;    // rho

  static EnergyWeights for_seed_resolution(double seed_resolution);
};

struct AssignmentProblem {
  std::vector<SegmentFeature> segments;  // previous frame, M_s
  std::vector<BlobFeature> blobs;        // current frame, M_b
  EnergyWeights weights;

  int num_segments() const { return static_cast<int>(segments.size()); }
  int num_blobs() const { return static_cast<int>(blobs.size()); }
  void validate() const;
};

struct Assignment {
  std::vector<int> labels;  // blob index or kNoBlob, one per segment
  double energy = 0.0;
};

// Precomputed per (segment, blob) terms; evaluates label vectors without
// touching the raw features again.
class AssignmentEnergy {
 public:
  explicit AssignmentEnergy(const AssignmentProblem& problem);

  double operator()(const std::vector<int>& labels) const;

  // alpha*A + beta*D for a real blob, rho for kNoBlob.
  double unary(int segment, int label) const;
  int num_segments() const { return num_segments_; }
  int num_blobs() const { return num_blobs_; }

 private:
  int num_segments_;
  int num_blobs_;
  EnergyWeights weights_;
  std::vector<double> unary_;         // [s * M_b + b]
  std::vector<Vec3> displacement_;    // [s * M_b + b]
  std::vector<int> component_of_;     // dense component index per segment
  int num_components_ = 0;
};

double energy_of(const AssignmentProblem& problem, const std::vector<int>& labels);

struct GAConfig {
  int population = 50;
  int generations = 150;
  int tournament_size = 3;
  double crossover_rate = 0.7;
  double mutation_rate = -1.0;  // per gene; negative means 1 / M_s
  int elitism = 2;
  int stagnation_stop = 25;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct GenerationStats {
  int generation = 0;
  double best_energy = 0.0;
  double mean_energy = 0.0;
};

struct GAResult {
  Assignment best;
  std::vector<GenerationStats> trace;  // entry 0 is the initial population
};

GAResult solve_ga_traced(const AssignmentProblem& problem, const GAConfig& config);
Assignment solve_ga(const AssignmentProblem& problem, const GAConfig& config);

// (M_b + 1)^M_s, saturating at the double range.
double exhaustive_candidate_count(const AssignmentProblem& problem);

// Enumerates every label vector; refuses more than 1e7 candidates. Ties go
// to the lexicographically smallest vector (kNoBlob sorts first).
Assignment solve_exhaustive(const AssignmentProblem& problem);

}  // namespace gds
