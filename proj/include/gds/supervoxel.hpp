#pragma once

#include "gds/cloud_io.hpp"
#include "gds/common.hpp"

#include <array>
#include <map>
#include <ostream>
#include <vector>

namespace gds {

using VoxelKey = std::array<int, 3>;

struct SupervoxelConfig {
  double voxel_resolution = 0.008;
  double seed_resolution = 0.08;
  double weight_color = 0.2;
  double weight_spatial = 0.4;
  int max_iterations = 10;

  void validate() const;
};

// Lab distances are normalized by this before weighting.
inline constexpr double kLabScale = 100.0;

struct SuperVoxel {
  int id = 0;
  Vec3 centroid = Vec3::Zero();
  Lab mean_color_lab;
  std::vector<int> point_indices;   // ascending
  std::vector<VoxelKey> voxel_keys; // ascending

  std::size_t size() const { return point_indices.size(); }
};

VoxelKey voxel_key(const Vec3& p, double resolution);

// Ordered by key so iteration is deterministic.
std::map<VoxelKey, std::vector<int>> voxelize(const PointCloudFrame& frame,
                                              double voxel_resolution);

// Seeded region growing over 26-connected voxels in a color/space feature
// space, refined for up to `max_iterations` passes. Supervoxel ids are
// 0..n-1 ordered by smallest voxel key.
std::vector<SuperVoxel> cluster_supervoxels(const PointCloudFrame& frame,
                                            const SupervoxelConfig& config);

// "sv v1 <n>" followed by "id cx cy cz L a b n_points".
void dump_supervoxels(const std::vector<SuperVoxel>& supervoxels,
                      std::ostream& out);

}  // namespace gds
