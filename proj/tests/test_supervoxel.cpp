#include "doctest.h"

#include "gds/supervoxel.hpp"

#include <map>
#include <random>
#include <set>

using namespace gds;

namespace {

PointCloudFrame frame_of(const std::vector<Vec3>& positions, std::uint8_t r = 120,
                         std::uint8_t g = 120, std::uint8_t b = 120) {
  PointCloudFrame f;
  for (const auto& p : positions) f.points.push_back(Point{p, r, g, b});
  return f;
}

// Dense cube of points with `per_axis`^3 samples spanning [origin, origin+side).
std::vector<Vec3> cube_points(const Vec3& origin, double side, int per_axis) {
  std::vector<Vec3> out;
  const double step = side / per_axis;
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j)
      for (int k = 0; k < per_axis; ++k)
        out.push_back(origin + Vec3((i + 0.5) * step, (j + 0.5) * step, (k + 0.5) * step));
  return out;
}

void check_partition(const std::vector<SuperVoxel>& svs, std::size_t num_points) {
  std::vector<int> owner(num_points, -1);
  for (const auto& sv : svs) {
    REQUIRE(!sv.point_indices.empty());
    for (int i : sv.point_indices) {
      REQUIRE(owner[i] == -1);
      owner[i] = sv.id;
    }
  }
  for (int o : owner) CHECK(o >= 0);
}

bool footprint_connected(const SuperVoxel& sv) {
  std::set<VoxelKey> keys(sv.voxel_keys.begin(), sv.voxel_keys.end());
  std::set<VoxelKey> seen{*keys.begin()};
  std::vector<VoxelKey> stack{*keys.begin()};
  while (!stack.empty()) {
    const auto k = stack.back();
    stack.pop_back();
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const VoxelKey n{k[0] + dx, k[1] + dy, k[2] + dz};
          if (keys.count(n) && seen.insert(n).second) stack.push_back(n);
        }
  }
  return seen.size() == keys.size();
}

}  // namespace

TEST_CASE("voxelize floors coordinates by resolution") {
  const auto grid = voxelize(frame_of({{0.001, 0, 0}, {0.009, 0, 0}}), 0.008);
  REQUIRE(grid.size() == 2);
  CHECK(grid.count({0, 0, 0}) == 1);
  CHECK(grid.count({1, 0, 0}) == 1);

  const auto single = voxelize(frame_of({{0.3, -0.2, 0.1}}), 0.008);
  REQUIRE(single.size() == 1);
  CHECK(single.begin()->second == std::vector<int>{0});

  const auto same = voxelize(frame_of({{0.1, 0.1, 0.1}, {0.1, 0.1, 0.1}, {0.1, 0.1, 0.1}}), 0.008);
  REQUIRE(same.size() == 1);
  CHECK(same.begin()->second == std::vector<int>{0, 1, 2});

  CHECK(voxel_key(Vec3(-0.001, 0, 0), 0.008) == VoxelKey{-1, 0, 0});
}

TEST_CASE("single point yields one supervoxel at the point") {
  const auto svs = cluster_supervoxels(frame_of({{0.5, 0.25, -1.0}}), {});
  REQUIRE(svs.size() == 1);
  CHECK(svs[0].centroid.isApprox(Vec3(0.5, 0.25, -1.0)));
  CHECK(svs[0].point_indices == std::vector<int>{0});
}

TEST_CASE("separated clusters never share a supervoxel") {
  auto pts = cube_points(Vec3(0, 0, 0), 0.05, 10);
  const auto far = cube_points(Vec3(1.0, 0, 0), 0.05, 10);
  const std::size_t split = pts.size();
  pts.insert(pts.end(), far.begin(), far.end());
  const auto svs = cluster_supervoxels(frame_of(pts), {});
  CHECK(svs.size() >= 2);
  check_partition(svs, pts.size());
  for (const auto& sv : svs) {
    const bool first = static_cast<std::size_t>(sv.point_indices.front()) < split;
    for (int i : sv.point_indices) {
      CHECK((static_cast<std::size_t>(i) < split) == first);
    }
  }
}

TEST_CASE("dense uniform cube of one seed cell yields between 1 and 8 supervoxels") {
  // Offset so the cube straddles seed cells in every axis (worst case 8).
  for (const Vec3 origin : {Vec3(0.0, 0.0, 0.0), Vec3(0.04, 0.04, 0.04), Vec3(0.013, 0.071, 0.035)}) {
    const auto pts = cube_points(origin, 0.08, 16);
    const auto svs = cluster_supervoxels(frame_of(pts), {});
    CHECK(svs.size() >= 1);
    CHECK(svs.size() <= 8);
  }
}

TEST_CASE("supervoxels partition points, have connected footprints and exact centroids") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  std::uniform_int_distribution<int> c(0, 255);
  PointCloudFrame f;
  for (int i = 0; i < 4000; ++i) {
    Point p{Vec3(u(rng), u(rng), u(rng) * 0.1), 0, 0, 0};
    p.r = static_cast<std::uint8_t>(p.position.x() > 0.15 ? 220 : c(rng) / 8);
    p.g = 40;
    p.b = static_cast<std::uint8_t>(p.position.x() > 0.15 ? 30 : 200);
    f.points.push_back(p);
  }
  const auto svs = cluster_supervoxels(f, {});
  check_partition(svs, f.size());
  CHECK(svs.size() <= voxelize(f, 0.008).size());
  for (std::size_t k = 0; k < svs.size(); ++k) {
    const auto& sv = svs[k];
    CHECK(sv.id == static_cast<int>(k));
    CHECK(footprint_connected(sv));
    Vec3 mean = Vec3::Zero();
    for (int i : sv.point_indices) mean += f.points[i].position;
    mean /= static_cast<double>(sv.size());
    CHECK((mean - sv.centroid).norm() < 1e-9);
  }

  const auto again = cluster_supervoxels(f, {});
  REQUIRE(again.size() == svs.size());
  for (std::size_t k = 0; k < svs.size(); ++k) {
    CHECK(again[k].point_indices == svs[k].point_indices);
  }
}

TEST_CASE("each voxel belongs to the bordering supervoxel with the smallest feature distance") {
  // Two seed cells along a single row of voxels, uniform color: the
  // boundary must sit where feature distance to the two centroids crosses.
  SupervoxelConfig cfg;
  std::vector<Vec3> pts;
  for (int i = 0; i < 20; ++i) pts.emplace_back((i + 0.5) * 0.008, 0.004, 0.004);
  const auto f = frame_of(pts);
  const auto svs = cluster_supervoxels(f, cfg);
  REQUIRE(svs.size() == 2);

  auto distance = [&](const SuperVoxel& sv, const Vec3& p) {
    const double s = (sv.centroid - p).norm() / cfg.seed_resolution;
    return std::sqrt(cfg.weight_spatial * s * s);
  };
  for (int i = 0; i < 20; ++i) {
    const int owner = std::find(svs[0].point_indices.begin(), svs[0].point_indices.end(), i) !=
                              svs[0].point_indices.end()
                          ? 0
                          : 1;
    CHECK(distance(svs[owner], pts[i]) <= distance(svs[1 - owner], pts[i]));
  }

  // Color term: a red half and a blue half split at the color change even
  // though the seed grid would cut elsewhere.
  PointCloudFrame two_tone;
  for (int i = 0; i < 20; ++i) {
    const bool red = i < 7;
    two_tone.points.push_back(Point{pts[i], static_cast<std::uint8_t>(red ? 230 : 20), 20,
                                    static_cast<std::uint8_t>(red ? 20 : 230)});
  }
  SupervoxelConfig color_cfg;
  color_cfg.weight_color = 1.0;
  const auto tone = cluster_supervoxels(two_tone, color_cfg);
  for (const auto& sv : tone) {
    const bool red = sv.point_indices.front() < 7;
    for (int i : sv.point_indices) CHECK((i < 7) == red);
  }
}

TEST_CASE("config validation") {
  SupervoxelConfig c;
  c.seed_resolution = 0.001;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.voxel_resolution = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.weight_color = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("rgb_to_lab reference values") {
  const Lab white = rgb_to_lab(255, 255, 255);
  CHECK(white.L == doctest::Approx(100.0).epsilon(1e-4));
  CHECK(std::abs(white.a) < 1e-2);
  CHECK(std::abs(white.b) < 1e-2);
  const Lab red = rgb_to_lab(255, 0, 0);
  CHECK(red.L == doctest::Approx(53.24).epsilon(1e-3));
  CHECK(red.a == doctest::Approx(80.09).epsilon(1e-3));
  CHECK(red.b == doctest::Approx(67.20).epsilon(1e-3));
  const Lab black = rgb_to_lab(0, 0, 0);
  CHECK(black.L == doctest::Approx(0.0));
}
