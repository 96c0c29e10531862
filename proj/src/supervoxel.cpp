#include "gds/supervoxel.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace gds {

namespace {

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::size_t h = static_cast<std::size_t>(k[0]) * 73856093u;
    h ^= static_cast<std::size_t>(k[1]) * 19349663u;
    h ^= static_cast<std::size_t>(k[2]) * 83492791u;
    return h;
  }
};

struct Voxel {
  VoxelKey key;
  std::vector<int> points;
  Vec3 centroid = Vec3::Zero();
  Lab lab;
  Vec3 lab_sum = Vec3::Zero();  // for point-weighted region means
};

struct Seed {
  int anchor = 0;  // voxel index
  Vec3 centroid = Vec3::Zero();
  Lab lab;
};

class Clusterer {
 public:
  Clusterer(const PointCloudFrame& frame, const SupervoxelConfig& config)
      : frame_(frame), config_(config) {
    build_voxels();
  }

  std::vector<SuperVoxel> run() {
    if (voxels_.empty()) return {};
    std::vector<Seed> seeds = initial_seeds();
    std::vector<int> owner;
    for (int pass = 0; pass < config_.max_iterations; ++pass) {
      std::vector<int> next_owner = grow(seeds);
      const bool stable = next_owner == owner;
      owner = std::move(next_owner);
      if (stable) break;
      seeds = reestimate(owner);
    }
    return emit(owner);
  }

 private:
  void build_voxels() {
    const auto grid = voxelize(frame_, config_.voxel_resolution);
    voxels_.reserve(grid.size());
    for (const auto& [key, members] : grid) {
      Voxel v;
      v.key = key;
      v.points = members;
      for (int i : members) {
        const auto& p = frame_.points[i];
        v.centroid += p.position;
        const Lab lab = rgb_to_lab(p.r, p.g, p.b);
        v.lab_sum += Vec3(lab.L, lab.a, lab.b);
      }
      v.centroid /= static_cast<double>(members.size());
      const Vec3 mean = v.lab_sum / static_cast<double>(members.size());
      v.lab = Lab{mean.x(), mean.y(), mean.z()};
      index_.emplace(key, static_cast<int>(voxels_.size()));
      voxels_.push_back(std::move(v));
    }
    neighbors_.resize(voxels_.size());
    for (std::size_t i = 0; i < voxels_.size(); ++i) {
      const auto& k = voxels_[i].key;
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            auto it = index_.find({k[0] + dx, k[1] + dy, k[2] + dz});
            if (it != index_.end()) neighbors_[i].push_back(it->second);
          }
        }
      }
      std::sort(neighbors_[i].begin(), neighbors_[i].end());
    }
  }

  double feature_distance(const Seed& s, const Voxel& v) const {
    const double color = delta_e(s.lab, v.lab) / kLabScale;
    const double spatial = (s.centroid - v.centroid).norm() / config_.seed_resolution;
    return std::sqrt(config_.weight_color * color * color +
                     config_.weight_spatial * spatial * spatial);
  }

  // One seed per occupied seed-grid cell at the voxel nearest the cell
  // center; ties go to the smaller key (voxels are visited in key order).
  std::vector<Seed> initial_seeds() const {
    const double vres = config_.voxel_resolution;
    const double sres = config_.seed_resolution;
    std::map<VoxelKey, std::pair<double, int>> best;
    for (std::size_t i = 0; i < voxels_.size(); ++i) {
      const auto& k = voxels_[i].key;
      const Vec3 center((k[0] + 0.5) * vres, (k[1] + 0.5) * vres,
                        (k[2] + 0.5) * vres);
      const VoxelKey cell = voxel_key(center, sres);
      const Vec3 cell_center((cell[0] + 0.5) * sres, (cell[1] + 0.5) * sres,
                             (cell[2] + 0.5) * sres);
      const double d = (center - cell_center).squaredNorm();
      auto [it, inserted] = best.try_emplace(cell, d, static_cast<int>(i));
      if (!inserted && d < it->second.first) it->second = {d, static_cast<int>(i)};
    }
    std::vector<int> anchors;
    for (const auto& [cell, entry] : best) anchors.push_back(entry.second);
    std::sort(anchors.begin(), anchors.end());
    std::vector<Seed> seeds;
    for (int a : anchors) seeds.push_back(seed_at(a));
    return seeds;
  }

  Seed seed_at(int voxel) const {
    return Seed{voxel, voxels_[voxel].centroid, voxels_[voxel].lab};
  }

  // Priority flood: a voxel goes to the first seed that pops it, i.e. the
  // lowest feature distance among seeds whose regions border it.
  std::vector<int> grow(std::vector<Seed>& seeds) const {
    using Entry = std::tuple<double, int, int>;  // distance, seed, voxel
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    std::vector<int> owner(voxels_.size(), -1);

    auto flood = [&] {
      while (!queue.empty()) {
        const auto [d, s, v] = queue.top();
        queue.pop();
        if (owner[v] != -1) continue;
        owner[v] = s;
        for (int u : neighbors_[v]) {
          if (owner[u] == -1) {
            queue.emplace(feature_distance(seeds[s], voxels_[u]), s, u);
          }
        }
      }
    };

    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const int a = seeds[s].anchor;
      queue.emplace(feature_distance(seeds[s], voxels_[a]), static_cast<int>(s), a);
    }
    flood();

    // Voxel islands no seed could reach get their own seed.
    for (std::size_t v = 0; v < voxels_.size(); ++v) {
      if (owner[v] != -1) continue;
      seeds.push_back(seed_at(static_cast<int>(v)));
      queue.emplace(0.0, static_cast<int>(seeds.size() - 1), static_cast<int>(v));
      flood();
    }
    return canonical(owner);
  }

  // Renumber regions by their smallest voxel index; drops empty seeds.
  static std::vector<int> canonical(const std::vector<int>& owner) {
    std::unordered_map<int, int> remap;
    std::vector<int> out(owner.size());
    for (std::size_t v = 0; v < owner.size(); ++v) {
      auto [it, inserted] = remap.try_emplace(owner[v], static_cast<int>(remap.size()));
      out[v] = it->second;
    }
    return out;
  }

  std::vector<Seed> reestimate(const std::vector<int>& owner) const {
    const int n = owner.empty() ? 0 : *std::max_element(owner.begin(), owner.end()) + 1;
    std::vector<Vec3> pos(n, Vec3::Zero());
    std::vector<Vec3> lab(n, Vec3::Zero());
    std::vector<double> count(n, 0.0);
    for (std::size_t v = 0; v < owner.size(); ++v) {
      const auto& vox = voxels_[v];
      const double m = static_cast<double>(vox.points.size());
      pos[owner[v]] += vox.centroid * m;
      lab[owner[v]] += vox.lab_sum;
      count[owner[v]] += m;
    }
    std::vector<Seed> seeds(n);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    for (int s = 0; s < n; ++s) {
      seeds[s].centroid = pos[s] / count[s];
      const Vec3 mean = lab[s] / count[s];
      seeds[s].lab = Lab{mean.x(), mean.y(), mean.z()};
    }
    for (std::size_t v = 0; v < owner.size(); ++v) {
      const int s = owner[v];
      const double d = (voxels_[v].centroid - seeds[s].centroid).squaredNorm();
      if (d < best[s]) {
        best[s] = d;
        seeds[s].anchor = static_cast<int>(v);
      }
    }
    return seeds;
  }

  std::vector<SuperVoxel> emit(const std::vector<int>& owner) const {
    const int n = *std::max_element(owner.begin(), owner.end()) + 1;
    std::vector<SuperVoxel> out(n);
    for (int s = 0; s < n; ++s) out[s].id = s;
    for (std::size_t v = 0; v < owner.size(); ++v) {
      auto& sv = out[owner[v]];
      sv.voxel_keys.push_back(voxels_[v].key);
      sv.point_indices.insert(sv.point_indices.end(), voxels_[v].points.begin(),
                              voxels_[v].points.end());
    }
    for (auto& sv : out) {
      std::sort(sv.point_indices.begin(), sv.point_indices.end());
      Vec3 lab = Vec3::Zero();
      for (int i : sv.point_indices) {
        const auto& p = frame_.points[i];
        sv.centroid += p.position;
        const Lab l = rgb_to_lab(p.r, p.g, p.b);
        lab += Vec3(l.L, l.a, l.b);
      }
      const double m = static_cast<double>(sv.point_indices.size());
      sv.centroid /= m;
      lab /= m;
      sv.mean_color_lab = Lab{lab.x(), lab.y(), lab.z()};
    }
    return out;
  }

  const PointCloudFrame& frame_;
  const SupervoxelConfig& config_;
  std::vector<Voxel> voxels_;
  std::unordered_map<VoxelKey, int, VoxelKeyHash> index_;
  std::vector<std::vector<int>> neighbors_;
};

}  // namespace

void SupervoxelConfig::validate() const {
  if (!(voxel_resolution > 0.0) || !(seed_resolution > 0.0)) {
    throw ConfigError("supervoxel resolutions must be positive");
  }
  if (seed_resolution < voxel_resolution) {
    throw ConfigError("supervoxel.seed_resolution must be >= voxel_resolution");
  }
  if (!(weight_color >= 0.0) || !(weight_spatial >= 0.0)) {
    throw ConfigError("supervoxel weights must be non-negative");
  }
  if (max_iterations < 1) throw ConfigError("supervoxel.max_iterations must be >= 1");
}

VoxelKey voxel_key(const Vec3& p, double resolution) {
  return {static_cast<int>(std::floor(p.x() / resolution)),
          static_cast<int>(std::floor(p.y() / resolution)),
          static_cast<int>(std::floor(p.z() / resolution))};
}

std::map<VoxelKey, std::vector<int>> voxelize(const PointCloudFrame& frame,
                                              double voxel_resolution) {
  if (!(voxel_resolution > 0.0)) throw ConfigError("voxel resolution must be positive");
  std::map<VoxelKey, std::vector<int>> grid;
  for (std::size_t i = 0; i < frame.points.size(); ++i) {
    grid[voxel_key(frame.points[i].position, voxel_resolution)].push_back(
        static_cast<int>(i));
  }
  return grid;
}

std::vector<SuperVoxel> cluster_supervoxels(const PointCloudFrame& frame,
                                            const SupervoxelConfig& config) {
  config.validate();
  return Clusterer(frame, config).run();
}

void dump_supervoxels(const std::vector<SuperVoxel>& supervoxels,
                      std::ostream& out) {
  out << "sv v1 " << supervoxels.size() << '\n';
  for (const auto& sv : supervoxels) {
    out << sv.id << ' ' << format_double(sv.centroid.x()) << ' '
        << format_double(sv.centroid.y()) << ' '
        << format_double(sv.centroid.z()) << ' '
        << format_double(sv.mean_color_lab.L) << ' '
        << format_double(sv.mean_color_lab.a) << ' '
        << format_double(sv.mean_color_lab.b) << ' ' << sv.point_indices.size()
        << '\n';
  }
}

}  // namespace gds
