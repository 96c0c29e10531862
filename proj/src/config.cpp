#include "gds/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <variant>

namespace gds {

namespace {

constexpr const char* kSeedKey = "supervoxel.seed_resolution";

using Slot = std::variant<double*, int*, std::uint64_t*>;

struct Key {
  const char* name;
  std::function<Slot(PipelineConfig&)> slot;
};

const std::vector<Key>& registry() {
  static const std::vector<Key> keys = {
      {"supervoxel.voxel_resolution", [](PipelineConfig& c) -> Slot { return &c.supervoxel.voxel_resolution; }},
      {kSeedKey, [](PipelineConfig& c) -> Slot { return &c.supervoxel.seed_resolution; }},
      {"supervoxel.weight_color", [](PipelineConfig& c) -> Slot { return &c.supervoxel.weight_color; }},
      {"supervoxel.weight_spatial", [](PipelineConfig& c) -> Slot { return &c.supervoxel.weight_spatial; }},
      {"supervoxel.max_iterations", [](PipelineConfig& c) -> Slot { return &c.supervoxel.max_iterations; }},
      {"graph.seed_resolution", [](PipelineConfig& c) -> Slot { return &c.graph.seed_resolution; }},
      {"graph.adjacency_radius", [](PipelineConfig& c) -> Slot { return &c.graph.adjacency_radius; }},
      {"graph.sigma_color", [](PipelineConfig& c) -> Slot { return &c.graph.sigma_color; }},
      {"graph.sigma_distance", [](PipelineConfig& c) -> Slot { return &c.graph.sigma_distance; }},
      {"energy.appearance", [](PipelineConfig& c) -> Slot { return &c.energy.appearance; }},
      {"energy.displacement", [](PipelineConfig& c) -> Slot { return &c.energy.displacement; }},
      {"energy.uncovered_blob", [](PipelineConfig& c) -> Slot { return &c.energy.uncovered_blob; }},
      {"energy.motion_coherence", [](PipelineConfig& c) -> Slot { return &c.energy.motion_coherence; }},
      {"energy.unassigned_segment", [](PipelineConfig& c) -> Slot { return &c.energy.unassigned_segment; }},
      {"ga.population", [](PipelineConfig& c) -> Slot { return &c.ga.population; }},
      {"ga.generations", [](PipelineConfig& c) -> Slot { return &c.ga.generations; }},
      {"ga.tournament_size", [](PipelineConfig& c) -> Slot { return &c.ga.tournament_size; }},
      {"ga.crossover_rate", [](PipelineConfig& c) -> Slot { return &c.ga.crossover_rate; }},
      {"ga.mutation_rate", [](PipelineConfig& c) -> Slot { return &c.ga.mutation_rate; }},
      {"ga.elitism", [](PipelineConfig& c) -> Slot { return &c.ga.elitism; }},
      {"ga.stagnation_stop", [](PipelineConfig& c) -> Slot { return &c.ga.stagnation_stop; }},
      {"cut.lambda", [](PipelineConfig& c) -> Slot { return &c.cut.lambda; }},
      {"cut.mu", [](PipelineConfig& c) -> Slot { return &c.cut.mu; }},
      {"cut.sigma_boundary", [](PipelineConfig& c) -> Slot { return &c.cut.sigma_boundary; }},
      {"cut.seed_resolution", [](PipelineConfig& c) -> Slot { return &c.cut.seed_resolution; }},
      {"tree.merge_threshold", [](PipelineConfig& c) -> Slot { return &c.tree.merge_threshold; }},
      {"tree.split_threshold", [](PipelineConfig& c) -> Slot { return &c.tree.split_threshold; }},
      {"tree.sigma_distance", [](PipelineConfig& c) -> Slot { return &c.tree.sigma_distance; }},
      {"tree.sigma_color", [](PipelineConfig& c) -> Slot { return &c.tree.sigma_color; }},
      {"tree.candidate_gap", [](PipelineConfig& c) -> Slot { return &c.tree.candidate_gap; }},
      {"tree.retention_frames", [](PipelineConfig& c) -> Slot { return &c.tree.retention_frames; }},
      {"overseg.ncut_threshold", [](PipelineConfig& c) -> Slot { return &c.tree.overseg.ncut_threshold; }},
      {"overseg.min_segment_supervoxels", [](PipelineConfig& c) -> Slot { return &c.tree.overseg.min_segment_supervoxels; }},
      {"overseg.eigen_tolerance", [](PipelineConfig& c) -> Slot { return &c.tree.overseg.eigen_tolerance; }},
      {"overseg.eigen_max_iterations", [](PipelineConfig& c) -> Slot { return &c.tree.overseg.eigen_max_iterations; }},
      {"rng_seed", [](PipelineConfig& c) -> Slot { return &c.rng_seed; }},
  };
  return keys;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : registry()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
void assign(T* dst, const std::string& key, const std::string& text) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("config key \"" + key + "\": bad value \"" + text + "\"");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) throw ConfigError("config key \"" + key + "\": value is not finite");
  }
  *dst = v;
}

void apply(PipelineConfig& c, const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown config key \"" + key + "\"");
  std::visit([&](auto* dst) { assign(dst, key, value); }, k->slot(c));
}

std::map<std::string, std::string> parse_lines(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (!find_key(key)) throw ConfigError("unknown config key \"" + key + "\"");
    if (!values.emplace(key, trim(line.substr(eq + 1))).second) {
      throw ConfigError("config key \"" + key + "\" given twice");
    }
  }
  return values;
}

}  // namespace

std::vector<std::string> run_config_keys() {
  std::vector<std::string> out;
  for (const auto& k : registry()) out.emplace_back(k.name);
  return out;
}

PipelineConfig parse_run_config(const std::string& text, const ConfigOverrides& overrides) {
  auto values = parse_lines(text);
  for (const auto& [key, value] : overrides) {
    if (!find_key(key)) throw ConfigError("unknown config key \"" + key + "\"");
    values[key] = value;
  }
  PipelineConfig c;
  if (auto it = values.find(kSeedKey); it != values.end()) {
    double seed = 0.0;
    assign(&seed, kSeedKey, it->second);
    if (!(seed > 0.0)) throw ConfigError(std::string("config key \"") + kSeedKey + "\": must be > 0");
    const auto rng = c.rng_seed;
    c = PipelineConfig::for_seed_resolution(seed);
    c.rng_seed = rng;
  }
  for (const auto& [key, value] : values) {
    if (key != kSeedKey) apply(c, key, value);
  }
  c.validate();
  return c;
}

PipelineConfig load_run_config(const std::filesystem::path& path,
                               const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), overrides);
}

std::string format_run_config(const PipelineConfig& config) {
  PipelineConfig c = config;
  std::ostringstream out;
  for (const auto& k : registry()) {
    out << k.name << '=';
    std::visit(
        [&](auto* v) {
          if constexpr (std::is_same_v<decltype(v), double*>) {
            out << format_double(*v);
          } else {
            out << *v;
          }
        },
        k.slot(c));
    out << '\n';
  }
  return out.str();
}

}  // namespace gds
