#include "gds/cloud_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace gds {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view token) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

// Reads non-comment lines, tracking 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw DataError("cannot open " + path.string());
  }

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      if (line[first] == '#') continue;
      return true;
    }
    return false;
  }

  int line_no() const { return line_no_; }
  const fs::path& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(path_.string(), line_no_, what);
  }
  [[noreturn]] void fail_eof(const std::string& what) const {
    throw ParseError(path_.string(), 0, what);
  }

 private:
  fs::path path_;
  std::ifstream in_;
  int line_no_ = 0;
};

std::size_t read_header(LineReader& reader, std::string_view magic) {
  std::string line;
  if (!reader.next(line)) reader.fail_eof("missing header");
  const auto fields = split_fields(line);
  if (fields.size() != 3 || fields[0] != magic || fields[1] != "v1") {
    reader.fail("expected header \"" + std::string(magic) + " v1 <N>\"");
  }
  const auto count = parse_number<long long>(fields[2]);
  if (!count || *count < 0) reader.fail("invalid point count in header");
  return static_cast<std::size_t>(*count);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void finish_output(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
}

fs::path resolve(const fs::path& base, std::string_view rel) {
  fs::path p{std::string(rel)};
  return p.is_absolute() ? p : base / p;
}

std::size_t peek_count(const fs::path& path, std::string_view magic) {
  LineReader reader(path);
  return read_header(reader, magic);
}

}  // namespace

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

PointCloudFrame load_frame(const fs::path& path, int frame_index,
                           std::vector<std::string>* warnings) {
  LineReader reader(path);
  const std::size_t count = read_header(reader, "ptseq");

  PointCloudFrame frame;
  frame.frame_index = frame_index;
  frame.points.reserve(count);

  std::string line;
  while (reader.next(line)) {
    if (frame.points.size() == count) {
      reader.fail("more rows than the " + std::to_string(count) +
                  " declared in header");
    }
    const auto fields = split_fields(line);
    if (fields.size() != 6) reader.fail("expected 6 fields \"x y z r g b\"");

    Point p;
    for (int k = 0; k < 3; ++k) {
      const auto v = parse_number<double>(fields[k]);
      if (!v) reader.fail("non-numeric coordinate '" + std::string(fields[k]) + "'");
      if (!std::isfinite(*v)) reader.fail("non-finite coordinate");
      p.position[k] = *v;
    }
    std::uint8_t* channels[3] = {&p.r, &p.g, &p.b};
    for (int k = 0; k < 3; ++k) {
      const auto v = parse_number<long long>(fields[3 + k]);
      if (!v) reader.fail("non-integer color '" + std::string(fields[3 + k]) + "'");
      const long long clamped = std::clamp<long long>(*v, 0, 255);
      if (clamped != *v && warnings) {
        warnings->push_back(path.string() + ":" +
                            std::to_string(reader.line_no()) +
                            ": color clamped to [0,255]");
      }
      *channels[k] = static_cast<std::uint8_t>(clamped);
    }
    frame.points.push_back(p);
  }
  if (frame.points.size() != count) {
    reader.fail_eof("header declares " + std::to_string(count) +
                    " points, found " + std::to_string(frame.points.size()));
  }
  return frame;
}

void write_frame(const PointCloudFrame& frame, const fs::path& path) {
  auto out = open_output(path);
  out << "ptseq v1 " << frame.points.size() << '\n';
  for (const auto& p : frame.points) {
    out << format_double(p.position.x()) << ' ' << format_double(p.position.y())
        << ' ' << format_double(p.position.z()) << ' ' << int(p.r) << ' '
        << int(p.g) << ' ' << int(p.b) << '\n';
  }
  finish_output(out, path);
}

LabeledFrame load_ground_truth(const fs::path& path, int frame_index) {
  LineReader reader(path);
  const std::size_t count = read_header(reader, "ptlab");
  LabeledFrame truth;
  truth.frame_index = frame_index;
  truth.labels.reserve(count);
  std::string line;
  while (reader.next(line)) {
    if (truth.labels.size() == count) reader.fail("more rows than declared");
    const auto fields = split_fields(line);
    if (fields.size() != 1) reader.fail("expected one label per line");
    const auto v = parse_number<int>(fields[0]);
    if (!v) reader.fail("non-integer label");
    truth.labels.push_back(*v);
  }
  if (truth.labels.size() != count) {
    reader.fail_eof("header declares " + std::to_string(count) +
                    " labels, found " + std::to_string(truth.labels.size()));
  }
  return truth;
}

void write_ground_truth(const LabeledFrame& truth, const fs::path& path) {
  auto out = open_output(path);
  out << "ptlab v1 " << truth.labels.size() << '\n';
  for (int label : truth.labels) out << label << '\n';
  finish_output(out, path);
}

void write_labels(const LabeledFrame& frame, const fs::path& path) {
  if (frame.labels.empty()) {
    throw DataError("refusing to write empty label list to " + path.string());
  }
  for (int label : frame.labels) {
    if (label < 0) throw DataError("negative object id in labels for " + path.string());
  }
  auto out = open_output(path);
  for (std::size_t i = 0; i < frame.labels.size(); ++i) {
    out << frame.frame_index << ' ' << i << ' ' << frame.labels[i] << '\n';
  }
  finish_output(out, path);
}

LabeledFrame load_labels(const fs::path& path) {
  LineReader reader(path);
  LabeledFrame frame;
  std::string line;
  bool first = true;
  while (reader.next(line)) {
    const auto fields = split_fields(line);
    if (fields.size() != 3) reader.fail("expected \"frame point object\"");
    const auto f = parse_number<int>(fields[0]);
    const auto i = parse_number<long long>(fields[1]);
    const auto id = parse_number<int>(fields[2]);
    if (!f || !i || !id) reader.fail("non-integer field");
    if (first) {
      frame.frame_index = *f;
      first = false;
    } else if (*f != frame.frame_index) {
      reader.fail("mixed frame indices");
    }
    if (*i != static_cast<long long>(frame.labels.size())) {
      reader.fail("point indices must be contiguous from 0");
    }
    frame.labels.push_back(*id);
  }
  return frame;
}

SequenceManifest load_sequence(const fs::path& manifest_path) {
  LineReader reader(manifest_path);
  const fs::path base = manifest_path.parent_path();
  SequenceManifest manifest;
  std::string line;
  while (reader.next(line)) {
    const auto start = line.find_first_not_of(" \t");
    const auto space = line.find_first_of(" \t", start);
    if (space == std::string::npos) reader.fail("expected \"<key> <value>\"");
    const std::string key = line.substr(start, space - start);
    std::string value = line.substr(line.find_first_not_of(" \t", space));
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) {
      value.pop_back();
    }
    if (key == "name") {
      manifest.name = value;
    } else if (key == "frame") {
      manifest.frame_paths.push_back(resolve(base, value));
    } else if (key == "gt") {
      manifest.ground_truth_paths.push_back(resolve(base, value));
    } else if (key == "interactions") {
      manifest.interactions_path = resolve(base, value);
    } else {
      reader.fail("unknown manifest key '" + key + "'");
    }
  }

  auto require = [](const fs::path& p) {
    if (!fs::exists(p)) throw DataError("missing file: " + p.string());
  };
  for (const auto& p : manifest.frame_paths) require(p);
  for (const auto& p : manifest.ground_truth_paths) require(p);
  if (manifest.interactions_path) require(*manifest.interactions_path);

  if (manifest.has_ground_truth()) {
    if (manifest.ground_truth_paths.size() != manifest.frame_paths.size()) {
      throw DataError("ground truth length mismatch: " +
                      std::to_string(manifest.frame_paths.size()) +
                      " frames, " +
                      std::to_string(manifest.ground_truth_paths.size()) +
                      " ground-truth files");
    }
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      const auto n_frame = peek_count(manifest.frame_paths[i], "ptseq");
      const auto n_truth = peek_count(manifest.ground_truth_paths[i], "ptlab");
      if (n_frame != n_truth) {
        throw DataError("point count mismatch at frame " + std::to_string(i) +
                        ": " + manifest.frame_paths[i].string() + " has " +
                        std::to_string(n_frame) + ", ground truth has " +
                        std::to_string(n_truth));
      }
    }
  }
  return manifest;
}

void write_manifest(const SequenceManifest& manifest,
                    const fs::path& manifest_path) {
  const fs::path base = manifest_path.parent_path();
  auto rel = [&](const fs::path& p) {
    return base.empty() ? p.generic_string()
                        : p.lexically_relative(base).generic_string();
  };
  auto out = open_output(manifest_path);
  if (!manifest.name.empty()) out << "name " << manifest.name << '\n';
  for (const auto& p : manifest.frame_paths) out << "frame " << rel(p) << '\n';
  for (const auto& p : manifest.ground_truth_paths) out << "gt " << rel(p) << '\n';
  if (manifest.interactions_path) {
    out << "interactions " << rel(*manifest.interactions_path) << '\n';
  }
  finish_output(out, manifest_path);
}

void write_interaction_log(std::vector<InteractionEvent> events,
                           const fs::path& path) {
  std::stable_sort(events.begin(), events.end(),
                   [](const InteractionEvent& a, const InteractionEvent& b) {
                     if (a.start_frame != b.start_frame) {
                       return a.start_frame < b.start_frame;
                     }
                     if (a.end_frame != b.end_frame) return a.end_frame < b.end_frame;
                     return a.object_ids < b.object_ids;
                   });
  auto out = open_output(path);
  for (const auto& e : events) {
    out << e.start_frame << ' ' << e.end_frame << ' ' << e.blob_hint();
    for (int id : e.object_ids) out << ' ' << id;
    out << '\n';
  }
  finish_output(out, path);
}

std::vector<InteractionEvent> load_interaction_log(const fs::path& path) {
  LineReader reader(path);
  std::vector<InteractionEvent> events;
  std::string line;
  while (reader.next(line)) {
    const auto fields = split_fields(line);
    if (fields.size() < 5) {
      reader.fail("expected \"start end blob id1 id2 ...\"");
    }
    std::vector<int> values;
    for (auto f : fields) {
      const auto v = parse_number<int>(f);
      if (!v) reader.fail("non-integer field '" + std::string(f) + "'");
      values.push_back(*v);
    }
    InteractionEvent e;
    e.start_frame = values[0];
    e.end_frame = values[1];
    if (e.end_frame < e.start_frame) reader.fail("end frame before start frame");
    if (values[2] >= 0) {
      e.blob_trace.assign(static_cast<std::size_t>(e.length()), values[2]);
    }
    e.object_ids.assign(values.begin() + 3, values.end());
    std::sort(e.object_ids.begin(), e.object_ids.end());
    events.push_back(std::move(e));
  }
  return events;
}

}  // namespace gds
