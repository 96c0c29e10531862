#include "doctest.h"

#include "gds/cloud_io.hpp"

#include "test_support.hpp"

#include <random>

using namespace gds;

using namespace gds::testing;

TEST_CASE("load_frame reads a minimal valid file") {
  TempDir dir;
  write_text(dir.path / "f.pts", "ptseq v1 2\n0.1 0.2 0.3 10 20 30\n# comment\n-1 2.5 3 0 0 255\n");
  const auto frame = load_frame(dir.path / "f.pts", 4);
  CHECK(frame.frame_index == 4);
  REQUIRE(frame.size() == 2);
  CHECK(frame.points[0].position.x() == 0.1);
  CHECK(frame.points[1].position.y() == 2.5);
  CHECK(int(frame.points[1].b) == 255);
}

TEST_CASE("load_frame rejects a point-count mismatch at end of file") {
  TempDir dir;
  write_text(dir.path / "f.pts", "ptseq v1 3\n0 0 0 1 1 1\n0 0 1 1 1 1\n");
  try {
    load_frame(dir.path / "f.pts");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 0);
    CHECK(std::string(e.what()).find("EOF") != std::string::npos);
  }
}

TEST_CASE("load_frame clamps out-of-range colors and warns") {
  TempDir dir;
  write_text(dir.path / "f.pts", "ptseq v1 1\n0.1 0.2 0.3 300 0 0\n");
  std::vector<std::string> warnings;
  const auto frame = load_frame(dir.path / "f.pts", 0, &warnings);
  CHECK(int(frame.points[0].r) == 255);
  CHECK(int(frame.points[0].g) == 0);
  CHECK(warnings.size() == 1);
}

TEST_CASE("load_frame names the offending line") {
  TempDir dir;
  write_text(dir.path / "a.pts", "ptseq v1 2\n0 0 0 1 1 1\n0 zero 0 1 1 1\n");
  try {
    load_frame(dir.path / "a.pts");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  write_text(dir.path / "b.pts", "ptsq v1 1\n0 0 0 1 1 1\n");
  CHECK_THROWS_AS(load_frame(dir.path / "b.pts"), ParseError);
  write_text(dir.path / "c.pts", "ptseq v1 1\n0 0 nan 1 1 1\n");
  CHECK_THROWS_AS(load_frame(dir.path / "c.pts"), ParseError);
  write_text(dir.path / "d.pts", "ptseq v1 1\n0 0 0 1 1 1\n1 1 1 1 1 1\n");
  CHECK_THROWS_AS(load_frame(dir.path / "d.pts"), ParseError);
}

TEST_CASE("write_labels format and determinism") {
  TempDir dir;
  LabeledFrame frame{0, {1, 1, 2}};
  write_labels(frame, dir.path / "a.lab");
  CHECK(read_text(dir.path / "a.lab") == "0 0 1\n0 1 1\n0 2 2\n");
  write_labels(frame, dir.path / "b.lab");
  CHECK(read_text(dir.path / "a.lab") == read_text(dir.path / "b.lab"));

  const auto back = load_labels(dir.path / "a.lab");
  CHECK(back.frame_index == 0);
  CHECK(back.labels == frame.labels);

  CHECK_THROWS_AS(write_labels(LabeledFrame{0, {}}, dir.path / "c.lab"), DataError);
}

TEST_CASE("frame round trip preserves coordinates and colors in order") {
  TempDir dir;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  std::uniform_int_distribution<int> color(0, 255);
  for (int trial = 0; trial < 20; ++trial) {
    PointCloudFrame frame;
    frame.points.resize(1 + trial * 13);
    for (auto& p : frame.points) {
      p.position = Vec3(coord(rng), coord(rng) * 1e-4, coord(rng) * 1e3);
      p.r = static_cast<std::uint8_t>(color(rng));
      p.g = static_cast<std::uint8_t>(color(rng));
      p.b = static_cast<std::uint8_t>(color(rng));
    }
    write_frame(frame, dir.path / "rt.pts");
    const auto back = load_frame(dir.path / "rt.pts");
    REQUIRE(back.size() == frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        const double a = frame.points[i].position[k];
        const double b = back.points[i].position[k];
        CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
      }
      CHECK(back.points[i].r == frame.points[i].r);
      CHECK(back.points[i].g == frame.points[i].g);
      CHECK(back.points[i].b == frame.points[i].b);
    }
  }
}

TEST_CASE("load_sequence resolves and validates referenced files") {
  TempDir dir;
  for (int i = 0; i < 3; ++i) {
    write_text(dir.path / ("f" + std::to_string(i) + ".pts"), "ptseq v1 1\n0 0 0 1 1 1\n");
    write_text(dir.path / ("g" + std::to_string(i) + ".lab"), "ptlab v1 1\n3\n");
  }
  write_text(dir.path / "ok.seq", "name demo\nframe f0.pts\nframe f1.pts\nframe f2.pts\n");
  const auto m = load_sequence(dir.path / "ok.seq");
  CHECK(m.name == "demo");
  CHECK(m.size() == 3);
  CHECK(!m.has_ground_truth());

  write_text(dir.path / "missing.seq", "frame f0.pts\nframe nope.pts\n");
  try {
    load_sequence(dir.path / "missing.seq");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("nope.pts") != std::string::npos);
  }

  write_text(dir.path / "gt.seq",
             "frame f0.pts\nframe f1.pts\nframe f2.pts\ngt g0.lab\ngt g1.lab\n");
  try {
    load_sequence(dir.path / "gt.seq");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("ground truth length mismatch") != std::string::npos);
  }

  write_text(dir.path / "g2.lab", "ptlab v1 2\n3\n3\n");
  write_text(dir.path / "count.seq", "frame f0.pts\ngt g2.lab\n");
  CHECK_THROWS_AS(load_sequence(dir.path / "count.seq"), DataError);
}

TEST_CASE("interaction log is sorted by start frame and reloads") {
  TempDir dir;
  std::vector<InteractionEvent> events = {
      {9, 12, {2, 5}, {1, 1, 1, 1}},
      {3, 4, {1, 2, 7}, {0, 0}},
  };
  write_interaction_log(events, dir.path / "i.log");
  CHECK(read_text(dir.path / "i.log") == "3 4 0 1 2 7\n9 12 1 2 5\n");
  const auto back = load_interaction_log(dir.path / "i.log");
  REQUIRE(back.size() == 2);
  CHECK(back[0].object_ids == std::vector<int>{1, 2, 7});
  CHECK(back[1].start_frame == 9);
  CHECK(back[1].end_frame == 12);
}
