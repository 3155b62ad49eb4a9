#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "ghostsweep/ground.hpp"
#include "oracles.hpp"

using namespace ghostsweep;
using fixtures::pt;

namespace {

GridConfig row_grid(std::size_t n, int radius) {
  GridConfig cfg = fixtures::unit_grid(1, n, 8);
  cfg.mad_window_radius = radius;
  return cfg;
}

// One cell with res_h 0.8 and 8 sub-bins of 0.1 m; counts[s] points at the middle of sub-bin s.
struct FineCell {
  GridConfig cfg;
  std::vector<Point> points;
  EncodedMatrix map;
};

FineCell fine_cell(const std::vector<int>& counts, double ratio) {
  FineCell f;
  f.cfg = fixtures::unit_grid(1, 1, 8);
  f.cfg.res_h = 0.8;
  f.cfg.fine_factor = 8;
  f.cfg.ground_ratio = ratio;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    for (int n = 0; n < counts[s]; ++n) {
      f.points.push_back(pt(0.5, 0.5, (static_cast<double>(s) + 0.5) * 0.1, static_cast<PointIndex>(f.points.size())));
    }
  }
  f.map = encode(f.points, f.cfg, 0.0);
  return f;
}

}  // namespace

TEST_SUITE("ground") {

TEST_CASE("median and MAD band") {
  std::vector<double> odd{5.0, 1.0, 3.0};
  CHECK(median_of(odd) == 3.0);
  std::vector<double> even{4.0, 1.0, 2.0, 3.0};
  CHECK(median_of(even) == 2.5);
  std::vector<double> none;
  CHECK_THROWS_AS(median_of(none), Error);
}

TEST_CASE("outlier above the window is clamped to the upper bound") {
  const GridConfig cfg = row_grid(5, 4);
  const std::vector<std::optional<double>> lowest{0.9, 1.0, 1.1, 1.3, 5.0};
  const GroundField f = coarse_ground(lowest, cfg);
  CHECK(f.l_min[4] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.l_max[4] == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(f.g[4] == doctest::Approx(1.7).epsilon(1e-12));
  // Values inside the band pass through.
  CHECK(f.g[1] == 1.0);
  CHECK(f.g[3] == 1.3);
}

TEST_CASE("underground outlier is clamped to the flat ground") {
  const GridConfig cfg = row_grid(6, 5);
  const std::vector<std::optional<double>> lowest{1.0, 1.0, 1.0, -4.0, 1.0, 1.0};
  const GroundField f = coarse_ground(lowest, cfg);
  CHECK(f.l_min[3] == 1.0);
  CHECK(f.l_max[3] == 1.0);
  CHECK(f.g[3] == 1.0);
}

TEST_CASE("one low outlier never moves neighbouring ground heights") {
  GridConfig cfg = fixtures::unit_grid(7, 7, 8);
  cfg.mad_window_radius = 1;
  std::vector<std::optional<double>> lowest(49, 2.0);
  const GroundField clean = coarse_ground(lowest, cfg);
  lowest[3 * 7 + 3] = -30.0;
  const GroundField dirty = coarse_ground(lowest, cfg);
  for (std::size_t c = 0; c < 49; ++c) CHECK(dirty.g[c] == clean.g[c]);
}

TEST_CASE("empty cells take the window median, empty windows the floor") {
  GridConfig cfg = row_grid(8, 1);
  cfg.z_floor = -3.0;
  std::vector<std::optional<double>> lowest(8);
  lowest[0] = 1.0;
  lowest[2] = 2.0;
  const GroundField f = coarse_ground(lowest, cfg);
  CHECK(f.g[1] == 1.5);
  CHECK(f.g[3] == 2.0);
  CHECK(f.g[6] == -3.0);
  CHECK_FALSE(f.lowest[1].has_value());
}

TEST_CASE("coarse ground agrees with the per-window oracle and stays in bounds") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    GridConfig cfg = fixtures::unit_grid(16, 16, 8);
    cfg.mad_window_radius = static_cast<int>(rng() % 4);
    cfg.z_floor = -2.0;
    std::vector<std::optional<double>> lowest(cfg.cell_count());
    for (std::size_t c = 0; c < lowest.size(); ++c) {
      if (u(rng) < 0.2) continue;
      lowest[c] = 0.02 * static_cast<double>(c % 16) + noise(rng);
      if (u(rng) < 0.05) *lowest[c] -= 5.0 + 10.0 * u(rng);
    }
    const GroundField f = coarse_ground(lowest, cfg);
    for (std::size_t i = 0; i < 16; ++i) {
      for (std::size_t j = 0; j < 16; ++j) {
        const auto o = oracle::ground_cell(lowest, cfg, i, j);
        const std::size_t c = i * 16 + j;
        CHECK(f.g[c] == o.g);
        CHECK(f.l_min[c] == o.l_min);
        CHECK(f.l_max[c] == o.l_max);
        if (lowest[c]) {
          CHECK(f.l_min[c] <= f.g[c]);
          CHECK(f.g[c] <= f.l_max[c]);
        }
      }
    }
  }
}

TEST_CASE("lowest heights per cell") {
  const GridConfig cfg = fixtures::unit_grid(2, 2, 8);
  const std::vector<Point> pts{pt(0.5, 0.5, 3.0), pt(0.2, 0.7, -1.0), pt(1.5, 1.5, 2.0), pt(9, 9, -50)};
  const auto l = lowest_heights(pts, cfg);
  CHECK(*l[0] == -1.0);
  CHECK(*l[3] == 2.0);
  CHECK_FALSE(l[1].has_value());
}

TEST_CASE("C_sel needs an occupied ground bin under a flagged bin 1") {
  const GridConfig cfg = fixtures::unit_grid(1, 3, 8);
  const std::vector<Point> pts{pt(0.5, 0.5, 0.5, 0), pt(0.5, 1.5, 0.5, 1), pt(0.5, 2.5, 1.5, 2)};
  const EncodedMatrix map = encode(pts, cfg, 0.0);
  DynamicMask mask;
  mask.cells = {{0, 0b010}, {1, 0b100}, {2, 0b010}};
  CHECK(select_csel(mask, map) == std::vector<std::size_t>{0});
}

TEST_CASE("cumulative ground sub-bin rule") {
  const std::vector<std::uint32_t> counts{50, 45, 2, 1, 1, 1, 0, 0};
  CHECK(ground_top_subbin(counts, 0.7) == 1);
  CHECK(ground_top_subbin(counts, 1.0) == 5);
  CHECK(ground_top_subbin(std::vector<std::uint32_t>(8, 0), 0.7) == 0);
}

TEST_CASE("fine segmentation flags the sparse tail above the ground surface") {
  const FineCell f = fine_cell({50, 45, 2, 1, 1, 1, 0, 0}, 0.7);
  const FineSegmentation seg = fine_segment(0, f.map, f.points, f.cfg);
  CHECK(seg.subbin_counts == std::vector<std::uint32_t>{50, 45, 2, 1, 1, 1, 0, 0});
  CHECK(seg.ground_top_subbin == 1);
  std::vector<PointIndex> expect{95, 96, 97, 98, 99};
  auto got = seg.dynamic_points;
  std::sort(got.begin(), got.end());
  CHECK(got == expect);

  const FineCell flat = fine_cell({30}, 0.7);
  const FineSegmentation s0 = fine_segment(0, flat.map, flat.points, flat.cfg);
  CHECK(s0.ground_top_subbin == 0);
  CHECK(s0.dynamic_points.empty());

  const FineCell full = fine_cell({50, 45, 2, 1, 1, 1, 0, 0}, 1.0);
  const FineSegmentation s1 = fine_segment(0, full.map, full.points, full.cfg);
  CHECK(s1.ground_top_subbin == 5);
  CHECK(s1.dynamic_points.empty());
}

TEST_CASE("fine segmentation of an empty ground bin is an error") {
  const GridConfig cfg = fixtures::unit_grid(1, 1, 8);
  const std::vector<Point> pts{pt(0.5, 0.5, 3.5, 0)};
  const EncodedMatrix map = encode(pts, cfg, 0.0);
  CHECK_THROWS_AS(fine_segment(0, map, pts, cfg), Error);
}

TEST_CASE("raising the ratio never adds flags") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> counts(8);
    for (auto& c : counts) c = static_cast<int>(rng() % 20);
    counts[0] += 1;
    std::size_t prev = SIZE_MAX;
    for (double ratio : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      const FineCell f = fine_cell(counts, ratio);
      const auto seg = fine_segment(0, f.map, f.points, f.cfg);
      CHECK(seg.dynamic_points.size() <= prev);
      prev = seg.dynamic_points.size();
      for (PointIndex idx : seg.dynamic_points) {
        CHECK(static_cast<int>(std::floor(f.points[idx].z / 0.1)) > seg.ground_top_subbin);
      }
    }
  }
}

}
