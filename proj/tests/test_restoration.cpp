#include <cmath>
#include <limits>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "ghostsweep/removal.hpp"
#include "ghostsweep/restoration.hpp"
#include "oracles.hpp"

using namespace ghostsweep;
using fixtures::pt;

namespace {

Eigen::Vector3d center(long i, long j, long k) { return {i + 0.5, j + 0.5, k + 0.5}; }

std::vector<Eigen::Vector3i> as_sorted(const std::vector<Voxel>& vs) {
  std::vector<Eigen::Vector3i> out;
  for (const auto& v : vs) out.emplace_back(static_cast<int>(v.i), static_cast<int>(v.j), static_cast<int>(v.k));
  std::sort(out.begin(), out.end(), [](const Eigen::Vector3i& a, const Eigen::Vector3i& b) {
    return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
  });
  return out;
}

}  // namespace

TEST_SUITE("restoration") {

TEST_CASE("ray slope") {
  ScanFrame s;
  CHECK_THROWS_AS(max_ray_slope(s), Error);
  s.points = {pt(3, 4, 5)};
  CHECK(max_ray_slope(s) == 1.0);
  s.sensor_origin = Eigen::Vector3d(1, 1, 1);
  s.points = {pt(4, 5, 6), pt(1, 1, 9)};
  CHECK(max_ray_slope(s) == 1.0);
  s.points = {pt(1, 1, 9)};
  CHECK(max_ray_slope(s) == std::numeric_limits<double>::infinity());
}

TEST_CASE("height mask ceiling is ceil(k*s) metres above the sensor") {
  GridConfig cfg = fixtures::unit_grid(10, 1, 64);
  cfg.res_h = 0.5;
  const EncodedMatrix map = encode(std::vector<Point>{}, cfg, 0.0);
  ScanFrame s;
  s.sensor_origin = Eigen::Vector3d(0.0, 0.5, 0.0);
  s.points = {pt(3.0, 0.5, 3.0)};
  const std::vector<std::size_t> footprint{6};
  const VisibilityMask vm = height_mask(s, footprint, map, cfg);
  CHECK(vm.max_slope == 1.0);
  // Ceiling 7 m: bin 14 starts at 7.0 (kept), bin 15 at 7.5 (protected).
  CHECK(vm.protected_bits.word(6) == (cfg.word_mask() & ~bits_below(15)));
}

TEST_CASE("negative slope protects everything above the sensor") {
  GridConfig cfg = fixtures::unit_grid(10, 1, 16);
  const EncodedMatrix map = encode(std::vector<Point>{}, cfg, 0.0);
  ScanFrame s;
  s.sensor_origin = Eigen::Vector3d(0.5, 0.5, 2.0);
  for (int i = 1; i < 10; ++i) s.points.push_back(pt(i + 0.5, 0.5, 0.3));
  std::vector<std::size_t> footprint;
  for (std::size_t c = 0; c < 10; ++c) footprint.push_back(c);
  const VisibilityMask vm = height_mask(s, footprint, map, cfg);
  CHECK(vm.max_slope < 0.0);
  for (std::size_t c = 0; c < 10; ++c) {
    const std::uint64_t w = vm.protected_bits.word(c);
    for (int b = 0; b < 16; ++b) {
      if (b > 2) CHECK(((w >> b) & 1u) == 1u);
    }
  }
}

TEST_CASE("height mask is monotone in k and sound") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-3.0, 12.0), ub(-1.0, 1.0);
  GridConfig cfg = fixtures::unit_grid(1, 1, 32);
  cfg.res_h = 0.5;
  for (int trial = 0; trial < 2000; ++trial) {
    const double base = ub(rng);
    const double lo = u(rng), hi = lo + std::abs(u(rng));
    const std::uint64_t a = bits_above(hi, base, cfg), b = bits_above(lo, base, cfg);
    CHECK((a & ~b) == 0);
    for (int k = 0; k < 32; ++k) {
      if ((a >> k) & 1u) CHECK(base + k * cfg.res_h > hi);
    }
  }
}

TEST_CASE("reverse ray examples") {
  const GridConfig cfg = fixtures::unit_grid(8, 4, 8);
  const Eigen::Vector3d sensor = center(0, 0, 2);
  const EncodedMatrix occluded = fixtures::lattice(cfg, {{2, 0, 2}});
  CHECK(rvrc({4, 0, 2}, sensor, occluded) == RayVerdict::Blocked);
  const EncodedMatrix open = fixtures::lattice(cfg, {{2, 1, 2}, {4, 0, 2}, {0, 0, 2}});
  CHECK(rvrc({4, 0, 2}, sensor, open) == RayVerdict::Clear);
  CHECK(rvrc({1, 0, 2}, sensor, occluded) == RayVerdict::Clear);
  // Sensor beyond the grid: leaving the grid is clear, occupied voxels inside still block.
  const Eigen::Vector3d outside(-5.5, 0.5, 2.5);
  CHECK(rvrc({4, 0, 2}, outside, occluded) == RayVerdict::Blocked);
  CHECK(rvrc({4, 0, 2}, outside, fixtures::lattice(cfg, {})) == RayVerdict::Clear);
}

TEST_CASE("edge-only contacts are not pierced") {
  const GridConfig cfg = fixtures::unit_grid(4, 4, 4);
  const EncodedMatrix grid = fixtures::lattice(cfg, {{1, 0, 0}, {0, 1, 0}});
  CHECK(rvrc({2, 2, 0}, center(0, 0, 0), grid) == RayVerdict::Clear);
  CHECK(rvrc({2, 2, 0}, center(0, 0, 0), fixtures::lattice(cfg, {{1, 1, 0}})) == RayVerdict::Blocked);
}

TEST_CASE("traversal matches sampling and is direction-symmetric") {
  const GridConfig cfg = fixtures::unit_grid(16, 16, 16);
  const EncodedMatrix grid = fixtures::lattice(cfg, {});
  std::mt19937_64 rng(62);
  std::uniform_int_distribution<int> c(0, 15);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Vector3d a = center(c(rng), c(rng), c(rng));
    const Eigen::Vector3d b = center(c(rng), c(rng), c(rng));
    const auto fwd = ray_voxels(grid, a, b);
    auto back = ray_voxels(grid, b, a);
    std::reverse(back.begin(), back.end());
    CHECK(fwd == back);
    CHECK(as_sorted(fwd) == oracle::pierced(a, b));
  }
}

TEST_CASE("restore examples") {
  const GridConfig cfg = fixtures::unit_grid(12, 3, 8);
  std::vector<Point> map_pts;
  for (int i = 0; i < 12; ++i) map_pts.push_back(pt(i + 0.5, 1.5, 0.5, static_cast<PointIndex>(map_pts.size())));
  map_pts.push_back(pt(10.5, 1.5, 1.5, static_cast<PointIndex>(map_pts.size())));  // vacated, behind the wall
  map_pts.push_back(pt(3.5, 1.5, 1.5, static_cast<PointIndex>(map_pts.size())));   // vacated, in view
  const EncodedMatrix map = encode(map_pts, cfg, 0.0);

  ScanFrame scan;
  scan.sensor_origin = center(0, 1, 1);
  for (int i = 0; i < 12; ++i) scan.points.push_back(pt(i + 0.5, 1.5, 0.5));
  for (int k = 0; k < 5; ++k) scan.points.push_back(pt(6.5, 1.5, k + 0.5));
  const EncodedMatrix sm = encode(scan.points, cfg, map.base_heights(), BucketMode::WordsOnly);
  const auto footprint = footprint_cells(scan.points, cfg);
  const ScanContext ctx{scan, sm, map, footprint};

  const DynamicMask raw = compare(map, sm, footprint);
  CHECK(raw.bit_count() == 2);

  DecisionCache cache(cfg.cell_count());
  CHECK(restore(DynamicMask{}, ctx, &cache).mask.empty());
  const RestoreResult r = restore(raw, ctx, &cache);
  CHECK(r.mask.bit_count() == 1);
  CHECK(r.mask.word(3 * 3 + 1) == 0b10);
  CHECK(r.mask.subset_of(raw));
  CHECK(cache.status(10 * 3 + 1, 1) == DecisionCache::Status::Protected);
  CHECK(cache.status(3 * 3 + 1, 1) == DecisionCache::Status::Dynamic);

  // Occluded-only input: nothing survives and every bit is remembered as protected.
  DynamicMask hidden;
  hidden.cells = {{10 * 3 + 1, 0b10}};
  DecisionCache fresh(cfg.cell_count());
  const RestoreResult h = restore(hidden, ctx, &fresh);
  CHECK(h.mask.empty());
  CHECK(h.protected_bits == hidden);
  CHECK(fresh.protected_word(10 * 3 + 1) == 0b10);

  // Decided bits keep their status without recasting.
  const RestoreResult again = restore(raw, ctx, &cache);
  CHECK(again.stats.rvrc_blocked + again.stats.rvrc_clear == 0);
  CHECK(again.mask == r.mask);
}

TEST_CASE("cache keeps the first decision") {
  DecisionCache c(2);
  c.mark_dynamic(0, 0b01);
  c.mark_protected(0, 0b11);
  CHECK(c.status(0, 0) == DecisionCache::Status::Dynamic);
  CHECK(c.status(0, 1) == DecisionCache::Status::Protected);
  c.mark_dynamic(0, 0b10);
  CHECK(c.status(0, 1) == DecisionCache::Status::Protected);
  CHECK(c.status(1, 0) == DecisionCache::Status::Undecided);
}

TEST_CASE("restore only clears bits on fuzzed scenes") {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> uxy(0.0, 10.0), uz(-0.5, 6.0);
  GridConfig cfg = fixtures::unit_grid(10, 10, 12);
  cfg.res_h = 0.5;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Point> map_pts;
    for (PointIndex n = 0; n < 600; ++n) map_pts.push_back(pt(uxy(rng), uxy(rng), uz(rng), n));
    const EncodedMatrix map = encode(map_pts, cfg, 0.0);
    ScanFrame scan;
    scan.sensor_origin = Eigen::Vector3d(uxy(rng), uxy(rng), 1.0 + uz(rng) / 3.0);
    for (const auto& p : map_pts) {
      if (rng() % 3 == 0) scan.points.push_back(p);
    }
    if (scan.points.empty()) continue;
    const EncodedMatrix sm = encode(scan.points, cfg, map.base_heights(), BucketMode::WordsOnly);
    const auto footprint = footprint_cells(scan.points, cfg);
    const DynamicMask raw = compare(map, sm, footprint);
    DecisionCache cache(cfg.cell_count());
    const RestoreResult r = restore(raw, ScanContext{scan, sm, map, footprint}, trial % 2 ? &cache : nullptr);
    CHECK(r.mask.subset_of(raw));
    CHECK(r.mask.bit_count() + r.protected_bits.bit_count() == raw.bit_count());
  }
}

}
