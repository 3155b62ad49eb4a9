#include <random>
#include <sstream>

#include <doctest.h>

#include "fixtures.hpp"
#include "ghostsweep/encoded_matrix.hpp"
#include "ghostsweep/grid_config.hpp"
#include "oracles.hpp"

using namespace ghostsweep;
using fixtures::pt;

namespace {

GridConfig small_grid(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(1, 8), bits(1, 16);
  const double res[] = {0.25, 0.5, 1.0, 0.3, 0.7};
  GridConfig cfg;
  cfg.res_g = res[rng() % 5];
  cfg.res_h = res[rng() % 5];
  cfg.n_bit = bits(rng);
  cfg.n1 = static_cast<std::size_t>(dim(rng));
  cfg.n2 = static_cast<std::size_t>(dim(rng));
  cfg.origin_x = -1.0;
  cfg.origin_y = 2.0;
  return cfg;
}

std::vector<Point> random_points(const GridConfig& cfg, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(cfg.origin_x - 1.0, cfg.origin_x + cfg.n1 * cfg.res_g + 1.0);
  std::uniform_real_distribution<double> uy(cfg.origin_y - 1.0, cfg.origin_y + cfg.n2 * cfg.res_g + 1.0);
  std::uniform_real_distribution<double> uz(-2.0, cfg.n_bit * cfg.res_h + 3.0);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(pt(ux(rng), uy(rng), uz(rng), static_cast<PointIndex>(i)));
  return pts;
}

}  // namespace

TEST_SUITE("grid_encoding") {

TEST_CASE("make_grid_config floors the origin and covers the box") {
  LabeledCloud c;
  c.points = {pt(0.3, 0.3, 0), pt(9.7, 4.2, 1)};
  const GridConfig cfg = make_grid_config(c);
  CHECK(cfg.origin_x == 0.0);
  CHECK(cfg.n1 == 10);
  CHECK(cfg.res_g == 1.0);
  CHECK(cfg.res_h == 0.5);
  CHECK(cfg.n_bit == 64);
  CHECK(cfg.mad_window_radius == 5);
  CHECK(cfg.ground_ratio == 0.7);
  CHECK(cfg.fine_factor == 8);

  GridOverrides o;
  o.res_g = 0.5;
  const GridConfig indoor = make_grid_config(c, o);
  CHECK(indoor.res_g == 0.5);
  CHECK(indoor.mad_window_radius == 10);

  o.res_g = 0.0;
  CHECK_THROWS(make_grid_config(c, o));
  LabeledCloud flat;
  flat.points = {pt(1, 0, 0), pt(1, 5, 0)};
  CHECK_THROWS_AS(make_grid_config(flat), Error);
  CHECK_THROWS_AS(make_grid_config(LabeledCloud{}), Error);
}

TEST_CASE("config validation") {
  GridConfig cfg = fixtures::unit_grid(2, 2, 8);
  CHECK_NOTHROW(cfg.validate());
  cfg.n_bit = 65;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = fixtures::unit_grid(2, 2, 8);
  cfg.fine_factor = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = fixtures::unit_grid(2, 2, 8);
  cfg.ground_ratio = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("encode examples") {
  GridConfig cfg = fixtures::unit_grid(1, 1, 8);
  EncodedMatrix m = encode(std::vector<Point>{pt(0.5, 0.5, 0.2, 0), pt(0.5, 0.5, 2.5, 1)}, cfg, 0.0);
  CHECK(m.word(0) == 0b101);

  cfg.n_bit = 4;
  m = encode(std::vector<Point>{pt(0.5, 0.5, 7.5, 0)}, cfg, 0.0);
  CHECK(m.word(0) == 0b1000);

  m = encode(std::vector<Point>{pt(0.5, 0.5, -1.5, 0), pt(3.0, 0.5, 1.0, 1)}, cfg, 0.0);
  CHECK(m.word(0) == 0);
  CHECK(m.below_base() == 1);
  CHECK(m.out_of_bounds() == 1);
}

TEST_CASE("buckets mirror words and conserve points") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const GridConfig cfg = small_grid(rng);
    const auto pts = random_points(cfg, 300, rng);
    const EncodedMatrix m = encode(pts, cfg, 0.25);
    std::size_t bucketed = 0;
    std::vector<std::uint64_t> decoded(cfg.cell_count(), 0);
    for (std::size_t c = 0; c < cfg.cell_count(); ++c) {
      for (int b = 0; b < cfg.n_bit; ++b) {
        const auto members = m.bucket(c, b);
        if (!members.empty()) decoded[c] |= std::uint64_t{1} << b;
        bucketed += members.size();
        CHECK(members.empty() == (((m.word(c) >> b) & 1u) == 0));
      }
    }
    CHECK(std::equal(decoded.begin(), decoded.end(), m.words().begin()));
    CHECK(bucketed + m.below_base() + m.out_of_bounds() == pts.size());
    CHECK(bucketed == m.encoded_points());
  }
}

TEST_CASE("encode matches the naive voxelizer with per-cell bases") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> ub(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const GridConfig cfg = small_grid(rng);
    const auto pts = random_points(cfg, 200, rng);
    std::vector<double> base(cfg.cell_count());
    for (auto& b : base) b = ub(rng);
    const EncodedMatrix m = encode(pts, cfg, base, BucketMode::WordsOnly);
    const auto expect = oracle::voxelize(pts, cfg, base);
    CHECK(std::equal(expect.words.begin(), expect.words.end(), m.words().begin()));
    CHECK(m.below_base() == expect.below_base);
    CHECK(m.out_of_bounds() == expect.out_of_bounds);
  }
}

TEST_CASE("union homomorphism and merge") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const GridConfig cfg = small_grid(rng);
    const auto pts = random_points(cfg, 400, rng);
    const std::size_t cut = rng() % pts.size();
    const std::vector<Point> a(pts.begin(), pts.begin() + static_cast<long>(cut));
    const std::vector<Point> b(pts.begin() + static_cast<long>(cut), pts.end());
    const EncodedMatrix whole = encode(pts, cfg, 0.0);
    const EncodedMatrix merged = merge(encode(a, cfg, 0.0), encode(b, cfg, 0.0));
    CHECK(std::equal(whole.words().begin(), whole.words().end(), merged.words().begin()));
    CHECK(std::equal(whole.point_counts().begin(), whole.point_counts().end(), merged.point_counts().begin()));
    for (std::size_t c = 0; c < cfg.cell_count(); ++c) {
      for (int bit = 0; bit < cfg.n_bit; ++bit) {
        auto x = whole.bucket(c, bit), y = merged.bucket(c, bit);
        std::vector<PointIndex> xs(x.begin(), x.end()), ys(y.begin(), y.end());
        std::sort(xs.begin(), xs.end());
        std::sort(ys.begin(), ys.end());
        CHECK(xs == ys);
      }
    }
    const EncodedMatrix same = merge(whole, encode(std::vector<Point>{}, cfg, 0.0));
    CHECK(std::equal(whole.words().begin(), whole.words().end(), same.words().begin()));
  }
}

TEST_CASE("merge rejects mismatched grids") {
  GridConfig a = fixtures::unit_grid(2, 2, 8);
  GridConfig b = a;
  b.res_g = 0.5;
  const std::vector<Point> none;
  CHECK_THROWS_AS(merge(encode(none, a, 0.0), encode(none, b, 0.0)), Error);
  CHECK_THROWS_AS(merge(encode(none, a, 0.0), encode(none, a, 1.0)), Error);
}

TEST_CASE("encode is deterministic") {
  std::mt19937_64 rng(24);
  const GridConfig cfg = small_grid(rng);
  const auto pts = random_points(cfg, 500, rng);
  const EncodedMatrix x = encode(pts, cfg, 0.0), y = encode(pts, cfg, 0.0);
  CHECK(std::equal(x.words().begin(), x.words().end(), y.words().begin()));
}

TEST_CASE("footprint cells") {
  const GridConfig cfg = fixtures::unit_grid(8, 8, 8);
  ScanFrame s;
  CHECK(cells_overlapping(s, cfg).empty());
  s.points = {pt(3.5, 4.5, 0)};
  CHECK(cells_overlapping(s, cfg) == std::vector<CellIndex>{{3, 4}});
  s.points.push_back(pt(3.1, 4.9, 2));
  CHECK(cells_overlapping(s, cfg).size() == 1);
  s.points.push_back(pt(-3, 4.9, 2));
  CHECK(footprint_cells(s.points, cfg) == std::vector<std::size_t>{3 * 8 + 4});
}

TEST_CASE("word dump is hexadecimal per non-empty cell") {
  const GridConfig cfg = fixtures::unit_grid(2, 2, 16);
  const EncodedMatrix m = encode(std::vector<Point>{pt(1.5, 0.5, 0.5, 0), pt(1.5, 0.5, 10.5, 1)}, cfg, 0.0);
  std::ostringstream out;
  dump_words_csv(m.words(), m.point_counts(), cfg, out);
  CHECK(out.str().find("1,0,0x0000000000000401,2") != std::string::npos);
}

}
