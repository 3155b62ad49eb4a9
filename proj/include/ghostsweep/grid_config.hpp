#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>

#include "ghostsweep/point_cloud.hpp"

namespace ghostsweep {

struct CellIndex {
  std::size_t i = 0;
  std::size_t j = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Geometry of the vertical-occupancy grid plus every tunable threshold of the pipeline.
///
/// Cell (i, j) covers [x0 + i*res_g, x0 + (i+1)*res_g) x [y0 + j*res_g, ...). Bit k of a cell's
/// word covers heights [g + k*res_h, g + (k+1)*res_h) above that cell's base height g.
struct GridConfig {
  double res_g = 1.0;
  double res_h = 0.5;
  int n_bit = 64;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  /// Lowest map height; base of every column before ground extraction.
  double z_floor = 0.0;

  int mad_window_radius = 5;
  double ground_ratio = 0.7;
  int fine_factor = 8;
  double min_range = 0.5;
  double max_range = 80.0;

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;

  std::size_t cell_count() const { return n1 * n2; }
  std::size_t linear(CellIndex c) const { return c.i * n2 + c.j; }
  CellIndex cell(std::size_t linear_index) const { return {linear_index / n2, linear_index % n2}; }

  /// Low n_bit bits set.
  std::uint64_t word_mask() const {
    return n_bit >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_bit) - 1;
  }

  /// Cell containing (x, y), or nothing when outside the grid.
  std::optional<CellIndex> cell_of(double x, double y) const {
    const double fi = std::floor((x - origin_x) / res_g);
    const double fj = std::floor((y - origin_y) / res_g);
    if (fi < 0.0 || fj < 0.0 || fi >= static_cast<double>(n1) || fj >= static_cast<double>(n2)) {
      return std::nullopt;
    }
    return CellIndex{static_cast<std::size_t>(fi), static_cast<std::size_t>(fj)};
  }

  double cell_center_x(std::size_t i) const { return origin_x + (static_cast<double>(i) + 0.5) * res_g; }
  double cell_center_y(std::size_t j) const { return origin_y + (static_cast<double>(j) + 0.5) * res_g; }

  /// Vertical bin of height z over base g, before the below-base skip and top-bit fold.
  std::int64_t raw_bin(double z, double base) const {
    return static_cast<std::int64_t>(std::floor((z - base) / res_h));
  }

  /// True when both configs describe the same voxel geometry.
  bool same_geometry(const GridConfig& other) const;
};

/// Partial configuration; unset fields take defaults.
struct GridOverrides {
  std::optional<double> res_g;
  std::optional<double> res_h;
  std::optional<int> n_bit;
  std::optional<int> mad_window_radius;
  std::optional<double> ground_ratio;
  std::optional<int> fine_factor;
  std::optional<double> min_range;
  std::optional<double> max_range;
};

/// Anchors a grid on the map's bounding box: the origin is the box minimum floored to a
/// multiple of res_g and the dimensions cover the whole box.
GridConfig make_grid_config(const LabeledCloud& map_cloud, const GridOverrides& overrides = {});

}  // namespace ghostsweep
