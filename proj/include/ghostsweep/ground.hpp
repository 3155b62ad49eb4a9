#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ghostsweep/dynamic_mask.hpp"
#include "ghostsweep/encoded_matrix.hpp"
#include "ghostsweep/grid_config.hpp"

namespace ghostsweep {

/// Per-cell ground heights. `lowest` is the raw lowest point of each column (empty cells have
/// none); `g` is that height clamped into the robust band [l_min, l_max] of its neighbourhood.
struct GroundField {
  std::vector<std::optional<double>> lowest;
  std::vector<double> g;
  std::vector<double> l_min;
  std::vector<double> l_max;
};

/// Median with the two middle values averaged for even sizes. Reorders `values`.
double median_of(std::span<double> values);

struct MadBand {
  double median = 0.0;
  double mad = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// median +- 3 * MAD of the values. Reorders `values`.
MadBand mad_band(std::span<double> values);

/// Lowest z per cell from the raw map cloud.
std::vector<std::optional<double>> lowest_heights(std::span<const Point> points, const GridConfig& config);

/// Coarse ground extraction over a square window of `mad_window_radius` cells. Empty cells take
/// the window median; cells with a fully empty window fall back to `config.z_floor`.
GroundField coarse_ground(std::span<const std::optional<double>> lowest, const GridConfig& config);

/// Ground cells (bin 0 occupied in the map) whose next bin up is flagged in `mask`.
std::vector<std::size_t> select_csel(const DynamicMask& mask, const EncodedMatrix& map);

/// Smallest sub-bin t whose cumulative count from the bottom reaches ratio * total.
/// Returns 0 for an all-zero histogram.
int ground_top_subbin(std::span<const std::uint32_t> counts, double ratio);

struct FineSegmentation {
  std::vector<std::uint32_t> subbin_counts;
  int ground_top_subbin = 0;
  /// Bin-0 points above the ground surface.
  std::vector<PointIndex> dynamic_points;
};

/// Splits the ground bin of `cell` into fine_factor sub-bins and flags the sparse points above
/// the ground surface. `map_points[idx]` must be the point with index idx.
FineSegmentation fine_segment(std::size_t cell, const EncodedMatrix& map, std::span<const Point> map_points,
                              const GridConfig& config);

/// CSV: i,j,l_k,l_min,l_max,g_k (l_k empty for cells without points).
void dump_ground_csv(const GroundField& ground, const GridConfig& config, std::ostream& out);

}  // namespace ghostsweep
