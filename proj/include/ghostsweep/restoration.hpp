#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ghostsweep/dynamic_mask.hpp"
#include "ghostsweep/encoded_matrix.hpp"

namespace ghostsweep {

/// Voxel (i, j, k): column (i, j), vertical bin k above that column's base. May lie outside
/// the grid for sensors that sit beyond the map extent.
struct Voxel {
  std::int64_t i = 0;
  std::int64_t j = 0;
  std::int64_t k = 0;

  friend bool operator==(const Voxel&, const Voxel&) = default;
};

Eigen::Vector3d voxel_center(const Voxel& v, const EncodedMatrix& grid);

/// Voxel containing `p`, or nothing when p is outside the grid's x/y extent. The bin is not
/// folded: it can be negative or exceed n_bit.
std::optional<Voxel> voxel_of(const Eigen::Vector3d& p, const EncodedMatrix& grid);

// ---------------------------------------------------------------------------
// Field-of-view height mask

/// Largest z/r over the scan points taken relative to the sensor (r = horizontal range).
/// Points directly above or below the sensor are ignored; +inf when none remain.
double max_ray_slope(const ScanFrame& scan);

/// Bits of a column whose bin bottom (base + b * res_h) lies strictly above `ceiling_z`.
std::uint64_t bits_above(double ceiling_z, double base, const GridConfig& config);

struct VisibilityMask {
  double max_slope = 0.0;
  /// Per footprint cell, the bits above the scan's viewing ceiling there.
  DynamicMask protected_bits;
};

/// The ceiling of each footprint cell sits ceil(k * s) metres above the sensor, where s is the
/// horizontal distance from the sensor to the cell centre.
VisibilityMask height_mask(const ScanFrame& scan, std::span<const std::size_t> footprint,
                           const EncodedMatrix& map, const GridConfig& config);

// ---------------------------------------------------------------------------
// Reverse virtual ray casting

/// Voxels pierced by the segment from -> to, in order, clipped to the grid's x/y extent.
/// Columns are walked with a 2D DDA; within each column the bins spanned by the segment are
/// listed in travel direction. Voxels the segment only touches on an edge or corner are skipped.
std::vector<Voxel> ray_voxels(const EncodedMatrix& grid, const Eigen::Vector3d& from, const Eigen::Vector3d& to);

enum class RayVerdict { Blocked, Clear };

/// Casts a ray from the centre of `v` to the sensor's voxel centre (or to the sensor origin when
/// it lies outside the grid). Blocked when any voxel strictly between the two is occupied in
/// `scan`; only bins 0..n_bit-1 can be occupied.
RayVerdict rvrc(const Voxel& v, const Eigen::Vector3d& sensor_origin, const EncodedMatrix& scan);

// ---------------------------------------------------------------------------
// Restoration

/// Tri-state memory per (cell, bit): undecided, protected (occluded by a previous scan) or
/// dynamic (seen vacant by a previous scan).
class DecisionCache {
 public:
  enum class Status { Undecided, Protected, Dynamic };

  DecisionCache() = default;
  explicit DecisionCache(std::size_t cells) : protected_(cells, 0), dynamic_(cells, 0) {}

  std::size_t cells() const { return protected_.size(); }
  Status status(std::size_t cell, int bit) const;
  std::uint64_t protected_word(std::size_t cell) const { return protected_[cell]; }
  std::uint64_t dynamic_word(std::size_t cell) const { return dynamic_[cell]; }
  void mark_protected(std::size_t cell, std::uint64_t bits);
  void mark_dynamic(std::size_t cell, std::uint64_t bits);

  friend bool operator==(const DecisionCache&, const DecisionCache&) = default;

 private:
  std::vector<std::uint64_t> protected_;
  std::vector<std::uint64_t> dynamic_;
};

struct RestoreStats {
  std::size_t raw_bits = 0;
  std::size_t cached_dynamic = 0;
  std::size_t cached_protected = 0;
  std::size_t height_protected = 0;
  std::size_t range_protected = 0;
  std::size_t rvrc_blocked = 0;
  std::size_t rvrc_clear = 0;

  std::size_t restored_bits() const { return cached_protected + height_protected + range_protected + rvrc_blocked; }
};

struct RestoreResult {
  DynamicMask mask;
  /// Raw bits cleared by this call.
  DynamicMask protected_bits;
  RestoreStats stats;
  double max_slope = 0.0;
};

struct ScanContext {
  const ScanFrame& scan;
  /// The scan encoded with the map's geometry and base heights.
  const EncodedMatrix& scan_matrix;
  const EncodedMatrix& map;
  std::span<const std::size_t> footprint;
};

/// Clears raw dynamic bits the scan could not have observed: bits outside the sensor's range
/// band, bits above the height mask and bits whose reverse ray is blocked. Bits already decided
/// in `cache` keep their status without recasting; new ray verdicts are recorded in it.
/// `cache` may be null for cache-free operation.
RestoreResult restore(const DynamicMask& raw, const ScanContext& ctx, DecisionCache* cache);

}  // namespace ghostsweep
