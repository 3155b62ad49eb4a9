#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ghostsweep/dynamic_mask.hpp"
#include "ghostsweep/encoded_matrix.hpp"
#include "ghostsweep/restoration.hpp"

namespace ghostsweep {

/// Module switches; turning both off leaves plain matrix comparison.
struct PipelineOptions {
  /// Fine segmentation of ground cells under a dynamic bin.
  bool ground_module = true;
  /// Height mask, range band and reverse ray casting.
  bool static_restoration = true;
  /// Remember ray verdicts across scans. Requires scans in sequence order.
  bool use_cache = true;
};

/// Potential-dynamic voxels of one scan: map & ~scan over the footprint cells only.
DynamicMask compare(const EncodedMatrix& map, const EncodedMatrix& scan, std::span<const std::size_t> footprint);

struct ScanStats {
  std::int64_t sequence_id = 0;
  std::size_t scan_points = 0;
  std::size_t footprint_cells = 0;
  std::size_t raw_bits = 0;
  std::size_t restored_bits = 0;
  std::size_t confirmed_bits = 0;
  std::size_t csel_cells = 0;
  std::size_t fine_flags = 0;
  std::size_t flagged_points_total = 0;
  double max_slope = 0.0;
  double elapsed_ms = 0.0;
  RestoreStats restore;
};

/// What a single scan contributes, independent of the accumulated state.
struct ScanDetection {
  DynamicMask raw;
  DynamicMask confirmed;
  DynamicMask protected_bits;
  std::vector<PointIndex> fine_flags;
  ScanStats stats;
};

/// Runs encode -> compare -> restore -> fine ground segmentation for one scan. `cache` may be
/// null; when given it is consulted and updated.
ScanDetection detect_scan(const ScanFrame& scan, const EncodedMatrix& map, std::span<const Point> map_points,
                          const PipelineOptions& options, DecisionCache* cache);

/// Accumulated removal state over a sequence of scans.
class RemovalState {
 public:
  /// `map_points` must be the cloud `map` was encoded from, with index == position.
  RemovalState(const EncodedMatrix& map, std::span<const Point> map_points, PipelineOptions options = {});

  /// Processes the next scan. Sequence ids must not decrease; re-presenting the latest id is allowed.
  const ScanStats& process_scan(const ScanFrame& scan);

  /// Same, also returning the scan's own detection (for debug dumps).
  ScanDetection process_scan_detailed(const ScanFrame& scan);

  bool is_flagged(PointIndex idx) const { return flagged_[idx] != 0; }
  std::size_t flag_capacity() const { return flagged_.size(); }
  std::size_t flagged_count() const { return flagged_count_; }
  /// Indices flagged dynamic, ascending.
  std::vector<PointIndex> flagged_points() const;
  /// Union of confirmed dynamic (cell, bit) voxels over all scans.
  DynamicMask confirmed_mask() const;
  const std::vector<ScanStats>& history() const { return history_; }
  const DecisionCache& cache() const { return cache_; }
  const PipelineOptions& options() const { return options_; }

 private:
  void flag(PointIndex idx);

  const EncodedMatrix& map_;
  std::span<const Point> map_points_;
  PipelineOptions options_;
  DecisionCache cache_;
  std::vector<std::uint64_t> confirmed_;
  std::vector<std::uint8_t> flagged_;
  std::size_t flagged_count_ = 0;
  std::optional<std::int64_t> last_sequence_;
  std::vector<ScanStats> history_;
};

struct Partition {
  LabeledCloud static_cloud;
  LabeledCloud dynamic_cloud;
};

/// Splits the map by the flagged set, preserving input order within each part.
Partition finalize(const RemovalState& state, const LabeledCloud& cloud);

}  // namespace ghostsweep
