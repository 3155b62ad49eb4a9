#include "ghostsweep/removal.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <string>

#include "ghostsweep/ground.hpp"
#include "ghostsweep/word_kernels.hpp"

namespace ghostsweep {

DynamicMask compare(const EncodedMatrix& map, const EncodedMatrix& scan, std::span<const std::size_t> footprint) {
  if (!map.config().same_geometry(scan.config())) throw Error("compare: scan and map grids differ");
  DynamicMask out;
  if (footprint.empty()) return out;

  // Run the bitwise kernel over the contiguous row band covering the footprint.
  const std::size_t n2 = map.config().n2;
  const std::size_t first = (footprint.front() / n2) * n2;
  const std::size_t last = std::min((footprint.back() / n2 + 1) * n2, map.words().size());
  const std::size_t len = last - first;
  std::vector<std::uint64_t> keep(len, 0);
  for (std::size_t c : footprint) keep[c - first] = ~std::uint64_t{0};
  std::vector<std::uint64_t> dyn(len);
  simd::WordOps::best().and_not_masked(map.words().subspan(first, len), scan.words().subspan(first, len), keep,
                                       dyn);
  for (std::size_t c : footprint) {
    if (const std::uint64_t w = dyn[c - first]) out.cells.push_back({c, w});
  }
  return out;
}

ScanDetection detect_scan(const ScanFrame& scan, const EncodedMatrix& map, std::span<const Point> map_points,
                          const PipelineOptions& options, DecisionCache* cache) {
  const auto t0 = std::chrono::steady_clock::now();
  const GridConfig& cfg = map.config();
  ScanDetection det;
  det.stats.sequence_id = scan.sequence_id;
  det.stats.scan_points = scan.points.size();

  const EncodedMatrix scan_matrix = encode(scan.points, cfg, map.base_heights(), BucketMode::WordsOnly);
  const std::vector<std::size_t> footprint = footprint_cells(scan.points, cfg);
  det.stats.footprint_cells = footprint.size();
  det.raw = compare(map, scan_matrix, footprint);
  det.stats.raw_bits = det.raw.bit_count();

  if (options.static_restoration && !scan.points.empty()) {
    RestoreResult restored = restore(det.raw, ScanContext{scan, scan_matrix, map, footprint}, cache);
    det.confirmed = std::move(restored.mask);
    det.protected_bits = std::move(restored.protected_bits);
    det.stats.restore = restored.stats;
    det.stats.restored_bits = restored.stats.restored_bits();
    det.stats.max_slope = restored.max_slope;
  } else {
    det.confirmed = det.raw;
  }
  det.stats.confirmed_bits = det.confirmed.bit_count();

  if (options.ground_module) {
    const auto csel = select_csel(det.confirmed, map);
    det.stats.csel_cells = csel.size();
    for (std::size_t c : csel) {
      const FineSegmentation fine = fine_segment(c, map, map_points, cfg);
      det.fine_flags.insert(det.fine_flags.end(), fine.dynamic_points.begin(), fine.dynamic_points.end());
    }
    det.stats.fine_flags = det.fine_flags.size();
  }
  det.stats.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return det;
}

RemovalState::RemovalState(const EncodedMatrix& map, std::span<const Point> map_points, PipelineOptions options)
    : map_(map),
      map_points_(map_points),
      options_(options),
      confirmed_(map.config().cell_count(), 0),
      flagged_(map_points.size(), 0) {
  if (!map.has_buckets()) throw Error("removal needs a map matrix with point buckets");
  for (std::size_t n = 0; n < map_points.size(); ++n) {
    if (map_points[n].index != n) {
      throw Error("map point indices must equal their positions (index " + std::to_string(map_points[n].index) +
                  " at position " + std::to_string(n) + ")");
    }
  }
  if (options_.use_cache) cache_ = DecisionCache(map.config().cell_count());
}

void RemovalState::flag(PointIndex idx) {
  if (!flagged_[idx]) {
    flagged_[idx] = 1;
    ++flagged_count_;
  }
}

ScanDetection RemovalState::process_scan_detailed(const ScanFrame& scan) {
  if (options_.use_cache && last_sequence_ && scan.sequence_id < *last_sequence_) {
    throw Error("scan " + std::to_string(scan.sequence_id) + " arrived after scan " +
                std::to_string(*last_sequence_) + "; cached restoration requires sequence order");
  }
  last_sequence_ = last_sequence_ ? std::max(*last_sequence_, scan.sequence_id) : scan.sequence_id;

  const auto t0 = std::chrono::steady_clock::now();
  ScanDetection det = detect_scan(scan, map_, map_points_, options_, options_.use_cache ? &cache_ : nullptr);
  for (const CellWord& cw : det.confirmed.cells) {
    const std::uint64_t fresh = cw.word & ~confirmed_[cw.cell];
    for (std::uint64_t w = fresh; w != 0; w &= w - 1) {
      for (PointIndex idx : map_.bucket(cw.cell, std::countr_zero(w))) flag(idx);
    }
    confirmed_[cw.cell] |= cw.word;
  }
  for (PointIndex idx : det.fine_flags) flag(idx);
  det.stats.flagged_points_total = flagged_count_;
  det.stats.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  history_.push_back(det.stats);
  return det;
}

const ScanStats& RemovalState::process_scan(const ScanFrame& scan) {
  process_scan_detailed(scan);
  return history_.back();
}

std::vector<PointIndex> RemovalState::flagged_points() const {
  std::vector<PointIndex> out;
  out.reserve(flagged_count_);
  for (std::size_t n = 0; n < flagged_.size(); ++n) {
    if (flagged_[n]) out.push_back(static_cast<PointIndex>(n));
  }
  return out;
}

DynamicMask RemovalState::confirmed_mask() const {
  DynamicMask out;
  for (std::size_t c = 0; c < confirmed_.size(); ++c) {
    if (confirmed_[c]) out.cells.push_back({c, confirmed_[c]});
  }
  return out;
}

Partition finalize(const RemovalState& state, const LabeledCloud& cloud) {
  Partition part;
  part.static_cloud.source_path = cloud.source_path;
  part.dynamic_cloud.source_path = cloud.source_path;
  for (const Point& p : cloud.points) {
    if (p.index >= state.flag_capacity()) throw Error("finalize: point index outside the removal state");
    (state.is_flagged(p.index) ? part.dynamic_cloud : part.static_cloud).points.push_back(p);
  }
  return part;
}

}  // namespace ghostsweep
