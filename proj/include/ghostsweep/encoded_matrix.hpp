#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ghostsweep/grid_config.hpp"
#include "ghostsweep/point_cloud.hpp"

namespace ghostsweep {

enum class BucketMode { WordsOnly, WithBuckets };

/// Bit of a raw vertical bin after the encoding rules: negative bins own no bit (-1),
/// bins at or above n_bit fold into the top bit.
inline int fold_bin(std::int64_t raw_bin, int n_bit) {
  if (raw_bin < 0) return -1;
  if (raw_bin >= n_bit) return n_bit - 1;
  return static_cast<int>(raw_bin);
}

/// Low `bit` bits set.
inline std::uint64_t bits_below(int bit) {
  return bit >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bit) - 1;
}

/// N1 x N2 matrix of vertical-occupancy words. Bit k of a cell is set iff some point fell in
/// the k-th vertical bin above the cell's base height. Map matrices additionally keep, for
/// every occupied (cell, bit), the indices of the points that set it.
class EncodedMatrix {
 public:
  EncodedMatrix() = default;

  const GridConfig& config() const { return config_; }
  std::span<const std::uint64_t> words() const { return words_; }
  std::uint64_t word(std::size_t cell) const { return words_[cell]; }
  std::uint64_t word(CellIndex c) const { return words_[config_.linear(c)]; }
  std::span<const double> base_heights() const { return base_; }
  double base_height(std::size_t cell) const { return base_[cell]; }
  /// Points that set a bit in each cell.
  std::span<const std::uint32_t> point_counts() const { return counts_; }

  bool has_buckets() const { return mode_ == BucketMode::WithBuckets; }
  /// Point indices stored for (cell, bit); empty when the bit is clear or buckets are off.
  std::span<const PointIndex> bucket(std::size_t cell, int bit) const;

  /// Points under their column base (no bit set, never removable).
  std::size_t below_base() const { return below_base_; }
  /// Points outside the x/y extent of the grid.
  std::size_t out_of_bounds() const { return out_of_bounds_; }
  /// Points that set a bit.
  std::size_t encoded_points() const { return encoded_; }

  friend EncodedMatrix encode(std::span<const Point> points, const GridConfig& config,
                              std::span<const double> base, BucketMode mode);
  friend EncodedMatrix merge(const EncodedMatrix& a, const EncodedMatrix& b);

 private:
  GridConfig config_;
  BucketMode mode_ = BucketMode::WordsOnly;
  std::vector<std::uint64_t> words_;
  std::vector<double> base_;
  std::vector<std::uint32_t> counts_;
  // Buckets in CSR form. Buckets of one cell are contiguous in bit order, so the bucket id of
  // (cell, bit) is cell_bucket_begin_[cell] + popcount(word & bits_below(bit)).
  std::vector<std::uint32_t> cell_bucket_begin_;
  std::vector<std::uint32_t> bucket_begin_;
  std::vector<PointIndex> members_;
  std::size_t below_base_ = 0;
  std::size_t out_of_bounds_ = 0;
  std::size_t encoded_ = 0;
};

/// Binary-encodes points against per-cell base heights (`base.size()` must equal the cell count).
/// Buckets record each point's `index` field.
EncodedMatrix encode(std::span<const Point> points, const GridConfig& config,
                     std::span<const double> base, BucketMode mode = BucketMode::WithBuckets);

/// Same, with one constant base height for every column.
EncodedMatrix encode(std::span<const Point> points, const GridConfig& config, double base,
                     BucketMode mode = BucketMode::WithBuckets);

/// Bitwise-OR union of two matrices over identical geometry and base heights.
EncodedMatrix merge(const EncodedMatrix& a, const EncodedMatrix& b);

/// Cells holding at least one point, sorted.
std::vector<CellIndex> cells_overlapping(const ScanFrame& scan, const GridConfig& config);

/// Linear ids of the cells holding at least one point, sorted.
std::vector<std::size_t> footprint_cells(std::span<const Point> points, const GridConfig& config);

/// CSV of non-empty cells: i,j,word (hex),point_count.
void dump_words_csv(std::span<const std::uint64_t> words, std::span<const std::uint32_t> counts,
                    const GridConfig& config, std::ostream& out);

}  // namespace ghostsweep
