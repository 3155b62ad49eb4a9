#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ghostsweep {

struct CellWord {
  std::size_t cell = 0;
  std::uint64_t word = 0;

  friend bool operator==(const CellWord&, const CellWord&) = default;
};

/// Sparse set of (cell, bit) voxels flagged potentially dynamic. Cells are sorted by linear
/// id and carry non-zero words.
struct DynamicMask {
  std::vector<CellWord> cells;

  bool empty() const { return cells.empty(); }
  std::size_t bit_count() const;
  /// Word of a cell, zero when absent.
  std::uint64_t word(std::size_t cell) const;
  /// Every set bit of this mask is also set in `other`.
  bool subset_of(const DynamicMask& other) const;

  friend bool operator==(const DynamicMask&, const DynamicMask&) = default;
};

}  // namespace ghostsweep
