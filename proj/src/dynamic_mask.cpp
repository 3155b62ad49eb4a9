#include "ghostsweep/dynamic_mask.hpp"

#include <algorithm>
#include <bit>

namespace ghostsweep {

std::size_t DynamicMask::bit_count() const {
  std::size_t n = 0;
  for (const auto& cw : cells) n += static_cast<std::size_t>(std::popcount(cw.word));
  return n;
}

std::uint64_t DynamicMask::word(std::size_t cell) const {
  const auto it = std::lower_bound(cells.begin(), cells.end(), cell,
                                   [](const CellWord& cw, std::size_t c) { return cw.cell < c; });
  return (it != cells.end() && it->cell == cell) ? it->word : 0;
}

bool DynamicMask::subset_of(const DynamicMask& other) const {
  return std::all_of(cells.begin(), cells.end(),
                     [&](const CellWord& cw) { return (cw.word & ~other.word(cw.cell)) == 0; });
}

}  // namespace ghostsweep
