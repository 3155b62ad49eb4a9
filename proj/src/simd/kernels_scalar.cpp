#include <bit>

#include "ghostsweep/word_kernels.hpp"

namespace ghostsweep::simd {
namespace {

void and_not_masked(const std::uint64_t* a, const std::uint64_t* b, const std::uint64_t* keep,
                    std::uint64_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] & ~b[i] & keep[i];
}

void and_not(const std::uint64_t* a, const std::uint64_t* b, std::uint64_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] & ~b[i];
}

void or_into(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] |= src[i];
}

std::uint64_t popcount(const std::uint64_t* a, std::size_t n) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i]));
  return total;
}

std::uint64_t count_outside(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i] & ~b[i]));
  return total;
}

constexpr KernelTable kScalar{Isa::Scalar, and_not_masked, and_not, or_into, popcount, count_outside};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace ghostsweep::simd
