// NEON variants for AArch64, where Advanced SIMD is architecturally guaranteed.

#include "ghostsweep/word_kernels.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace ghostsweep::simd {

#if defined(__aarch64__)
namespace {

inline std::uint64_t lane_popcount(uint64x2_t v) {
  return vaddvq_u8(vcntq_u8(vreinterpretq_u8_u64(v)));
}

void and_not_masked(const std::uint64_t* a, const std::uint64_t* b, const std::uint64_t* keep,
                    std::uint64_t* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const uint64x2_t v = vbicq_u64(vld1q_u64(a + i), vld1q_u64(b + i));
    vst1q_u64(out + i, vandq_u64(v, vld1q_u64(keep + i)));
  }
  for (; i < n; ++i) out[i] = a[i] & ~b[i] & keep[i];
}

void and_not(const std::uint64_t* a, const std::uint64_t* b, std::uint64_t* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_u64(out + i, vbicq_u64(vld1q_u64(a + i), vld1q_u64(b + i)));
  for (; i < n; ++i) out[i] = a[i] & ~b[i];
}

void or_into(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_u64(dst + i, vorrq_u64(vld1q_u64(dst + i), vld1q_u64(src + i)));
  for (; i < n; ++i) dst[i] |= src[i];
}

std::uint64_t popcount(const std::uint64_t* a, std::size_t n) {
  std::uint64_t total = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) total += lane_popcount(vld1q_u64(a + i));
  for (; i < n; ++i) total += static_cast<std::uint64_t>(__builtin_popcountll(a[i]));
  return total;
}

std::uint64_t count_outside(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  std::uint64_t total = 0;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) total += lane_popcount(vbicq_u64(vld1q_u64(a + i), vld1q_u64(b + i)));
  for (; i < n; ++i) total += static_cast<std::uint64_t>(__builtin_popcountll(a[i] & ~b[i]));
  return total;
}

constexpr KernelTable kNeon{Isa::Neon, and_not_masked, and_not, or_into, popcount, count_outside};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

#else

const KernelTable* neon_table() { return nullptr; }

#endif

}  // namespace ghostsweep::simd
