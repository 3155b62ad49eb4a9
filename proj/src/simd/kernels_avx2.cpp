// AVX2 variants. Each function carries its own target attribute so the translation unit
// builds without -mavx2; avx2_table() only hands them out after a CPUID check.

#include "ghostsweep/word_kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define GHOSTSWEEP_HAVE_AVX2_KERNELS 1
#endif

namespace ghostsweep::simd {

#if defined(GHOSTSWEEP_HAVE_AVX2_KERNELS)
namespace {

#define AVX2_FN __attribute__((target("avx2,popcnt")))

AVX2_FN inline __m256i load(const std::uint64_t* p) {
  return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
}

AVX2_FN inline void store(std::uint64_t* p, __m256i v) {
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(p), v);
}

// Per-64-bit-lane popcount via nibble lookup (Mula et al.).
AVX2_FN inline __m256i popcount_lanes(__m256i v) {
  const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                       0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low = _mm256_set1_epi8(0x0f);
  const __m256i lo = _mm256_and_si256(v, low);
  const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low);
  const __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
  return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

AVX2_FN inline std::uint64_t hsum(__m256i acc) {
  return static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 0)) +
         static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 1)) +
         static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 2)) +
         static_cast<std::uint64_t>(_mm256_extract_epi64(acc, 3));
}

AVX2_FN void and_not_masked(const std::uint64_t* a, const std::uint64_t* b,
                            const std::uint64_t* keep, std::uint64_t* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // andnot(x, y) computes ~x & y
    const __m256i v = _mm256_andnot_si256(load(b + i), load(a + i));
    store(out + i, _mm256_and_si256(v, load(keep + i)));
  }
  for (; i < n; ++i) out[i] = a[i] & ~b[i] & keep[i];
}

AVX2_FN void and_not(const std::uint64_t* a, const std::uint64_t* b, std::uint64_t* out,
                     std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) store(out + i, _mm256_andnot_si256(load(b + i), load(a + i)));
  for (; i < n; ++i) out[i] = a[i] & ~b[i];
}

AVX2_FN void or_into(std::uint64_t* dst, const std::uint64_t* src, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) store(dst + i, _mm256_or_si256(load(dst + i), load(src + i)));
  for (; i < n; ++i) dst[i] |= src[i];
}

AVX2_FN std::uint64_t popcount(const std::uint64_t* a, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_epi64(acc, popcount_lanes(load(a + i)));
  std::uint64_t total = hsum(acc);
  for (; i < n; ++i) total += static_cast<std::uint64_t>(__builtin_popcountll(a[i]));
  return total;
}

AVX2_FN std::uint64_t count_outside(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_epi64(acc, popcount_lanes(_mm256_andnot_si256(load(b + i), load(a + i))));
  }
  std::uint64_t total = hsum(acc);
  for (; i < n; ++i) total += static_cast<std::uint64_t>(__builtin_popcountll(a[i] & ~b[i]));
  return total;
}

#undef AVX2_FN

constexpr KernelTable kAvx2{Isa::Avx2, and_not_masked, and_not, or_into, popcount, count_outside};

}  // namespace

const KernelTable* avx2_table() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("popcnt");
  return supported ? &kAvx2 : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace ghostsweep::simd
