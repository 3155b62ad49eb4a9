#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ghostsweep::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// Raw kernel table. Every variant must produce results identical to the scalar one.
struct KernelTable {
  Isa isa;
  /// out = a & ~b & keep
  void (*and_not_masked)(const std::uint64_t* a, const std::uint64_t* b, const std::uint64_t* keep,
                         std::uint64_t* out, std::size_t n);
  /// out = a & ~b
  void (*and_not)(const std::uint64_t* a, const std::uint64_t* b, std::uint64_t* out, std::size_t n);
  /// dst |= src
  void (*or_into)(std::uint64_t* dst, const std::uint64_t* src, std::size_t n);
  /// total set bits
  std::uint64_t (*popcount)(const std::uint64_t* a, std::size_t n);
  /// set bits of a not present in b, i.e. popcount(a & ~b)
  std::uint64_t (*count_outside)(const std::uint64_t* a, const std::uint64_t* b, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when not compiled in or unsupported by the running CPU.
const KernelTable* avx2_table();
const KernelTable* neon_table();

/// ISAs usable on this machine, scalar first.
std::vector<Isa> available_isas();

/// Bitwise operations over dense word matrices with runtime ISA selection.
class WordOps {
 public:
  /// Throws std::invalid_argument when the ISA is unavailable here.
  explicit WordOps(Isa isa);

  /// Widest available ISA unless GHOSTSWEEP_ISA=scalar|avx2|neon asks otherwise.
  static const WordOps& best();

  Isa isa() const { return table_->isa; }

  void and_not_masked(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                      std::span<const std::uint64_t> keep, std::span<std::uint64_t> out) const;
  void and_not(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
               std::span<std::uint64_t> out) const;
  void or_into(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src) const;
  std::uint64_t popcount(std::span<const std::uint64_t> a) const;
  std::uint64_t count_outside(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) const;

 private:
  const KernelTable* table_;
};

}  // namespace ghostsweep::simd
