#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ghostsweep/log.hpp"
#include "ghostsweep/word_kernels.hpp"

namespace ghostsweep::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

namespace {

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return &scalar_table();
    case Isa::Avx2: return avx2_table();
    case Isa::Neon: return neon_table();
  }
  return nullptr;
}

void check_same(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("word span length mismatch");
}

}  // namespace

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::Scalar};
  if (avx2_table()) out.push_back(Isa::Avx2);
  if (neon_table()) out.push_back(Isa::Neon);
  return out;
}

WordOps::WordOps(Isa isa) : table_(table_for(isa)) {
  if (!table_) {
    throw std::invalid_argument("ISA " + std::string(isa_name(isa)) + " not available");
  }
}

const WordOps& WordOps::best() {
  static const WordOps ops = [] {
    Isa pick = available_isas().back();
    if (const char* env = std::getenv("GHOSTSWEEP_ISA")) {
      const std::string want = env;
      bool found = false;
      for (Isa isa : available_isas()) {
        if (isa_name(isa) == want) {
          pick = isa;
          found = true;
        }
      }
      if (!found) log().warn("GHOSTSWEEP_ISA={} unavailable, using {}", want, isa_name(pick));
    }
    log().debug("word kernels: {}", isa_name(pick));
    return WordOps(pick);
  }();
  return ops;
}

void WordOps::and_not_masked(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                             std::span<const std::uint64_t> keep, std::span<std::uint64_t> out) const {
  check_same(a.size(), b.size());
  check_same(a.size(), keep.size());
  check_same(a.size(), out.size());
  table_->and_not_masked(a.data(), b.data(), keep.data(), out.data(), a.size());
}

void WordOps::and_not(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                      std::span<std::uint64_t> out) const {
  check_same(a.size(), b.size());
  check_same(a.size(), out.size());
  table_->and_not(a.data(), b.data(), out.data(), a.size());
}

void WordOps::or_into(std::span<std::uint64_t> dst, std::span<const std::uint64_t> src) const {
  check_same(dst.size(), src.size());
  table_->or_into(dst.data(), src.data(), dst.size());
}

std::uint64_t WordOps::popcount(std::span<const std::uint64_t> a) const {
  return table_->popcount(a.data(), a.size());
}

std::uint64_t WordOps::count_outside(std::span<const std::uint64_t> a,
                                     std::span<const std::uint64_t> b) const {
  check_same(a.size(), b.size());
  return table_->count_outside(a.data(), b.data(), a.size());
}

}  // namespace ghostsweep::simd
