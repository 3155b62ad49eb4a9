#include "ghostsweep/encoded_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cinttypes>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "ghostsweep/word_kernels.hpp"

namespace ghostsweep {

namespace {

constexpr std::uint32_t kNoCell = 0xFFFFFFFFu;

// Offsets of every occupied voxel's bucket, given the final words.
void build_bucket_offsets(std::span<const std::uint64_t> words, std::vector<std::uint32_t>& cell_begin) {
  cell_begin.assign(words.size() + 1, 0);
  std::uint64_t running = 0;
  for (std::size_t c = 0; c < words.size(); ++c) {
    cell_begin[c] = static_cast<std::uint32_t>(running);
    running += static_cast<std::uint64_t>(std::popcount(words[c]));
  }
  if (running > 0xFFFFFFFEu) throw Error("too many occupied voxels for 32-bit bucket offsets");
  cell_begin[words.size()] = static_cast<std::uint32_t>(running);
}

}  // namespace

std::span<const PointIndex> EncodedMatrix::bucket(std::size_t cell, int bit) const {
  if (mode_ != BucketMode::WithBuckets || bit < 0 || bit >= config_.n_bit) return {};
  const std::uint64_t w = words_[cell];
  if (!((w >> bit) & 1u)) return {};
  const std::size_t id = cell_bucket_begin_[cell] + static_cast<std::size_t>(std::popcount(w & bits_below(bit)));
  return std::span<const PointIndex>(members_).subspan(bucket_begin_[id], bucket_begin_[id + 1] - bucket_begin_[id]);
}

EncodedMatrix encode(std::span<const Point> points, const GridConfig& config, std::span<const double> base,
                     BucketMode mode) {
  config.validate();
  if (base.size() != config.cell_count()) {
    throw std::invalid_argument("base height array does not match grid dimensions");
  }
  EncodedMatrix m;
  m.config_ = config;
  m.mode_ = mode;
  m.words_.assign(config.cell_count(), 0);
  m.counts_.assign(config.cell_count(), 0);
  m.base_.assign(base.begin(), base.end());

  // Pass 1: words, counts and each point's voxel.
  std::vector<std::uint32_t> point_cell;
  std::vector<std::int8_t> point_bit;
  if (mode == BucketMode::WithBuckets) {
    point_cell.resize(points.size(), kNoCell);
    point_bit.resize(points.size(), -1);
  }
  for (std::size_t n = 0; n < points.size(); ++n) {
    const Point& p = points[n];
    const auto cell = config.cell_of(p.x, p.y);
    if (!cell) {
      ++m.out_of_bounds_;
      continue;
    }
    const std::size_t c = config.linear(*cell);
    const int bit = fold_bin(config.raw_bin(p.z, base[c]), config.n_bit);
    if (bit < 0) {
      ++m.below_base_;
      continue;
    }
    m.words_[c] |= std::uint64_t{1} << bit;
    ++m.counts_[c];
    ++m.encoded_;
    if (mode == BucketMode::WithBuckets) {
      point_cell[n] = static_cast<std::uint32_t>(c);
      point_bit[n] = static_cast<std::int8_t>(bit);
    }
  }
  if (mode == BucketMode::WordsOnly) return m;

  // Pass 2: counting sort of point indices into (cell, bit) buckets, file order preserved.
  build_bucket_offsets(m.words_, m.cell_bucket_begin_);
  const std::size_t n_buckets = m.cell_bucket_begin_.back();
  m.bucket_begin_.assign(n_buckets + 1, 0);
  auto bucket_id = [&](std::size_t n) {
    const std::uint32_t c = point_cell[n];
    return m.cell_bucket_begin_[c] + static_cast<std::size_t>(std::popcount(m.words_[c] & bits_below(point_bit[n])));
  };
  for (std::size_t n = 0; n < points.size(); ++n) {
    if (point_cell[n] != kNoCell) ++m.bucket_begin_[bucket_id(n) + 1];
  }
  for (std::size_t b = 0; b < n_buckets; ++b) m.bucket_begin_[b + 1] += m.bucket_begin_[b];
  m.members_.resize(m.encoded_);
  std::vector<std::uint32_t> cursor(m.bucket_begin_.begin(), m.bucket_begin_.end() - 1);
  for (std::size_t n = 0; n < points.size(); ++n) {
    if (point_cell[n] != kNoCell) m.members_[cursor[bucket_id(n)]++] = points[n].index;
  }
  return m;
}

EncodedMatrix encode(std::span<const Point> points, const GridConfig& config, double base, BucketMode mode) {
  const std::vector<double> flat(config.cell_count(), base);
  return encode(points, config, flat, mode);
}

EncodedMatrix merge(const EncodedMatrix& a, const EncodedMatrix& b) {
  if (!a.config_.same_geometry(b.config_)) throw Error("merge: grid configurations differ");
  if (a.base_ != b.base_) throw Error("merge: base height fields differ");
  if (a.mode_ != b.mode_) throw Error("merge: bucket modes differ");

  EncodedMatrix m;
  m.config_ = a.config_;
  m.mode_ = a.mode_;
  m.base_ = a.base_;
  m.words_ = a.words_;
  simd::WordOps::best().or_into(m.words_, b.words_);
  m.counts_ = a.counts_;
  for (std::size_t c = 0; c < m.counts_.size(); ++c) m.counts_[c] += b.counts_[c];
  m.below_base_ = a.below_base_ + b.below_base_;
  m.out_of_bounds_ = a.out_of_bounds_ + b.out_of_bounds_;
  m.encoded_ = a.encoded_ + b.encoded_;
  if (m.mode_ == BucketMode::WordsOnly) return m;

  build_bucket_offsets(m.words_, m.cell_bucket_begin_);
  m.bucket_begin_.clear();
  m.bucket_begin_.reserve(m.cell_bucket_begin_.back() + 1);
  m.bucket_begin_.push_back(0);
  m.members_.clear();
  m.members_.reserve(m.encoded_);
  for (std::size_t c = 0; c < m.words_.size(); ++c) {
    for (std::uint64_t w = m.words_[c]; w != 0; w &= w - 1) {
      const int bit = std::countr_zero(w);
      const auto from_a = a.bucket(c, bit);
      const auto from_b = b.bucket(c, bit);
      m.members_.insert(m.members_.end(), from_a.begin(), from_a.end());
      m.members_.insert(m.members_.end(), from_b.begin(), from_b.end());
      m.bucket_begin_.push_back(static_cast<std::uint32_t>(m.members_.size()));
    }
  }
  return m;
}

std::vector<std::size_t> footprint_cells(std::span<const Point> points, const GridConfig& config) {
  std::vector<std::size_t> cells;
  cells.reserve(points.size() / 4 + 1);
  for (const auto& p : points) {
    if (const auto c = config.cell_of(p.x, p.y)) cells.push_back(config.linear(*c));
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

std::vector<CellIndex> cells_overlapping(const ScanFrame& scan, const GridConfig& config) {
  const auto linear = footprint_cells(scan.points, config);
  std::vector<CellIndex> out;
  out.reserve(linear.size());
  for (std::size_t c : linear) out.push_back(config.cell(c));
  return out;
}

void dump_words_csv(std::span<const std::uint64_t> words, std::span<const std::uint32_t> counts,
                    const GridConfig& config, std::ostream& out) {
  out << "i,j,word,point_count\n";
  char hex[24];
  for (std::size_t c = 0; c < words.size(); ++c) {
    if (words[c] == 0) continue;
    const CellIndex ij = config.cell(c);
    std::snprintf(hex, sizeof(hex), "0x%016" PRIx64, words[c]);
    out << ij.i << ',' << ij.j << ',' << hex << ',' << (counts.empty() ? 0u : counts[c]) << '\n';
  }
}

}  // namespace ghostsweep
