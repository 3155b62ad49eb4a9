#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "ghostsweep/encoded_matrix.hpp"
#include "ghostsweep/grid_config.hpp"
#include "ghostsweep/point_cloud.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ghostsweep_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// n1 x n2 grid with unit cells and bins, origin 0.
inline ghostsweep::GridConfig unit_grid(std::size_t n1, std::size_t n2, int n_bit) {
  ghostsweep::GridConfig cfg;
  cfg.res_g = 1.0;
  cfg.res_h = 1.0;
  cfg.n_bit = n_bit;
  cfg.n1 = n1;
  cfg.n2 = n2;
  cfg.mad_window_radius = 1;
  return cfg;
}

inline ghostsweep::Point pt(double x, double y, double z, ghostsweep::PointIndex idx = 0,
                            ghostsweep::Label label = ghostsweep::Label::Unlabeled) {
  return {x, y, z, idx, label};
}

// Scan matrix over `cfg` holding the listed voxels (one point at each centre).
inline ghostsweep::EncodedMatrix lattice(const ghostsweep::GridConfig& cfg, const std::vector<std::array<long, 3>>& voxels) {
  std::vector<ghostsweep::Point> pts;
  for (const auto& v : voxels) {
    pts.push_back(pt(v[0] + 0.5, v[1] + 0.5, v[2] + 0.5, static_cast<ghostsweep::PointIndex>(pts.size())));
  }
  return ghostsweep::encode(pts, cfg, 0.0, ghostsweep::BucketMode::WordsOnly);
}

}  // namespace fixtures
