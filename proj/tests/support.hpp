#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "areaest/grid.hpp"
#include "areaest/sampling.hpp"

namespace testing {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("areaest_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Hand-rolled generators for property tests. Each takes an explicit engine
// so a failing case can be replayed from its seed.
using Gen = std::mt19937_64;

inline int uniform_int(Gen& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }
inline double uniform_real(Gen& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }

inline areaest::GridHeader random_header(Gen& g, int max_side = 30) {
  areaest::GridHeader h;
  h.ncols = uniform_int(g, 1, max_side);
  h.nrows = uniform_int(g, 1, max_side);
  h.xll = uniform_real(g, 30.0, 45.0);
  h.yll = uniform_real(g, 5.0, 20.0);
  h.cellsize = uniform_real(g, 0.0001, 0.01);
  h.nodata = -9999;
  return h;
}

inline areaest::ClassGrid random_class_grid(Gen& g, int n_classes, double nodata_rate = 0.1, int max_side = 30) {
  auto h = random_header(g, max_side);
  std::vector<std::int32_t> cells(h.size());
  for (auto& c : cells)
    c = uniform_real(g, 0, 1) < nodata_rate ? -9999 : uniform_int(g, 0, n_classes - 1);
  return areaest::ClassGrid(h, std::move(cells));
}

// A 0/1 grid on a fixed header.
inline areaest::ClassGrid random_binary(Gen& g, const areaest::GridHeader& h, double p_one) {
  std::vector<std::int32_t> cells(h.size());
  for (auto& c : cells) c = uniform_real(g, 0, 1) < p_one ? 1 : 0;
  return areaest::ClassGrid(h, std::move(cells));
}

inline areaest::SampleRecord sample(std::int64_t id, std::int32_t stratum, std::optional<bool> r20,
                                    std::optional<bool> r21, areaest::GeoPoint at = {39.0, 13.0}) {
  areaest::SampleRecord s;
  s.id = id;
  s.stratum = stratum;
  s.ref_2020 = r20;
  s.ref_2021 = r21;
  s.location = at;
  return s;
}

}  // namespace testing
