#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cosmo_rul/cosmo.hpp"
#include "cosmo_rul/types.hpp"

namespace testing {

// Fresh scratch directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("cosmo_rul_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline cosmo_rul::Sample random_sample(std::mt19937_64& rng, double lo = -50, double hi = 50) {
  std::uniform_real_distribution<double> u(lo, hi);
  cosmo_rul::Sample s{};
  for (auto& v : s) v = u(rng);
  return s;
}

inline cosmo_rul::ReferenceGroup group_of(std::vector<cosmo_rul::Sample> samples) {
  cosmo_rul::ReferenceGroup g;
  g.samples = std::move(samples);
  return g;
}

// Full sort of every distance, then the statistic straight off the sorted
// prefix. Deliberately naive.
inline double oracle_theta(double x, const std::vector<double>& column,
                           cosmo_rul::DistanceKind kind, int k) {
  std::vector<double> d;
  for (double c : column) d.push_back(std::abs(x - c));
  if (kind == cosmo_rul::DistanceKind::Mcp) {
    std::vector<double> sorted = column;
    std::sort(sorted.begin(), sorted.end());
    return std::abs(x - sorted[(sorted.size() - 1) / 2]);
  }
  std::sort(d.begin(), d.end());
  if (kind == cosmo_rul::DistanceKind::KnnMean) {
    double s = 0;
    for (int i = 0; i < k; ++i) s += d[i];
    return s / k;
  }
  if (k % 2 == 1) return d[k / 2];
  return (d[k / 2 - 1] + d[k / 2]) / 2.0;
}

}  // namespace testing
