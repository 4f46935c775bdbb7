#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "cosmo_rul/cosmo.hpp"
#include "cosmo_rul/error.hpp"
#include "random.hpp"

namespace cosmo_rul {

namespace {

using Setting = std::array<double, kNumSettings>;

std::vector<Setting> settings_for_graph(std::span<const Sample> samples,
                                        const EigengapOptions& options) {
  require(!samples.empty(), "eigengap needs at least one sample");
  require(options.max_k >= 2, "eigengap max_k must be >= 2");
  require(options.max_samples >= 2, "eigengap max_samples must be >= 2");

  std::vector<Setting> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples) {
    Setting p{s[0], s[1], s[2]};
    for (double v : p) {
      if (!std::isfinite(v)) fail(ErrorCode::Numeric, "non-finite operating setting");
    }
    pts.push_back(p);
  }
  // Sorting first makes the subsample independent of input row order.
  std::sort(pts.begin(), pts.end());
  if (pts.size() > options.max_samples) {
    detail::Engine rng(derive_seed(options.seed, 0xE16));
    auto idx = detail::sample_without_replacement(pts.size(), options.max_samples, rng);
    std::sort(idx.begin(), idx.end());
    std::vector<Setting> picked;
    picked.reserve(idx.size());
    for (std::size_t i : idx) picked.push_back(pts[i]);
    pts = std::move(picked);
  }
  return pts;
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// Ascending eigenvalues of the symmetric normalized Laplacian.
std::vector<double> spectrum(const std::vector<Setting>& pts, int max_k) {
  const std::size_t n = pts.size();
  Eigen::MatrixXd dist(n, n);
  double min_positive = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    dist(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < kNumSettings; ++c) {
        const double d = pts[i][c] - pts[j][c];
        s += d * d;
      }
      const double d = std::sqrt(s);
      dist(i, j) = dist(j, i) = d;
      if (d > 0.0) min_positive = std::min(min_positive, d);
    }
  }

  // Local scale: median distance to the K-th nearest neighbour.
  std::size_t kth = (n + 2 * static_cast<std::size_t>(max_k) - 1) /
                    (2 * static_cast<std::size_t>(max_k));
  kth = std::clamp<std::size_t>(kth, 1, n - 1);
  std::vector<double> kth_dist(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = dist(i, j);
    // row contains the zero self-distance at rank 0
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(kth), row.end());
    kth_dist[i] = row[kth];
  }
  double sigma = median_of(kth_dist);
  if (!(sigma > 0.0)) sigma = std::isfinite(min_positive) ? min_positive / 4.0 : 1.0;

  const double inv = 1.0 / (2.0 * sigma * sigma);
  Eigen::MatrixXd w = (-(dist.array().square()) * inv).exp().matrix();
  const Eigen::VectorXd deg = w.rowwise().sum();
  const Eigen::VectorXd dinv = deg.array().rsqrt().matrix();
  Eigen::MatrixXd lap = -(dinv.asDiagonal() * w * dinv.asDiagonal());
  lap.diagonal().array() += 1.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorCode::Numeric, "Laplacian eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

}  // namespace

std::vector<double> setting_laplacian_spectrum(std::span<const Sample> samples,
                                               const EigengapOptions& options) {
  const auto pts = settings_for_graph(samples, options);
  return spectrum(pts, options.max_k);
}

int estimate_num_conditions(std::span<const Sample> samples, const EigengapOptions& options) {
  const auto pts = settings_for_graph(samples, options);
  if (std::adjacent_find(pts.begin(), pts.end(), std::not_equal_to<>()) == pts.end()) return 1;
  const auto ev = spectrum(pts, options.max_k);

  const std::size_t last = std::min<std::size_t>(static_cast<std::size_t>(options.max_k),
                                                 ev.size()) - 1;
  int best = 1;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m <= last; ++m) {
    const double gap = ev[m] - ev[m - 1];
    if (gap > best_gap) {
      best_gap = gap;
      best = static_cast<int>(m);
    }
  }
  return best;
}

}  // namespace cosmo_rul
