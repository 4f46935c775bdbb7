#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "cosmo_rul/adapt.hpp"
#include "cosmo_rul/error.hpp"
#include "support.hpp"

using namespace cosmo_rul;

namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat to_eigen(const FeatureMatrix& m) {
  Mat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

FeatureMatrix from_eigen(const Mat& m) {
  FeatureMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
  return out;
}

// Independent covariance: centre with Eigen, X^T X / (n - 1).
Mat cov(const Mat& x) {
  const Mat c = x.rowwise() - x.colwise().mean();
  return (c.transpose() * c) / static_cast<double>(x.rows() - 1);
}

double rel_gap(const Mat& a, const Mat& b) { return (a - b).norm() / b.norm(); }

Mat random_rows(int n, int d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  Mat mix(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) mix(i, j) = g(rng) * scale;
  Mat x(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = g(rng) + 3.0 * j;
  return x * mix;
}

}  // namespace

TEST_CASE("covariance matches an independent computation") {
  const Mat x = random_rows(50, 5, 1);
  const FeatureMatrix c = covariance(from_eigen(x));
  CHECK(rel_gap(to_eigen(c), cov(x)) < 1e-12);
}

TEST_CASE("identical source and target keep the covariance") {
  const Mat x = random_rows(300, 24, 2, 3.0);
  const FeatureMatrix fx = from_eigen(x);
  const CoralTransform t = fit_coral(fx, fx);
  CHECK(t.warnings.empty());
  const Mat out = to_eigen(apply_coral(t, fx));
  CHECK(rel_gap(cov(out), cov(x)) < 1e-8);
}

TEST_CASE("target with 4x covariance") {
  const Mat s = random_rows(400, 10, 3, 2.0);
  const Mat t = 2.0 * random_rows(400, 10, 3, 2.0);  // same rows scaled: C_T = 4 C_S
  const CoralTransform tr = fit_coral(from_eigen(s), from_eigen(t));
  const Mat out = to_eigen(apply_coral(tr, from_eigen(s)));
  CHECK(rel_gap(cov(out), 4.0 * cov(s)) < 1e-6);
}

TEST_CASE("few rows warn but still fit") {
  const Mat s = random_rows(3, 24, 4);
  const Mat t = random_rows(50, 24, 5);
  const CoralTransform tr = fit_coral(from_eigen(s), from_eigen(t));
  CHECK_FALSE(tr.warnings.empty());
  CHECK(tr.dim() == 24);
  for (double v : tr.combined.data()) CHECK(std::isfinite(v));
  CHECK_THROWS_AS(fit_coral(from_eigen(random_rows(1, 24, 6)), from_eigen(t)), Error);
}

TEST_CASE("errors") {
  const Mat s = random_rows(40, 4, 7);
  FeatureMatrix bad = from_eigen(s);
  bad(3, 2) = std::nan("");
  CHECK_THROWS_AS(fit_coral(bad, from_eigen(s)), Error);
  CHECK_THROWS_AS(fit_coral(from_eigen(s), from_eigen(random_rows(40, 5, 8))), Error);
  const CoralTransform tr = fit_coral(from_eigen(s), from_eigen(s));
  CHECK_THROWS_AS(apply_coral(tr, FeatureMatrix(3, 5)), Error);
}

TEST_CASE("linear map: zero stays zero, sums are preserved") {
  const Mat s = random_rows(100, 6, 9);
  const Mat t = random_rows(100, 6, 10, 4.0);
  const CoralTransform tr = fit_coral(from_eigen(s), from_eigen(t));
  const FeatureMatrix zero = apply_coral(tr, FeatureMatrix(4, 6));
  for (double v : zero.data()) CHECK(v == 0.0);
  const Mat a = random_rows(5, 6, 11);
  const Mat b = random_rows(5, 6, 12);
  const Mat lhs = to_eigen(apply_coral(tr, from_eigen(a + b)));
  const Mat rhs = to_eigen(apply_coral(tr, from_eigen(a))) + to_eigen(apply_coral(tr, from_eigen(b)));
  CHECK(rel_gap(lhs, rhs) < 1e-12);
}

TEST_CASE("large epsilon and equal covariances are nearly the identity") {
  const Mat s = random_rows(200, 5, 13, 0.01);
  const CoralTransform tr = fit_coral(from_eigen(s), from_eigen(s), 1e6);
  const Mat x = random_rows(10, 5, 14);
  CHECK(rel_gap(to_eigen(apply_coral(tr, from_eigen(x))), x) < 1e-6);
}

TEST_CASE("alignment shrinks the covariance gap on random data") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Mat s = random_rows(150, 8, 100 + seed, 1.0);
    const Mat t = random_rows(150, 8, 200 + seed, 3.0);
    const Mat out = to_eigen(apply_coral(fit_coral(from_eigen(s), from_eigen(t)), from_eigen(s)));
    CHECK((cov(out) - cov(t)).norm() < (cov(s) - cov(t)).norm());
  }
}

TEST_CASE("raw baseline is the identity map") {
  std::mt19937_64 rng(15);
  std::vector<Sample> xs;
  for (int i = 0; i < 7; ++i) xs.push_back(testing::random_sample(rng));
  const FeatureMatrix m = raw_baseline(xs);
  REQUIRE(m.rows() == 7);
  REQUIRE(m.cols() == kNumFeatures);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < kNumFeatures; ++j) CHECK(m(i, j) == xs[i][j]);
  CHECK(raw_baseline(std::vector<Sample>{}).rows() == 0);
}
