#include "cosmo_rul/adapt.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "cosmo_rul/error.hpp"

namespace cosmo_rul {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const FeatureMatrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

FeatureMatrix from_eigen(const Eigen::MatrixXd& m) {
  FeatureMatrix out(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  Eigen::Map<RowMajor>(out.data().data(), m.rows(), m.cols()) = m;
  return out;
}

void check_finite(const FeatureMatrix& m, const char* what) {
  for (double v : m.data()) {
    if (!std::isfinite(v)) fail(ErrorCode::Numeric, std::string(what) + " contains a non-finite value");
  }
}

Eigen::MatrixXd cov_of(const FeatureMatrix& rows) {
  const auto x = view(rows);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(rows.rows() - 1);
}

// (C + eps I)^power through the symmetric eigendecomposition, eigenvalues
// clamped from below at eps.
Eigen::MatrixXd regularized_power(const Eigen::MatrixXd& c, double eps, double power) {
  Eigen::MatrixXd reg = c;
  reg.diagonal().array() += eps;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reg);
  if (solver.info() != Eigen::Success) fail(ErrorCode::Numeric, "covariance eigensolver failed");
  const Eigen::VectorXd lambda =
      solver.eigenvalues().cwiseMax(eps).array().pow(power).matrix();
  const auto& v = solver.eigenvectors();
  return v * lambda.asDiagonal() * v.transpose();
}

void check_side(const FeatureMatrix& m, const char* what, CoralTransform& t) {
  if (m.rows() < 2) {
    fail(ErrorCode::InvalidArgument,
         std::string(what) + " needs at least 2 rows for a covariance estimate");
  }
  check_finite(m, what);
  if (m.rows() < m.cols() + 1) {
    t.warnings.push_back(std::string(what) + " has " + std::to_string(m.rows()) + " rows for " +
                         std::to_string(m.cols()) +
                         " columns; covariance is rank deficient and relies on epsilon");
  }
}

}  // namespace

FeatureMatrix covariance(const FeatureMatrix& rows) {
  require(rows.rows() >= 2, "covariance needs at least 2 rows");
  check_finite(rows, "covariance input");
  return from_eigen(cov_of(rows));
}

CoralTransform fit_coral(const FeatureMatrix& source, const FeatureMatrix& target,
                         double epsilon) {
  require(epsilon > 0.0 && std::isfinite(epsilon), "CORAL epsilon must be positive");
  require(source.cols() >= 1, "CORAL needs at least one column");
  if (source.cols() != target.cols()) {
    fail(ErrorCode::InvalidArgument, "source has " + std::to_string(source.cols()) +
                                         " columns, target has " +
                                         std::to_string(target.cols()));
  }
  CoralTransform t;
  t.epsilon = epsilon;
  check_side(source, "source", t);
  check_side(target, "target", t);

  const Eigen::MatrixXd w = regularized_power(cov_of(source), epsilon, -0.5);
  const Eigen::MatrixXd r = regularized_power(cov_of(target), epsilon, 0.5);
  t.whitening = from_eigen(w);
  t.recoloring = from_eigen(r);
  t.combined = from_eigen(w * r);
  return t;
}

FeatureMatrix apply_coral(const CoralTransform& transform, const FeatureMatrix& rows) {
  if (rows.cols() != transform.dim()) {
    fail(ErrorCode::InvalidArgument, "CORAL transform expects " +
                                         std::to_string(transform.dim()) + " columns, got " +
                                         std::to_string(rows.cols()));
  }
  check_finite(rows, "CORAL input");
  if (rows.empty()) return FeatureMatrix(0, rows.cols());
  const RowMajor out = view(rows) * view(transform.combined);
  FeatureMatrix result(rows.rows(), rows.cols());
  Eigen::Map<RowMajor>(result.data().data(), out.rows(), out.cols()) = out;
  return result;
}

FeatureMatrix raw_baseline(std::span<const Sample> samples) {
  FeatureMatrix out(samples.size(), kNumFeatures);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    std::copy(samples[r].begin(), samples[r].end(), out.row(r).begin());
  }
  return out;
}

}  // namespace cosmo_rul
