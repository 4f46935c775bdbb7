#pragma once

#include <span>
#include <string>
#include <vector>

#include "cosmo_rul/types.hpp"

namespace cosmo_rul {

inline constexpr double kDefaultCoralEpsilon = 1e-6;

// Second-order alignment x -> x * whitening * recoloring, with
// whitening = (C_S + eps I)^(-1/2) and recoloring = (C_T + eps I)^(1/2).
// Means are left untouched.
struct CoralTransform {
  FeatureMatrix whitening;
  FeatureMatrix recoloring;
  FeatureMatrix combined;  // whitening * recoloring
  double epsilon = kDefaultCoralEpsilon;
  // Non-fatal findings from fitting, e.g. fewer rows than columns.
  std::vector<std::string> warnings;

  std::size_t dim() const noexcept { return combined.cols(); }
};

// Unbiased sample covariance of the rows (n - 1 denominator).
FeatureMatrix covariance(const FeatureMatrix& rows);

CoralTransform fit_coral(const FeatureMatrix& source, const FeatureMatrix& target,
                         double epsilon = kDefaultCoralEpsilon);
FeatureMatrix apply_coral(const CoralTransform& transform, const FeatureMatrix& rows);

// Identity feature map: the 24 raw columns.
FeatureMatrix raw_baseline(std::span<const Sample> samples);

}  // namespace cosmo_rul
