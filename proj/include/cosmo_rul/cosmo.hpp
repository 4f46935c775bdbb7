#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cosmo_rul/dataset.hpp"
#include "cosmo_rul/types.hpp"

namespace cosmo_rul {

inline constexpr std::size_t kDefaultReferenceSize = 80;
inline constexpr int kDefaultNeighbours = 8;

enum class PoolOrigin { Source, Target, Union };

// Peer population: a fixed bag of nominal samples drawn from one or both
// nominal pools.
struct ReferenceGroup {
  std::vector<Sample> samples;
  PoolOrigin origin = PoolOrigin::Source;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return samples.size(); }
};

// Which pools feed the reference group when fitting the regressor (first
// letter) and when predicting on target data (second letter).
struct ReferenceMode {
  enum class Fit { S, ST };
  enum class Predict { T, ST };

  Fit fit = Fit::ST;
  Predict predict = Predict::ST;

  // Accepts "S,T", "S,ST", "ST,ST", "ST,T" (also with '-' or '_' separators).
  static ReferenceMode parse(std::string_view text);
  static std::array<ReferenceMode, 4> all();
  std::string to_string(char separator = ',') const;

  friend bool operator==(const ReferenceMode&, const ReferenceMode&) = default;
};

enum class DistanceKind { KnnMean, MknnMedian, Mcp };

struct DistanceMethod {
  DistanceKind kind = DistanceKind::MknnMedian;
  int k = kDefaultNeighbours;  // ignored for Mcp

  // "knn", "mknn", "mcp"
  static DistanceMethod parse(std::string_view name, int k = kDefaultNeighbours);
  std::string_view name() const;
};

using FeatureVector = std::array<double, kNumFeatures>;

// Uniform draw of `size` distinct pool samples, deterministic in `seed`.
ReferenceGroup sample_reference_group(const NominalPool& pool, std::size_t size,
                                      std::uint64_t seed);

struct ModeGroups {
  ReferenceGroup fit;
  ReferenceGroup predict;
};

// Builds the fit-side and predict-side groups for `mode`. ST sides draw from
// the union of both pools. When both sides name the same pool the same group
// is returned for both.
ModeGroups build_mode_groups(ReferenceMode mode, const NominalPool& source,
                             const NominalPool& target, std::size_t size, std::uint64_t seed);

// Per-feature most central pattern: the lower median of each reference
// column, which minimizes the summed L1 distance to the column.
FeatureVector most_central_pattern(const ReferenceGroup& group);

// Per-feature peer distance of `x` to `group`:
//   knn_mean     mean of the k smallest |x_j - g_ij|
//   mknn_median  median of the k smallest |x_j - g_ij|
//   mcp          |x_j - c_j| with c the most central pattern
FeatureVector feature_vector(const Sample& x, const ReferenceGroup& group,
                             const DistanceMethod& method);

// Row i is feature_vector(samples[i], group, method).
FeatureMatrix feature_matrix(std::span<const Sample> samples, const ReferenceGroup& group,
                             const DistanceMethod& method);

// k <= group_size / n_conditions, evaluated without rounding.
bool check_k_condition(int k, std::size_t group_size, int n_conditions);

struct EigengapOptions {
  int max_k = 10;
  std::size_t max_samples = 500;
  std::uint64_t seed = 0;
};

// Estimates the number of operating conditions from the three setting
// columns with the eigengap heuristic on a Gaussian-similarity graph.
int estimate_num_conditions(std::span<const Sample> samples,
                            const EigengapOptions& options = {});

// Ascending eigenvalues of the symmetric normalized Laplacian used by
// estimate_num_conditions (exposed for diagnostics and tests).
std::vector<double> setting_laplacian_spectrum(std::span<const Sample> samples,
                                               const EigengapOptions& options = {});

}  // namespace cosmo_rul
