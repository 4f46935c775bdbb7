#include "cosmo_rul/cosmo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "cosmo_rul/error.hpp"
#include "random.hpp"

namespace cosmo_rul {

namespace {

std::uint64_t origin_stream(PoolOrigin origin) {
  switch (origin) {
    case PoolOrigin::Source: return 1;
    case PoolOrigin::Target: return 2;
    case PoolOrigin::Union: return 3;
  }
  return 0;
}

void check_method(const DistanceMethod& method, std::size_t group_size) {
  if (group_size == 0) fail(ErrorCode::InvalidArgument, "reference group is empty");
  if (method.kind == DistanceKind::Mcp) return;
  if (method.k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (static_cast<std::size_t>(method.k) > group_size) {
    fail(ErrorCode::InvalidArgument, "k = " + std::to_string(method.k) +
                                         " exceeds reference group size " +
                                         std::to_string(group_size));
  }
}

void check_finite(const Sample& x) {
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorCode::Numeric, "sample contains a non-finite value");
  }
}

// Column-major copy of the reference group plus MCP centers, shared by all
// rows of a feature matrix.
class ReferenceColumns {
 public:
  ReferenceColumns(const ReferenceGroup& group, const DistanceMethod& method)
      : n_(group.size()), method_(method), columns_(kNumFeatures * n_), scratch_(n_) {
    for (std::size_t i = 0; i < n_; ++i) {
      check_finite(group.samples[i]);
      for (std::size_t j = 0; j < kNumFeatures; ++j) columns_[j * n_ + i] = group.samples[i][j];
    }
    if (method.kind == DistanceKind::Mcp) centers_ = most_central_pattern(group);
  }

  FeatureVector distances(const Sample& x) {
    FeatureVector theta{};
    if (method_.kind == DistanceKind::Mcp) {
      for (std::size_t j = 0; j < kNumFeatures; ++j) theta[j] = std::abs(x[j] - centers_[j]);
      return theta;
    }
    const auto k = static_cast<std::size_t>(method_.k);
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      const double* col = columns_.data() + j * n_;
      for (std::size_t i = 0; i < n_; ++i) scratch_[i] = std::abs(x[j] - col[i]);
      // k smallest, ascending; tied values are interchangeable.
      std::partial_sort(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(k),
                        scratch_.end());
      if (method_.kind == DistanceKind::KnnMean) {
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) sum += scratch_[i];
        theta[j] = sum / static_cast<double>(k);
      } else if (k % 2 == 1) {
        theta[j] = scratch_[k / 2];
      } else {
        theta[j] = (scratch_[k / 2 - 1] + scratch_[k / 2]) / 2.0;
      }
    }
    return theta;
  }

 private:
  std::size_t n_;
  DistanceMethod method_;
  std::vector<double> columns_;
  std::vector<double> scratch_;
  FeatureVector centers_{};
};

}  // namespace

ReferenceMode ReferenceMode::parse(std::string_view text) {
  std::string norm(text);
  std::replace(norm.begin(), norm.end(), '-', ',');
  std::replace(norm.begin(), norm.end(), '_', ',');
  std::transform(norm.begin(), norm.end(), norm.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  norm.erase(std::remove(norm.begin(), norm.end(), ' '), norm.end());
  if (!norm.empty() && norm.front() == '(' && norm.back() == ')') {
    norm = norm.substr(1, norm.size() - 2);
  }
  if (norm == "S,T") return {Fit::S, Predict::T};
  if (norm == "S,ST") return {Fit::S, Predict::ST};
  if (norm == "ST,ST") return {Fit::ST, Predict::ST};
  if (norm == "ST,T") return {Fit::ST, Predict::T};
  fail(ErrorCode::InvalidArgument, "unknown reference mode '" + std::string(text) + "'");
}

std::array<ReferenceMode, 4> ReferenceMode::all() {
  return {ReferenceMode{Fit::S, Predict::T}, ReferenceMode{Fit::S, Predict::ST},
          ReferenceMode{Fit::ST, Predict::ST}, ReferenceMode{Fit::ST, Predict::T}};
}

std::string ReferenceMode::to_string(char separator) const {
  std::string out = fit == Fit::S ? "S" : "ST";
  out += separator;
  out += predict == Predict::T ? "T" : "ST";
  return out;
}

DistanceMethod DistanceMethod::parse(std::string_view name, int k) {
  if (name != "mcp") require(k >= 1, "k must be >= 1");
  if (name == "knn" || name == "knn_mean") return {DistanceKind::KnnMean, k};
  if (name == "mknn" || name == "m-knn" || name == "mknn_median") {
    return {DistanceKind::MknnMedian, k};
  }
  if (name == "mcp") return {DistanceKind::Mcp, k};
  fail(ErrorCode::InvalidArgument, "unknown distance method '" + std::string(name) + "'");
}

std::string_view DistanceMethod::name() const {
  switch (kind) {
    case DistanceKind::KnnMean: return "knn";
    case DistanceKind::MknnMedian: return "mknn";
    case DistanceKind::Mcp: return "mcp";
  }
  return "?";
}

ReferenceGroup sample_reference_group(const NominalPool& pool, std::size_t size,
                                      std::uint64_t seed) {
  require(size >= 1, "reference group size must be >= 1");
  if (pool.size() < size) {
    fail(ErrorCode::InvalidArgument, "nominal pool has " + std::to_string(pool.size()) +
                                         " samples, reference group needs " +
                                         std::to_string(size));
  }
  detail::Engine rng(seed);
  ReferenceGroup group;
  group.seed = seed;
  group.samples.reserve(size);
  for (std::size_t i : detail::sample_without_replacement(pool.size(), size, rng)) {
    group.samples.push_back(pool.samples[i]);
  }
  return group;
}

ModeGroups build_mode_groups(ReferenceMode mode, const NominalPool& source,
                             const NominalPool& target, std::size_t size, std::uint64_t seed) {
  // Every mode touches both pools: the fit side always includes H_S and the
  // predict side always includes H_T.
  if (source.size() == 0) {
    fail(ErrorCode::InvalidArgument, "mode " + mode.to_string() + " needs a source pool");
  }
  if (target.size() == 0) {
    fail(ErrorCode::InvalidArgument, "mode " + mode.to_string() + " needs a target pool");
  }

  NominalPool both{source.samples, source.tau};
  both.samples.insert(both.samples.end(), target.samples.begin(), target.samples.end());

  auto draw = [&](PoolOrigin origin) {
    const NominalPool& pool = origin == PoolOrigin::Source   ? source
                              : origin == PoolOrigin::Target ? target
                                                             : both;
    ReferenceGroup g = sample_reference_group(pool, size, derive_seed(seed, origin_stream(origin)));
    g.origin = origin;
    return g;
  };

  const PoolOrigin fit_origin =
      mode.fit == ReferenceMode::Fit::S ? PoolOrigin::Source : PoolOrigin::Union;
  const PoolOrigin predict_origin =
      mode.predict == ReferenceMode::Predict::T ? PoolOrigin::Target : PoolOrigin::Union;

  ModeGroups groups{draw(fit_origin), {}};
  groups.predict = predict_origin == fit_origin ? groups.fit : draw(predict_origin);
  return groups;
}

FeatureVector most_central_pattern(const ReferenceGroup& group) {
  if (group.size() == 0) fail(ErrorCode::InvalidArgument, "reference group is empty");
  FeatureVector center{};
  std::vector<double> column(group.size());
  const std::size_t mid = (group.size() - 1) / 2;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    for (std::size_t i = 0; i < group.size(); ++i) column[i] = group.samples[i][j];
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(mid),
                     column.end());
    center[j] = column[mid];
  }
  return center;
}

FeatureVector feature_vector(const Sample& x, const ReferenceGroup& group,
                             const DistanceMethod& method) {
  check_method(method, group.size());
  check_finite(x);
  ReferenceColumns columns(group, method);
  return columns.distances(x);
}

FeatureMatrix feature_matrix(std::span<const Sample> samples, const ReferenceGroup& group,
                             const DistanceMethod& method) {
  require(!samples.empty(), "feature_matrix needs at least one sample");
  check_method(method, group.size());
  ReferenceColumns columns(group, method);
  FeatureMatrix out(samples.size(), kNumFeatures);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    try {
      check_finite(samples[r]);
    } catch (const Error& e) {
      fail(e.code(), "row " + std::to_string(r) + ": " + e.what());
    }
    const FeatureVector theta = columns.distances(samples[r]);
    std::copy(theta.begin(), theta.end(), out.row(r).begin());
  }
  return out;
}

bool check_k_condition(int k, std::size_t group_size, int n_conditions) {
  require(k > 0 && group_size > 0 && n_conditions > 0,
          "k-condition arguments must be positive");
  // k <= |group| / n  <=>  k * n <= |group| for positive integers.
  return static_cast<unsigned long long>(k) * static_cast<unsigned long long>(n_conditions) <=
         group_size;
}

}  // namespace cosmo_rul
