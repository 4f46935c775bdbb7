#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "cosmo_rul/types.hpp"

namespace cosmo_rul {

struct ForestConfig {
  int n_trees = 100;
  int max_features = 0;  // 0 selects ceil(d / 3)
  int min_samples_leaf = 5;
  int max_depth = 0;  // 0 is unlimited
  bool bootstrap = true;
  std::uint64_t seed = 0;
  // Worker threads for fitting. Results do not depend on this.
  int n_threads = 1;

  friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

// Flat node arrays. feature[i] < 0 marks a leaf whose prediction is value[i].
// Internal nodes send x[feature] <= threshold to left[i], the rest to right[i].
struct RegressionTree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;
  std::vector<std::size_t> n_samples;

  std::size_t num_nodes() const noexcept { return feature.size(); }
  std::size_t num_leaves() const noexcept;
  double predict(std::span<const double> x) const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

class Forest {
 public:
  Forest() = default;
  Forest(ForestConfig config, std::size_t input_dim, std::vector<RegressionTree> trees);

  const ForestConfig& config() const noexcept { return config_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

  double predict_row(std::span<const double> x) const;
  std::vector<double> predict(const FeatureMatrix& features) const;

  friend bool operator==(const Forest&, const Forest&) = default;

 private:
  ForestConfig config_;
  std::size_t input_dim_ = 0;
  std::vector<RegressionTree> trees_;
};

// Resolved max_features for input dimension d.
int effective_max_features(const ForestConfig& config, std::size_t d);

// Bagged CART regression trees with per-split feature subsampling. Tree t
// draws its bootstrap and feature subsets from derive_seed(config.seed, t).
Forest fit_forest(const FeatureMatrix& features, std::span<const double> targets,
                  const ForestConfig& config);

// JSON document with config, input dimension and node arrays. Doubles are
// written in shortest round-trip form so load(save(f)) == f.
void save_forest(std::ostream& out, const Forest& forest);
Forest load_forest(std::istream& in);
void save_forest(const std::filesystem::path& path, const Forest& forest);
Forest load_forest(const std::filesystem::path& path);

}  // namespace cosmo_rul
