#include "cosmo_rul/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "cosmo_rul/error.hpp"
#include "random.hpp"

namespace cosmo_rul {

namespace {

using Json = nlohmann::json;
using Index = std::uint32_t;

constexpr std::string_view kFormat = "cosmo_rul-forest";
constexpr int kFormatVersion = 1;

// Training data shared by every tree: column-major features and, per feature,
// all row indices sorted by (x, y).
struct TrainingSet {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<std::vector<double>> columns;
  std::vector<double> y;
  std::vector<std::vector<Index>> sorted;
};

TrainingSet make_training_set(const FeatureMatrix& features, std::span<const double> targets) {
  TrainingSet ts;
  ts.n = features.rows();
  ts.d = features.cols();
  ts.y.assign(targets.begin(), targets.end());
  ts.columns.assign(ts.d, std::vector<double>(ts.n));
  for (std::size_t r = 0; r < ts.n; ++r) {
    for (std::size_t j = 0; j < ts.d; ++j) ts.columns[j][r] = features(r, j);
  }
  ts.sorted.resize(ts.d);
  for (std::size_t j = 0; j < ts.d; ++j) {
    auto& idx = ts.sorted[j];
    idx.resize(ts.n);
    std::iota(idx.begin(), idx.end(), Index{0});
    const auto& x = ts.columns[j];
    std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
      if (x[a] != x[b]) return x[a] < x[b];
      return ts.y[a] < ts.y[b];
    });
  }
  return ts;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
  std::size_t n_left = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& ts, const ForestConfig& config, int max_features,
              std::uint64_t seed)
      : ts_(ts), config_(config), max_features_(max_features), rng_(seed),
        goes_left_(ts.n, 0) {}

  RegressionTree build() {
    std::vector<std::size_t> count(ts_.n, 0);
    if (config_.bootstrap) {
      for (std::size_t i = 0; i < ts_.n; ++i) ++count[detail::uniform_index(rng_, ts_.n)];
    } else {
      std::fill(count.begin(), count.end(), 1);
    }
    // Each feature's bag list inherits the (x, y) order of the presorted rows,
    // so the tree depends only on the multiset of drawn rows.
    order_.resize(ts_.d);
    for (std::size_t j = 0; j < ts_.d; ++j) {
      auto& o = order_[j];
      o.clear();
      o.reserve(ts_.n);
      for (Index r : ts_.sorted[j]) o.insert(o.end(), count[r], r);
    }
    buffer_.resize(order_[0].size());
    inv_.resize(order_[0].size() + 1);
    for (std::size_t i = 1; i < inv_.size(); ++i) inv_[i] = 1.0 / static_cast<double>(i);
    features_.resize(ts_.d);
    std::iota(features_.begin(), features_.end(), 0);
    grow(0, order_[0].size(), 0);
    return std::move(tree_);
  }

 private:
  int add_node(double value, std::size_t n) {
    tree_.feature.push_back(-1);
    tree_.threshold.push_back(0.0);
    tree_.left.push_back(-1);
    tree_.right.push_back(-1);
    tree_.value.push_back(value);
    tree_.n_samples.push_back(n);
    return static_cast<int>(tree_.feature.size() - 1);
  }

  int grow(std::size_t lo, std::size_t hi, int depth) {
    const std::size_t n = hi - lo;
    const auto& rows = order_[0];
    double sum = 0.0;
    double y_min = ts_.y[rows[lo]];
    double y_max = y_min;
    for (std::size_t i = lo; i < hi; ++i) {
      const double v = ts_.y[rows[i]];
      sum += v;
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
    const int node = add_node(sum / static_cast<double>(n), n);

    const auto leaf = static_cast<std::size_t>(config_.min_samples_leaf);
    if (n < 2 * leaf || y_min == y_max) return node;
    if (config_.max_depth > 0 && depth >= config_.max_depth) return node;

    const Split best = find_split(lo, hi, sum);
    if (best.feature < 0) return node;

    const auto& x = ts_.columns[static_cast<std::size_t>(best.feature)];
    for (std::size_t i = lo; i < hi; ++i) {
      const Index r = order_[0][i];
      goes_left_[r] = x[r] <= best.threshold ? 1 : 0;
    }
    for (auto& o : order_) {
      std::size_t l = lo;
      std::size_t b = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        if (goes_left_[o[i]]) {
          o[l++] = o[i];
        } else {
          buffer_[b++] = o[i];
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(b),
                o.begin() + static_cast<std::ptrdiff_t>(l));
    }

    const std::size_t mid = lo + best.n_left;
    tree_.feature[node] = best.feature;
    tree_.threshold[node] = best.threshold;
    const int left = grow(lo, mid, depth + 1);
    tree_.left[node] = left;
    const int right = grow(mid, hi, depth + 1);
    tree_.right[node] = right;
    return node;
  }

  // Maximizes sL^2/nL + sR^2/nR, which minimizes the children's summed
  // squared deviations. Features are visited in random order until
  // max_features non-constant ones have been examined.
  Split find_split(std::size_t lo, std::size_t hi, double total) {
    Split best;
    const auto leaf = static_cast<std::size_t>(config_.min_samples_leaf);
    const std::size_t n = hi - lo;
    int examined = 0;
    for (std::size_t k = 0; k < features_.size() && examined < max_features_; ++k) {
      std::swap(features_[k],
                features_[k + detail::uniform_index(rng_, features_.size() - k)]);
      const int f = features_[k];
      const auto& o = order_[static_cast<std::size_t>(f)];
      const auto& x = ts_.columns[static_cast<std::size_t>(f)];
      if (x[o[lo]] == x[o[hi - 1]]) continue;
      ++examined;

      double s_left = 0.0;
      for (std::size_t i = lo; i + 1 < hi; ++i) {
        s_left += ts_.y[o[i]];
        const std::size_t n_left = i - lo + 1;
        const std::size_t n_right = n - n_left;
        if (n_right < leaf) break;
        if (n_left < leaf) continue;
        const double a = x[o[i]];
        const double b = x[o[i + 1]];
        if (a == b) continue;
        const double s_right = total - s_left;
        const double score = s_left * s_left * inv_[n_left] + s_right * s_right * inv_[n_right];
        double threshold = a + (b - a) * 0.5;
        if (threshold >= b) threshold = a;
        const bool better =
            best.feature < 0 || score > best.score ||
            (score == best.score &&
             (f < best.feature || (f == best.feature && threshold < best.threshold)));
        if (better) best = {f, threshold, score, n_left};
      }
    }
    return best;
  }

  const TrainingSet& ts_;
  const ForestConfig& config_;
  int max_features_;
  detail::Engine rng_;
  std::vector<std::vector<Index>> order_;
  std::vector<Index> buffer_;
  std::vector<double> inv_;  // inv_[i] = 1 / i
  std::vector<char> goes_left_;
  std::vector<int> features_;
  RegressionTree tree_;
};

void check_config(const ForestConfig& c) {
  require(c.n_trees >= 1, "n_trees must be >= 1");
  require(c.max_features >= 0, "max_features must be >= 0");
  require(c.min_samples_leaf >= 1, "min_samples_leaf must be >= 1");
  require(c.max_depth >= 0, "max_depth must be >= 0");
  require(c.n_threads >= 1, "n_threads must be >= 1");
}

Json config_to_json(const ForestConfig& c) {
  return Json{{"n_trees", c.n_trees},
              {"max_features", c.max_features},
              {"min_samples_leaf", c.min_samples_leaf},
              {"max_depth", c.max_depth},
              {"bootstrap", c.bootstrap},
              {"seed", c.seed},
              {"n_threads", c.n_threads}};
}

ForestConfig config_from_json(const Json& j) {
  ForestConfig c;
  c.n_trees = j.at("n_trees").get<int>();
  c.max_features = j.at("max_features").get<int>();
  c.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.bootstrap = j.at("bootstrap").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.n_threads = j.value("n_threads", 1);
  check_config(c);
  return c;
}

void check_tree(const RegressionTree& t, std::size_t input_dim) {
  const std::size_t n = t.feature.size();
  if (n == 0 || t.threshold.size() != n || t.left.size() != n || t.right.size() != n ||
      t.value.size() != n || t.n_samples.size() != n) {
    fail(ErrorCode::Structure, "forest file: inconsistent node arrays");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(t.value[i]) || !std::isfinite(t.threshold[i])) {
      fail(ErrorCode::Structure, "forest file: non-finite node value");
    }
    if (t.feature[i] < 0) continue;
    if (static_cast<std::size_t>(t.feature[i]) >= input_dim) {
      fail(ErrorCode::Structure, "forest file: split feature out of range");
    }
    // Children always come after their parent, which also rules out cycles.
    const auto child_ok = [&](int c) {
      return c > static_cast<int>(i) && static_cast<std::size_t>(c) < n;
    };
    if (!child_ok(t.left[i]) || !child_ok(t.right[i])) {
      fail(ErrorCode::Structure, "forest file: child index out of range");
    }
  }
}

}  // namespace

std::size_t RegressionTree::num_leaves() const noexcept {
  return static_cast<std::size_t>(std::count(feature.begin(), feature.end(), -1));
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (feature[i] >= 0) {
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(feature[i])] <= threshold[i]
                                     ? left[i]
                                     : right[i]);
  }
  return value[i];
}

Forest::Forest(ForestConfig config, std::size_t input_dim, std::vector<RegressionTree> trees)
    : config_(config), input_dim_(input_dim), trees_(std::move(trees)) {}

double Forest::predict_row(std::span<const double> x) const {
  if (x.size() != input_dim_) {
    fail(ErrorCode::InvalidArgument, "forest expects " + std::to_string(input_dim_) +
                                         " features, got " + std::to_string(x.size()));
  }
  require(!trees_.empty(), "forest has no trees");
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.predict(x);
  return sum / static_cast<double>(trees_.size());
}

std::vector<double> Forest::predict(const FeatureMatrix& features) const {
  if (features.cols() != input_dim_) {
    fail(ErrorCode::InvalidArgument, "forest expects " + std::to_string(input_dim_) +
                                         " features, got " + std::to_string(features.cols()));
  }
  std::vector<double> out(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) out[r] = predict_row(features.row(r));
  return out;
}

int effective_max_features(const ForestConfig& config, std::size_t d) {
  require(d >= 1, "forest needs at least one feature");
  if (config.max_features == 0) return static_cast<int>((d + 2) / 3);
  if (static_cast<std::size_t>(config.max_features) > d) {
    fail(ErrorCode::InvalidArgument, "max_features " + std::to_string(config.max_features) +
                                         " exceeds feature count " + std::to_string(d));
  }
  return config.max_features;
}

Forest fit_forest(const FeatureMatrix& features, std::span<const double> targets,
                  const ForestConfig& config) {
  check_config(config);
  require(features.rows() >= 2, "forest needs at least 2 training rows");
  if (targets.size() != features.rows()) {
    fail(ErrorCode::InvalidArgument, "feature matrix has " + std::to_string(features.rows()) +
                                         " rows but " + std::to_string(targets.size()) +
                                         " targets were given");
  }
  require(features.rows() < std::numeric_limits<Index>::max(), "too many training rows");
  const int max_features = effective_max_features(config, features.cols());
  for (double v : features.data()) {
    if (!std::isfinite(v)) fail(ErrorCode::Numeric, "non-finite training feature");
  }
  for (double v : targets) {
    if (!std::isfinite(v)) fail(ErrorCode::Numeric, "non-finite training target");
  }

  const TrainingSet ts = make_training_set(features, targets);
  std::vector<RegressionTree> trees(static_cast<std::size_t>(config.n_trees));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int t = next++; t < config.n_trees; t = next++) {
      try {
        TreeBuilder builder(ts, config, max_features,
                            derive_seed(config.seed, static_cast<std::uint64_t>(t)));
        trees[static_cast<std::size_t>(t)] = builder.build();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n_threads = std::min(config.n_threads, config.n_trees);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return Forest(config, features.cols(), std::move(trees));
}

void save_forest(std::ostream& out, const Forest& forest) {
  Json trees = Json::array();
  for (const auto& t : forest.trees()) {
    trees.push_back(Json{{"feature", t.feature},
                         {"threshold", t.threshold},
                         {"left", t.left},
                         {"right", t.right},
                         {"value", t.value},
                         {"n_samples", t.n_samples}});
  }
  Json doc{{"format", kFormat},
           {"version", kFormatVersion},
           {"input_dim", forest.input_dim()},
           {"config", config_to_json(forest.config())},
           {"trees", std::move(trees)}};
  out << doc.dump() << '\n';
  if (!out) fail(ErrorCode::Io, "failed writing forest");
}

Forest load_forest(std::istream& in) {
  try {
    const Json doc = Json::parse(in);
    if (doc.at("format").get<std::string>() != kFormat) {
      fail(ErrorCode::Structure, "not a forest file");
    }
    if (doc.at("version").get<int>() != kFormatVersion) {
      fail(ErrorCode::Structure, "unsupported forest file version");
    }
    const auto input_dim = doc.at("input_dim").get<std::size_t>();
    require(input_dim >= 1, "forest input_dim must be >= 1");
    ForestConfig config = config_from_json(doc.at("config"));
    std::vector<RegressionTree> trees;
    for (const auto& jt : doc.at("trees")) {
      RegressionTree t;
      jt.at("feature").get_to(t.feature);
      jt.at("threshold").get_to(t.threshold);
      jt.at("left").get_to(t.left);
      jt.at("right").get_to(t.right);
      jt.at("value").get_to(t.value);
      jt.at("n_samples").get_to(t.n_samples);
      check_tree(t, input_dim);
      trees.push_back(std::move(t));
    }
    if (trees.size() != static_cast<std::size_t>(config.n_trees)) {
      fail(ErrorCode::Structure, "forest file: tree count does not match config");
    }
    return Forest(config, input_dim, std::move(trees));
  } catch (const Json::exception& e) {
    fail(ErrorCode::Parse, std::string("forest file: ") + e.what());
  }
}

void save_forest(const std::filesystem::path& path, const Forest& forest) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  save_forest(out, forest);
}

Forest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot read " + path.string());
  return load_forest(in);
}

}  // namespace cosmo_rul
