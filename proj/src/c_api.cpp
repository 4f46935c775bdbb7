#include "cosmo_rul/cosmo_rul.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <string>

#include "cosmo_rul/adapt.hpp"
#include "cosmo_rul/cosmo.hpp"
#include "cosmo_rul/dataset.hpp"
#include "cosmo_rul/error.hpp"
#include "cosmo_rul/forest.hpp"
#include "cosmo_rul/runner.hpp"
#include "cosmo_rul/scenario.hpp"
#include "cosmo_rul/synth.hpp"
#include "text.hpp"

struct crul_subset {
  cosmo_rul::Subset subset;
};

struct crul_forest {
  cosmo_rul::Forest forest;
};

struct crul_result {
  cosmo_rul::ExperimentResult result;
  std::string method_tag;
};

namespace {

using namespace cosmo_rul;

thread_local std::string g_last_error;

crul_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return CRUL_INVALID_ARGUMENT;
    case ErrorCode::Parse: return CRUL_PARSE_ERROR;
    case ErrorCode::Structure: return CRUL_STRUCTURE_ERROR;
    case ErrorCode::Io: return CRUL_IO_ERROR;
    case ErrorCode::Numeric: return CRUL_NUMERIC_ERROR;
  }
  return CRUL_INTERNAL_ERROR;
}

template <class F>
crul_status guard(F&& body) {
  try {
    body();
    return CRUL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CRUL_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CRUL_INTERNAL_ERROR;
  } catch (...) {
    g_last_error = "unknown error";
    return CRUL_INTERNAL_ERROR;
  }
}

void need(const void* p, const char* name) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(name) + " is NULL");
}

std::string str(const char* s, const char* name) {
  need(s, name);
  return s;
}

FeatureMatrix copy_rows(const double* data, std::size_t rows, std::size_t cols) {
  FeatureMatrix m(rows, cols);
  if (rows * cols != 0) std::memcpy(m.data().data(), data, rows * cols * sizeof(double));
  return m;
}

std::vector<Sample> samples_from(const double* data, std::size_t rows) {
  std::vector<Sample> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::memcpy(out[r].data(), data + r * kNumFeatures, kNumFeatures * sizeof(double));
  }
  return out;
}

ScenarioSpec spec_from(const crul_run_options& o) {
  ScenarioSpec spec = ScenarioSpec::for_scenario(str(o.scenario, "scenario"));
  spec.method = parse_method(str(o.method, "method"));
  if (o.eval_mode) spec.eval_mode = parse_split(o.eval_mode);
  require(o.k >= 1, "k must be >= 1");
  if (spec.method == Method::Cosmo) {
    spec.distance = DistanceMethod::parse(str(o.distance, "distance"), o.k);
    spec.mode = ReferenceMode::parse(str(o.mode, "mode"));
  } else {
    spec.distance.k = o.k;
  }
  spec.ref_size = o.ref_size;
  spec.tau = o.tau;
  spec.tau_max = o.tau_max;
  spec.rul_limit = o.rul_limit;
  spec.folds = o.folds;
  spec.repetitions = o.repetitions;
  spec.seed = o.seed;
  spec.n_conditions = o.n_conditions;
  spec.forest.n_trees = o.n_trees;
  spec.forest.min_samples_leaf = o.min_samples_leaf;
  spec.forest.max_features = o.max_features;
  spec.forest.max_depth = o.max_depth;
  spec.forest.n_threads = o.n_threads;
  if (o.curve_limits) {
    spec.curve_limits.assign(o.curve_limits, o.curve_limits + o.n_curve_limits);
  }
  spec.validate();
  return spec;
}

}  // namespace

extern "C" {

const char* crul_version(void) { return "0.1.0"; }

const char* crul_last_error(void) { return g_last_error.c_str(); }

const char* crul_status_string(crul_status status) {
  switch (status) {
    case CRUL_OK: return "ok";
    case CRUL_INVALID_ARGUMENT: return "invalid argument";
    case CRUL_PARSE_ERROR: return "parse error";
    case CRUL_STRUCTURE_ERROR: return "structure error";
    case CRUL_IO_ERROR: return "I/O error";
    case CRUL_NUMERIC_ERROR: return "numeric error";
    case CRUL_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

crul_status crul_subset_load(const char* data_root, const char* subset, const char* split,
                             crul_subset** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    const std::filesystem::path root =
        resolve_data_root(data_root ? std::filesystem::path(data_root) : std::filesystem::path());
    auto s = std::make_unique<crul_subset>();
    s->subset =
        load_subset(root, parse_subset_id(str(subset, "subset")), parse_split(str(split, "split")));
    *out = s.release();
  });
}

crul_status crul_subset_read_cache(const char* path, crul_subset** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    const std::string p = str(path, "path");
    std::ifstream in(p);
    if (!in) fail(ErrorCode::Io, "cannot read " + p);
    auto s = std::make_unique<crul_subset>();
    try {
      s->subset = read_subset_cache(in);
    } catch (const ParseError& e) {
      fail(ErrorCode::Parse, p + ": " + e.what());
    }
    *out = s.release();
  });
}

crul_status crul_subset_write_cache(const crul_subset* subset, const char* path) {
  return guard([&] {
    need(subset, "subset");
    const std::string p = str(path, "path");
    std::ofstream out(p);
    if (!out) fail(ErrorCode::Io, "cannot write " + p);
    write_subset_cache(out, subset->subset);
    out.flush();
    if (!out) fail(ErrorCode::Io, "failed writing " + p);
  });
}

crul_status crul_subset_counts(const crul_subset* subset, size_t* n_trajectories,
                               size_t* n_samples) {
  return guard([&] {
    need(subset, "subset");
    if (n_trajectories) *n_trajectories = subset->subset.trajectories.size();
    if (n_samples) *n_samples = subset->subset.num_samples();
  });
}

void crul_subset_destroy(crul_subset* subset) { delete subset; }

crul_status crul_write_synthetic_data_root(const char* root, int units_per_subset,
                                           uint64_t seed) {
  return guard([&] {
    SyntheticRootConfig cfg;
    cfg.units_per_subset = units_per_subset;
    cfg.seed = seed;
    write_synthetic_data_root(str(root, "root"), cfg);
  });
}

void crul_feature_options_init(crul_feature_options* options) {
  if (!options) return;
  options->distance = "mknn";
  options->k = kDefaultNeighbours;
  options->ref_size = kDefaultReferenceSize;
  options->tau = kDefaultNominalCycles;
  options->seed = 0;
}

crul_status crul_write_features(const crul_subset* samples, const crul_subset* reference,
                                const crul_feature_options* options, const char* path) {
  return guard([&] {
    need(samples, "samples");
    need(reference, "reference");
    need(options, "options");
    const std::string p = str(path, "path");
    const DistanceMethod method = DistanceMethod::parse(str(options->distance, "distance"),
                                                        options->k);
    require(options->tau >= 1, "tau must be >= 1");
    const NominalPool pool = extract_nominal(reference->subset.trajectories, options->tau);
    const ReferenceGroup group = sample_reference_group(pool, options->ref_size, options->seed);

    std::ofstream out(p);
    if (!out) fail(ErrorCode::Io, "cannot write " + p);
    out << "unit,cycle";
    for (std::size_t j = 0; j < kNumFeatures; ++j) out << ",theta_" << j;
    out << '\n';
    for (const auto& t : samples->subset.trajectories) {
      const FeatureMatrix theta = feature_matrix(t.samples, group, method);
      for (std::size_t r = 0; r < theta.rows(); ++r) {
        out << t.unit_id << ',' << (r + 1);
        for (double v : theta.row(r)) out << ',' << text::format_double(v);
        out << '\n';
      }
    }
    out.flush();
    if (!out) fail(ErrorCode::Io, "failed writing " + p);
  });
}

crul_status crul_feature_vector(const double* x, const double* group, size_t n_group,
                                const char* distance, int k, double* out) {
  return guard([&] {
    need(x, "x");
    need(group, "group");
    need(out, "out");
    Sample s{};
    std::memcpy(s.data(), x, sizeof(double) * kNumFeatures);
    ReferenceGroup g;
    g.samples = samples_from(group, n_group);
    const FeatureVector v = feature_vector(s, g, DistanceMethod::parse(str(distance, "distance"), k));
    std::memcpy(out, v.data(), sizeof(double) * kNumFeatures);
  });
}

crul_status crul_estimate_num_conditions(const double* samples, size_t n, int max_k,
                                         uint64_t seed, int* out) {
  return guard([&] {
    need(samples, "samples");
    need(out, "out");
    EigengapOptions opts;
    opts.max_k = max_k;
    opts.seed = seed;
    *out = estimate_num_conditions(samples_from(samples, n), opts);
  });
}

crul_status crul_check_k_condition(int k, size_t group_size, int n_conditions, int* out) {
  return guard([&] {
    need(out, "out");
    *out = check_k_condition(k, group_size, n_conditions) ? 1 : 0;
  });
}

void crul_forest_config_init(crul_forest_config* config) {
  if (!config) return;
  const ForestConfig d;
  config->n_trees = d.n_trees;
  config->max_features = d.max_features;
  config->min_samples_leaf = d.min_samples_leaf;
  config->max_depth = d.max_depth;
  config->bootstrap = d.bootstrap ? 1 : 0;
  config->seed = d.seed;
  config->n_threads = d.n_threads;
}

crul_status crul_forest_fit(const double* features, size_t n, size_t d, const double* targets,
                            const crul_forest_config* config, crul_forest** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    need(features, "features");
    need(targets, "targets");
    need(config, "config");
    ForestConfig c;
    c.n_trees = config->n_trees;
    c.max_features = config->max_features;
    c.min_samples_leaf = config->min_samples_leaf;
    c.max_depth = config->max_depth;
    c.bootstrap = config->bootstrap != 0;
    c.seed = config->seed;
    c.n_threads = config->n_threads;
    auto f = std::make_unique<crul_forest>();
    f->forest = fit_forest(copy_rows(features, n, d), std::span<const double>(targets, n), c);
    *out = f.release();
  });
}

crul_status crul_forest_predict(const crul_forest* forest, const double* features, size_t m,
                                size_t d, double* out) {
  return guard([&] {
    need(forest, "forest");
    need(features, "features");
    need(out, "out");
    const auto pred = forest->forest.predict(copy_rows(features, m, d));
    std::copy(pred.begin(), pred.end(), out);
  });
}

crul_status crul_forest_save(const crul_forest* forest, const char* path) {
  return guard([&] {
    need(forest, "forest");
    save_forest(std::filesystem::path(str(path, "path")), forest->forest);
  });
}

crul_status crul_forest_load(const char* path, crul_forest** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    auto f = std::make_unique<crul_forest>();
    f->forest = load_forest(std::filesystem::path(str(path, "path")));
    *out = f.release();
  });
}

void crul_forest_destroy(crul_forest* forest) { delete forest; }

crul_status crul_coral_align(const double* source, size_t n_source, const double* target,
                             size_t n_target, size_t d, double epsilon, double* out,
                             int* n_warnings) {
  return guard([&] {
    need(source, "source");
    need(target, "target");
    need(out, "out");
    const CoralTransform t =
        fit_coral(copy_rows(source, n_source, d), copy_rows(target, n_target, d), epsilon);
    const FeatureMatrix aligned = apply_coral(t, copy_rows(source, n_source, d));
    std::copy(aligned.data().begin(), aligned.data().end(), out);
    if (n_warnings) *n_warnings = static_cast<int>(t.warnings.size());
  });
}

void crul_run_options_init(crul_run_options* options) {
  if (!options) return;
  const ScenarioSpec d;
  options->scenario = "A1";
  options->method = "raw";
  options->distance = "mknn";
  options->mode = "ST,ST";
  options->eval_mode = "alpha";
  options->k = d.distance.k;
  options->ref_size = d.ref_size;
  options->tau = d.tau;
  options->tau_max = d.tau_max;
  options->rul_limit = d.rul_limit;
  options->folds = d.folds;
  options->repetitions = d.repetitions;
  options->seed = d.seed;
  options->n_trees = d.forest.n_trees;
  options->min_samples_leaf = d.forest.min_samples_leaf;
  options->max_features = d.forest.max_features;
  options->max_depth = d.forest.max_depth;
  options->n_threads = d.forest.n_threads;
  options->n_conditions = d.n_conditions;
  options->curve_limits = nullptr;
  options->n_curve_limits = 0;
}

crul_status crul_run_scenario(const crul_run_options* options, const char* data_root,
                              crul_result** out) {
  return guard([&] {
    need(options, "options");
    need(out, "out");
    *out = nullptr;
    const ScenarioSpec spec = spec_from(*options);
    auto r = std::make_unique<crul_result>();
    r->result = run_scenario(spec, data_root ? data_root : "");
    r->method_tag = spec.method_tag();
    *out = r.release();
  });
}

crul_status crul_result_write(const crul_result* result, const char* out_dir) {
  return guard([&] {
    need(result, "result");
    const std::filesystem::path dir = str(out_dir, "out_dir");
    write_result_files(dir, result->result);
    merge_summary_json(dir, result->result);
  });
}

crul_status crul_result_method_tag(const crul_result* result, const char** out) {
  return guard([&] {
    need(result, "result");
    need(out, "out");
    *out = result->method_tag.c_str();
  });
}

crul_status crul_result_mape(const crul_result* result, double* mean, double* std, size_t* n) {
  return guard([&] {
    need(result, "result");
    if (mean) *mean = result->result.mape.mean;
    if (std) *std = result->result.mape.std;
    if (n) *n = result->result.mape.n;
  });
}

crul_status crul_result_rmse(const crul_result* result, double* mean, double* std, size_t* n) {
  return guard([&] {
    need(result, "result");
    if (mean) *mean = result->result.rmse_last_cycle.mean;
    if (std) *std = result->result.rmse_last_cycle.std;
    if (n) *n = result->result.rmse_last_cycle.n;
  });
}

crul_status crul_result_num_folds(const crul_result* result, size_t* out) {
  return guard([&] {
    need(result, "result");
    need(out, "out");
    *out = result->result.folds.size();
  });
}

crul_status crul_result_fold(const crul_result* result, size_t index, int* repetition, int* fold,
                             double* mape, double* rmse, size_t* n_included,
                             size_t* n_excluded) {
  return guard([&] {
    need(result, "result");
    require(index < result->result.folds.size(), "fold index out of range");
    const FoldRecord& f = result->result.folds[index];
    if (repetition) *repetition = f.repetition;
    if (fold) *fold = f.fold;
    if (mape) *mape = f.report.mape;
    if (rmse) *rmse = f.report.rmse_last_cycle;
    if (n_included) *n_included = f.report.n_units_included;
    if (n_excluded) *n_excluded = f.report.n_units_excluded;
  });
}

crul_status crul_result_curve(const crul_result* result, int* limits, double* mapes,
                              size_t capacity, size_t* n) {
  return guard([&] {
    need(result, "result");
    const auto curve = result->result.mean_curve();
    if (n) *n = curve.size();
    for (std::size_t i = 0; i < curve.size() && i < capacity; ++i) {
      if (limits) limits[i] = curve[i].first;
      if (mapes) mapes[i] = curve[i].second;
    }
  });
}

crul_status crul_result_num_warnings(const crul_result* result, size_t* out) {
  return guard([&] {
    need(result, "result");
    need(out, "out");
    *out = result->result.warnings.size();
  });
}

crul_status crul_result_warning(const crul_result* result, size_t index, const char** out) {
  return guard([&] {
    need(result, "result");
    need(out, "out");
    require(index < result->result.warnings.size(), "warning index out of range");
    *out = result->result.warnings[index].c_str();
  });
}

void crul_result_destroy(crul_result* result) { delete result; }

crul_status crul_run_matrix(const char* config_path, const char* data_root, const char* out_dir,
                            crul_progress_fn progress, void* user, size_t* n_ok,
                            size_t* n_failed) {
  return guard([&] {
    const MatrixConfig config = load_matrix_config(str(config_path, "config_path"));
    std::filesystem::path root = config.data_root;
    if (data_root && *data_root) root = data_root;
    const std::filesystem::path out = str(out_dir, "out_dir");
    ProgressCallback cb;
    if (progress) {
      cb = [&](const ExperimentResult& r, std::size_t i, std::size_t total) {
        const std::string tag = r.spec.method_tag();
        progress(r.spec.label.c_str(), tag.c_str(), r.ok() ? nullptr : r.error.c_str(),
                 r.ok() ? r.mape.mean : std::nan(""), i, total, user);
      };
    }
    const auto results = run_matrix(config.specs, root, out, cb);
    std::size_t ok = 0;
    for (const auto& r : results) ok += r.ok() ? 1 : 0;
    if (n_ok) *n_ok = ok;
    if (n_failed) *n_failed = results.size() - ok;
  });
}

crul_status crul_render_report(const char* out_dir, char** out) {
  return guard([&] {
    need(out, "out");
    *out = nullptr;
    const std::string report = render_report(str(out_dir, "out_dir"));
    char* buf = static_cast<char*>(std::malloc(report.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, report.c_str(), report.size() + 1);
    *out = buf;
  });
}

void crul_free_string(char* s) { std::free(s); }

}  // extern "C"
