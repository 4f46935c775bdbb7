// cosmo-rul: command-line front end over the C API.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cosmo_rul/cosmo_rul.h"

namespace {

int report_failure(crul_status status) {
  std::cerr << "error: " << crul_status_string(status) << ": " << crul_last_error() << '\n';
  return status == CRUL_INVALID_ARGUMENT ? 2 : 1;
}

struct RunArgs {
  std::string scenario;
  std::string method = "raw";
  std::string distance = "mknn";
  std::string mode = "ST,ST";
  std::string eval_mode = "alpha";
  int k = 8;
  std::size_t ref_size = 80;
  int tau = 30;
  int tau_max = 130;
  int rul_limit = 129;
  int folds = 4;
  int repetitions = 1;
  int trees = 100;
  int min_leaf = 5;
  int max_features = 0;
  int max_depth = 0;
  int threads = 1;
  int n_conditions = 6;
  std::vector<int> limits;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--scenario", a.scenario, "Scenario label A1..H")->required();
  cmd->add_option("--method", a.method, "raw, coral or cosmo")
      ->check(CLI::IsMember({"raw", "coral", "cosmo"}));
  cmd->add_option("--distance", a.distance, "COSMO distance: knn, mknn or mcp")
      ->check(CLI::IsMember({"knn", "mknn", "mcp"}));
  cmd->add_option("--mode", a.mode, "Reference mode: S,T  S,ST  ST,ST  ST,T");
  cmd->add_option("--eval-mode", a.eval_mode, "alpha (train files) or beta (test files)")
      ->check(CLI::IsMember({"alpha", "beta"}));
  cmd->add_option("--k", a.k, "Neighbours for knn/mknn")->check(CLI::PositiveNumber);
  cmd->add_option("--ref-size", a.ref_size, "Reference group size")->check(CLI::PositiveNumber);
  cmd->add_option("--tau", a.tau, "Nominal cycles per trajectory")->check(CLI::PositiveNumber);
  cmd->add_option("--tau-max", a.tau_max, "RUL target cap")->check(CLI::PositiveNumber);
  cmd->add_option("--rul-limit", a.rul_limit, "Largest RUL counted in MAPE")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--folds", a.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  cmd->add_option("--repetitions", a.repetitions, "Repetitions")->check(CLI::PositiveNumber);
  cmd->add_option("--trees", a.trees, "Trees per forest")->check(CLI::PositiveNumber);
  cmd->add_option("--min-leaf", a.min_leaf, "Minimum samples per leaf")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-features", a.max_features, "Features per split (0: ceil(d/3))")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-depth", a.max_depth, "Tree depth limit (0: none)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--threads", a.threads, "Forest fitting threads")->check(CLI::PositiveNumber);
  cmd->add_option("--n-conditions", a.n_conditions, "Operating conditions for the k-condition")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--limits", a.limits, "RUL limits for the MAPE curve")->delimiter(',');
}

crul_run_options to_options(const RunArgs& a, std::uint64_t seed) {
  crul_run_options o;
  crul_run_options_init(&o);
  o.scenario = a.scenario.c_str();
  o.method = a.method.c_str();
  o.distance = a.distance.c_str();
  o.mode = a.mode.c_str();
  o.eval_mode = a.eval_mode.c_str();
  o.k = a.k;
  o.ref_size = a.ref_size;
  o.tau = a.tau;
  o.tau_max = a.tau_max;
  o.rul_limit = a.rul_limit;
  o.folds = a.folds;
  o.repetitions = a.repetitions;
  o.seed = seed;
  o.n_trees = a.trees;
  o.min_samples_leaf = a.min_leaf;
  o.max_features = a.max_features;
  o.max_depth = a.max_depth;
  o.n_threads = a.threads;
  o.n_conditions = a.n_conditions;
  if (!a.limits.empty()) {
    o.curve_limits = a.limits.data();
    o.n_curve_limits = a.limits.size();
  }
  return o;
}

void print_warnings(const crul_result* r) {
  std::size_t n = 0;
  crul_result_num_warnings(r, &n);
  for (std::size_t i = 0; i < n; ++i) {
    const char* w = nullptr;
    if (crul_result_warning(r, i, &w) == CRUL_OK) std::cerr << "warning: " << w << '\n';
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Peer-distance (COSMO) transfer learning for remaining useful life", "cosmo-rul"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(crul_version()));

  std::string data_root;
  std::string out;
  std::string config;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* cmd, bool with_out) {
    cmd->add_option("--data-root", data_root,
                    "Directory with train_/test_/RUL_FD00x.txt (default: $COSMO_RUL_DATA_ROOT)");
    cmd->add_option("--seed", seed, "Base seed");
    if (with_out) cmd->add_option("--out", out, "Output path");
  };

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "Validate a subset and optionally cache it");
  std::string subset = "FD001";
  std::string split = "alpha";
  add_common(parse_cmd, true);
  parse_cmd->add_option("--subset", subset, "FD001..FD004");
  parse_cmd->add_option("--split", split, "alpha or beta")
      ->check(CLI::IsMember({"alpha", "beta", "train", "test"}));

  // features
  auto* feat_cmd = app.add_subcommand("features", "Write COSMO feature matrices as CSV");
  std::string ref_subset;
  std::string ref_split = "alpha";
  crul_feature_options fopts;
  crul_feature_options_init(&fopts);
  std::string feat_distance = "mknn";
  add_common(feat_cmd, true);
  feat_cmd->add_option("--subset", subset, "Subset whose samples are featurized");
  feat_cmd->add_option("--split", split, "alpha or beta");
  feat_cmd->add_option("--ref-subset", ref_subset, "Subset providing the nominal pool (default: --subset)");
  feat_cmd->add_option("--ref-split", ref_split, "Split of the reference subset");
  feat_cmd->add_option("--distance", feat_distance, "knn, mknn or mcp")
      ->check(CLI::IsMember({"knn", "mknn", "mcp"}));
  feat_cmd->add_option("--k", fopts.k, "Neighbours")->check(CLI::PositiveNumber);
  feat_cmd->add_option("--ref-size", fopts.ref_size, "Reference group size")
      ->check(CLI::PositiveNumber);
  feat_cmd->add_option("--tau", fopts.tau, "Nominal cycles")->check(CLI::PositiveNumber);

  // run / curves
  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write its result files");
  add_common(run_cmd, true);
  add_run_options(run_cmd, run_args);
  RunArgs curve_args;
  auto* curves_cmd = app.add_subcommand("curves", "MAPE against RUL limit for one scenario");
  add_common(curves_cmd, true);
  add_run_options(curves_cmd, curve_args);

  // matrix
  auto* matrix_cmd = app.add_subcommand("matrix", "Run every scenario listed in a config file");
  add_common(matrix_cmd, true);
  matrix_cmd->add_option("--config", config, "Scenario matrix config")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Summary tables from a results directory");
  report_cmd->add_option("--out", out, "Directory holding results/")->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic data root");
  int units = 100;
  add_common(synth_cmd, true);
  synth_cmd->add_option("--units", units, "Trajectories per subset")->check(CLI::PositiveNumber);

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << "\n" << app.help();
    return code;
  }

  const char* root = data_root.empty() ? nullptr : data_root.c_str();

  if (parse_cmd->parsed()) {
    crul_subset* s = nullptr;
    if (auto st = crul_subset_load(root, subset.c_str(), split.c_str(), &s); st != CRUL_OK) {
      return report_failure(st);
    }
    std::size_t n_traj = 0, n_samples = 0;
    crul_subset_counts(s, &n_traj, &n_samples);
    std::cout << subset << ' ' << split << ": " << n_traj << " trajectories, " << n_samples
              << " samples\n";
    crul_status st = CRUL_OK;
    if (!out.empty()) {
      st = crul_subset_write_cache(s, out.c_str());
      if (st == CRUL_OK) std::cout << "cache written to " << out << '\n';
    }
    crul_subset_destroy(s);
    return st == CRUL_OK ? 0 : report_failure(st);
  }

  if (feat_cmd->parsed()) {
    if (out.empty()) {
      std::cerr << "error: features needs --out\n";
      return 2;
    }
    if (ref_subset.empty()) ref_subset = subset;
    crul_subset* samples = nullptr;
    crul_subset* reference = nullptr;
    crul_status st = crul_subset_load(root, subset.c_str(), split.c_str(), &samples);
    if (st == CRUL_OK) {
      st = crul_subset_load(root, ref_subset.c_str(), ref_split.c_str(), &reference);
    }
    if (st == CRUL_OK) {
      fopts.distance = feat_distance.c_str();
      fopts.seed = seed;
      st = crul_write_features(samples, reference, &fopts, out.c_str());
    }
    crul_subset_destroy(samples);
    crul_subset_destroy(reference);
    if (st != CRUL_OK) return report_failure(st);
    std::cout << "features written to " << out << '\n';
    return 0;
  }

  if (run_cmd->parsed() || curves_cmd->parsed()) {
    const bool curves = curves_cmd->parsed();
    const RunArgs& a = curves ? curve_args : run_args;
    const crul_run_options o = to_options(a, seed);
    crul_result* r = nullptr;
    if (auto st = crul_run_scenario(&o, root, &r); st != CRUL_OK) return report_failure(st);
    print_warnings(r);
    crul_status st = CRUL_OK;
    if (!out.empty()) st = crul_result_write(r, out.c_str());
    const char* tag = "";
    crul_result_method_tag(r, &tag);
    if (curves) {
      std::size_t n = 0;
      crul_result_curve(r, nullptr, nullptr, 0, &n);
      std::vector<int> limits(n);
      std::vector<double> mapes(n);
      crul_result_curve(r, limits.data(), mapes.data(), n, &n);
      std::cout << "limit,mape\n";
      for (std::size_t i = 0; i < n; ++i) std::cout << limits[i] << ',' << fmt(mapes[i]) << '\n';
    } else {
      double mean = 0, sd = 0, rmse = 0, rmse_sd = 0;
      std::size_t n = 0;
      crul_result_mape(r, &mean, &sd, &n);
      crul_result_rmse(r, &rmse, &rmse_sd, nullptr);
      std::cout << a.scenario << ' ' << tag << " (" << a.eval_mode << "): MAPE " << fmt(mean)
                << " +/- " << fmt(sd) << ", last-cycle RMSE " << fmt(rmse) << " +/- "
                << fmt(rmse_sd) << " over " << n << " folds\n";
    }
    crul_result_destroy(r);
    return st == CRUL_OK ? 0 : report_failure(st);
  }

  if (matrix_cmd->parsed()) {
    if (out.empty()) {
      std::cerr << "error: matrix needs --out\n";
      return 2;
    }
    auto progress = [](const char* scenario, const char* tag, const char* error, double mape,
                       std::size_t index, std::size_t total, void*) {
      std::cerr << '[' << (index + 1) << '/' << total << "] " << scenario << ' ' << tag << ": "
                << (error ? std::string("FAILED: ") + error : "MAPE " + fmt(mape)) << '\n';
    };
    std::size_t ok = 0, failed = 0;
    if (auto st = crul_run_matrix(config.c_str(), root, out.c_str(), progress, nullptr, &ok,
                                  &failed);
        st != CRUL_OK) {
      return report_failure(st);
    }
    std::cout << ok << " scenarios completed, " << failed << " failed; results in " << out
              << '\n';
    return failed == 0 ? 0 : 1;
  }

  if (report_cmd->parsed()) {
    char* text = nullptr;
    if (auto st = crul_render_report(out.c_str(), &text); st != CRUL_OK) {
      return report_failure(st);
    }
    std::cout << text;
    crul_free_string(text);
    return 0;
  }

  if (synth_cmd->parsed()) {
    if (out.empty()) {
      std::cerr << "error: synth needs --out\n";
      return 2;
    }
    if (auto st = crul_write_synthetic_data_root(out.c_str(), units, seed); st != CRUL_OK) {
      return report_failure(st);
    }
    std::cout << "synthetic data root written to " << out << '\n';
    return 0;
  }
  return 2;
}
