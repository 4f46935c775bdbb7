#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cosmo_rul/dataset.hpp"
#include "cosmo_rul/metrics.hpp"
#include "cosmo_rul/scenario.hpp"

namespace cosmo_rul {

// Trajectory-level fold assignment: fold[i] in [0, folds) for trajectory i.
// Seeded shuffle, then round-robin, so fold sizes differ by at most one.
std::vector<int> cv_folds(std::size_t n_trajectories, int folds, std::uint64_t seed);

// Parsed subsets shared across scenarios of a matrix run. Thread safe.
class DataCache {
 public:
  std::shared_ptr<const Subset> get(const std::filesystem::path& root, SubsetId id, Split split);

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::string, int, int>, std::shared_ptr<const Subset>> subsets_;
};

struct FoldRecord {
  int repetition = 0;
  int fold = 0;
  std::uint64_t seed = 0;
  MetricReport report;
  // (limit, fleet MAPE); NaN where every unit is excluded at that limit.
  std::vector<std::pair<int, double>> curve;
  std::size_t n_train_rows = 0;
  std::size_t n_target_units = 0;
};

struct ExperimentResult {
  ScenarioSpec spec;
  std::vector<FoldRecord> folds;
  Aggregate mape;
  Aggregate rmse_last_cycle;
  std::vector<std::string> warnings;
  std::string error;  // non-empty when the scenario failed (run_matrix only)

  bool ok() const noexcept { return error.empty(); }
  // Per-limit mean over folds of the fleet MAPE, skipping NaN entries.
  std::vector<std::pair<int, double>> mean_curve() const;
};

// Resolves an explicit root, falling back to COSMO_RUL_DATA_ROOT.
std::filesystem::path resolve_data_root(const std::filesystem::path& root);

ExperimentResult run_scenario(const ScenarioSpec& spec, const std::filesystem::path& data_root,
                              DataCache* cache = nullptr);

// Output file names: results/<label>_<tag>.csv and curves/<label>_<tag>.csv.
std::filesystem::path result_csv_path(const std::filesystem::path& out_dir,
                                      const ScenarioSpec& spec);
std::filesystem::path curve_csv_path(const std::filesystem::path& out_dir,
                                     const ScenarioSpec& spec);

void write_result_csv(const std::filesystem::path& path, const ExperimentResult& result);
void write_curve_csv(const std::filesystem::path& path, const ExperimentResult& result);
// Writes both CSVs of a successful result under out_dir.
void write_result_files(const std::filesystem::path& out_dir, const ExperimentResult& result);
// Rewrites out_dir/summary.json from every result given.
void write_summary_json(const std::filesystem::path& out_dir,
                        const std::vector<ExperimentResult>& results);

// Adds or replaces one result's entry in out_dir/summary.json, keeping the
// entries of other scenarios and methods.
void merge_summary_json(const std::filesystem::path& out_dir, const ExperimentResult& result);

using ProgressCallback = std::function<void(const ExperimentResult&, std::size_t index,
                                            std::size_t total)>;

// Runs every spec, isolating failures. When out_dir is non-empty each
// scenario's files and summary.json are written as soon as it finishes.
std::vector<ExperimentResult> run_matrix(const std::vector<ScenarioSpec>& specs,
                                         const std::filesystem::path& data_root,
                                         const std::filesystem::path& out_dir = {},
                                         const ProgressCallback& progress = {});

// Text tables from the per-fold CSVs under out_dir/results: per scenario and
// method mean and sample std, then scenario-group means (scenario means
// averaged over group members).
std::string render_report(const std::filesystem::path& out_dir);

}  // namespace cosmo_rul
