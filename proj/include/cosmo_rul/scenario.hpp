#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cosmo_rul/cosmo.hpp"
#include "cosmo_rul/dataset.hpp"
#include "cosmo_rul/forest.hpp"
#include "cosmo_rul/metrics.hpp"

namespace cosmo_rul {

enum class ScenarioGroup {
  SamePopulation,
  NewFault,
  FewerFault,
  NewOcs,
  FewerOcs,
  NewFaultNewOcs,
  NewFaultFewerOcs,
  FewerFaultNewOcs,
  FewerFaultFewerOcs,
};

std::string_view to_string(ScenarioGroup group);

struct ScenarioInfo {
  std::string_view label;
  SubsetId source;
  SubsetId target;
  ScenarioGroup group;
};

// The 16 transfer scenarios A1..H in table order.
std::span<const ScenarioInfo> scenario_table();
const ScenarioInfo& find_scenario(std::string_view label);

enum class Method { Raw, Coral, Cosmo };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct ScenarioSpec {
  std::string label = "A1";
  SubsetId source = SubsetId::FD001;
  SubsetId target = SubsetId::FD001;
  Split eval_mode = Split::Alpha;
  Method method = Method::Raw;
  DistanceMethod distance;  // cosmo only
  ReferenceMode mode;       // cosmo only
  int repetitions = 1;
  std::uint64_t seed = 0;
  int folds = 4;
  std::size_t ref_size = kDefaultReferenceSize;
  int tau = kDefaultNominalCycles;
  int tau_max = kDefaultTauMax;
  int rul_limit = kDefaultRulLimit;
  int n_conditions = 6;  // used for the k-condition check
  double coral_epsilon = 1e-6;
  std::vector<int> curve_limits = default_curve_limits();
  ForestConfig forest;  // forest.seed is replaced by a per-fold derived seed

  static std::vector<int> default_curve_limits();

  // Builds a spec for a table scenario with defaults elsewhere.
  static ScenarioSpec for_scenario(std::string_view label);

  // "raw", "coral" or "cosmo_<distance>_<fit>-<predict>", e.g. cosmo_mknn_ST-ST.
  std::string method_tag() const;
  // Stable "key=value;..." rendering of every field that affects results.
  std::string canonical() const;
  // FNV-1a 64 of canonical().
  std::uint64_t config_hash() const;
  void validate() const;
};

// Flat "key = value" configuration describing a scenario matrix. See README.
struct MatrixConfig {
  std::vector<ScenarioSpec> specs;
  std::filesystem::path data_root;
};

MatrixConfig parse_matrix_config(std::istream& in);
MatrixConfig load_matrix_config(const std::filesystem::path& path);

}  // namespace cosmo_rul
