#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cosmo_rul/types.hpp"

namespace cosmo_rul {

inline constexpr int kDefaultTauMax = 130;
inline constexpr int kDefaultNominalCycles = 30;

enum class SubsetId { FD001 = 1, FD002, FD003, FD004 };
enum class Split { Alpha, Beta };

std::string_view to_string(SubsetId id);
std::string_view to_string(Split split);
SubsetId parse_subset_id(std::string_view text);
Split parse_split(std::string_view text);

// One unit's cycle-indexed series. samples[i] is cycle i + 1.
struct Trajectory {
  int unit_id = 0;
  std::vector<Sample> samples;
  // RUL at the last recorded cycle. Absent for run-to-failure trajectories.
  std::optional<int> censored_rul;

  std::size_t length() const noexcept { return samples.size(); }
  bool run_to_failure() const noexcept { return !censored_rul.has_value(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct Subset {
  SubsetId id = SubsetId::FD001;
  Split split = Split::Alpha;
  std::vector<Trajectory> trajectories;

  std::size_t num_samples() const noexcept;
  // Checks the alpha/beta censoring invariant and per-trajectory invariants.
  void validate() const;

  friend bool operator==(const Subset&, const Subset&) = default;
};

struct RulTarget {
  std::vector<int> values;  // values[i] is y at cycle i + 1
  int tau_max = kDefaultTauMax;
};

struct NominalPool {
  std::vector<Sample> samples;
  int tau = kDefaultNominalCycles;

  std::size_t size() const noexcept { return samples.size(); }
};

// Parses whitespace-separated C-MAPSS rows: unit, cycle, 24 feature values.
// Rows must be grouped by unit with cycles 1, 2, ... in order.
std::vector<Trajectory> parse_cmapss(std::istream& in);

// One nonnegative integer per non-blank line.
std::vector<int> parse_rul_list(std::istream& in);

// Pairs ground-truth RULs with trajectories by position.
std::vector<Trajectory> attach_censored_rul(std::vector<Trajectory> trajectories,
                                            std::span<const int> ruls);

// Piecewise-linear target of a run-to-failure trajectory: l - t near the end,
// capped at tau_max before that.
RulTarget label_rul(const Trajectory& trajectory, int tau_max = kDefaultTauMax);

// Per-cycle truth for either kind of trajectory. Censored trajectories are
// back-extended from censored_rul and capped at tau_max.
RulTarget truth_rul(const Trajectory& trajectory, int tau_max = kDefaultTauMax);

// All samples with cycle <= tau across the given trajectories.
NominalPool extract_nominal(std::span<const Trajectory> trajectories,
                            int tau = kDefaultNominalCycles);

// Writes the 26-column layout; numbers use the shortest round-trip decimal
// representation, so parse_cmapss(write_cmapss(x)) == x.
void write_cmapss(std::ostream& out, std::span<const Trajectory> trajectories);
void write_rul_list(std::ostream& out, std::span<const Trajectory> trajectories);

// Self-describing cache file for a parsed subset. See README for the layout.
void write_subset_cache(std::ostream& out, const Subset& subset);
Subset read_subset_cache(std::istream& in);

std::filesystem::path trajectory_file(const std::filesystem::path& root, SubsetId id,
                                      Split split);
std::filesystem::path rul_file(const std::filesystem::path& root, SubsetId id);

// Loads train_FD00x.txt (alpha) or test_FD00x.txt + RUL_FD00x.txt (beta).
Subset load_subset(const std::filesystem::path& root, SubsetId id, Split split);

}  // namespace cosmo_rul
