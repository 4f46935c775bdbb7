#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cosmo_rul/dataset.hpp"

namespace cosmo_rul {

struct CycleRange {
  int min = 0;
  int max = 0;
};

// Generator for C-MAPSS-like fleets. Every unit switches randomly between
// n_conditions fixed operating-setting triples from cycle to cycle. Sensor
// channels are a condition-dependent baseline plus per-unit initial wear, a
// monotone degradation ramp starting at a random onset cycle, and bounded
// uniform noise. The last cycle is end of life.
struct FleetConfig {
  int n_units = 100;
  int n_conditions = 1;
  CycleRange fault_onset{30, 150};
  // Cycles from onset to failure.
  CycleRange degradation{100, 220};
  int n_fault_modes = 1;
  std::uint64_t seed = 0;
};

struct SyntheticUnit {
  Trajectory trajectory;
  int onset = 0;  // first cycle with nonzero degradation
  int fault_mode = 0;
};

std::vector<SyntheticUnit> synthesize_units(const FleetConfig& config);
std::vector<Trajectory> synthesize_fleet(const FleetConfig& config);

// Setting triple (altitude kft, Mach, TRA) of condition `index`. The first six
// follow the six flight regimes of the public dataset; index 0 is the single
// sea-level regime used by one-condition fleets.
std::array<double, kNumSettings> operating_condition(int index);

// Half-width of the uniform noise on sensor channel `sensor` (0-based among
// the 21 sensors).
double sensor_noise_bound(std::size_t sensor);
// True when `sensor` drifts under fault mode `mode`.
bool is_degradation_channel(std::size_t sensor, int mode);

struct SyntheticRootConfig {
  int units_per_subset = 100;
  std::uint64_t seed = 0;
};

// Writes train_FD00x.txt, test_FD00x.txt and RUL_FD00x.txt for four subsets
// mirroring the public layout: FD001 1 condition / 1 fault, FD002 6 / 1,
// FD003 1 / 2, FD004 6 / 2. Test trajectories are right-censored copies of
// freshly generated run-to-failure units.
void write_synthetic_data_root(const std::filesystem::path& root,
                               const SyntheticRootConfig& config);

}  // namespace cosmo_rul
