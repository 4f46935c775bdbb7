#include "cosmo_rul/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cosmo_rul/error.hpp"
#include "random.hpp"

namespace cosmo_rul {

namespace {

constexpr int kMaxFaultModes = 2;
constexpr std::uint64_t kProfileSeed = 0xC0FFEE5EEDULL;

struct SensorProfile {
  double base = 0.0;
  double noise = 0.0;
  std::array<double, kNumSettings> gain{};
  std::array<double, kMaxFaultModes> drift{};  // EOL shift, in units of noise
};

bool is_flat_channel(std::size_t s) {
  // Channels that only follow the operating condition (no noise, no drift).
  return s == 0 || s == 4 || s == 9 || s == 15 || s == 17 || s == 18;
}

bool is_fan_channel(std::size_t s) {
  return s == 1 || s == 2 || s == 7 || s == 12 || s == 14 || s == 16;
}

// Fixed engine physics shared by every generated fleet.
const std::array<SensorProfile, kNumSensors>& profiles() {
  static const auto table = [] {
    std::array<SensorProfile, kNumSensors> t{};
    detail::Engine rng(kProfileSeed);
    for (std::size_t s = 0; s < kNumSensors; ++s) {
      SensorProfile& p = t[s];
      p.base = detail::uniform(rng, 50.0, 950.0);
      const bool flat = is_flat_channel(s);
      p.noise = flat ? 0.0 : detail::uniform(rng, 0.2, 2.0);
      const double unit = flat ? 1.0 : p.noise;
      for (auto& g : p.gain) {
        const double sign = detail::uniform01(rng) < 0.5 ? -1.0 : 1.0;
        g = sign * unit * detail::uniform(rng, 20.0, 60.0);
      }
      if (!flat) {
        const double sign0 = detail::uniform01(rng) < 0.5 ? -1.0 : 1.0;
        p.drift[0] = sign0 * detail::uniform(rng, 4.0, 8.0);
        const double sign1 = detail::uniform01(rng) < 0.5 ? -1.0 : 1.0;
        p.drift[1] = is_fan_channel(s) ? sign1 * detail::uniform(rng, 5.0, 9.0)
                                       : 0.3 * p.drift[0];
      }
    }
    return t;
  }();
  return table;
}

constexpr std::array<std::array<double, kNumSettings>, 6> kRegimes{{
    {0.0, 0.0, 100.0},
    {10.0, 0.25, 100.0},
    {20.0, 0.70, 100.0},
    {25.0, 0.62, 60.0},
    {35.0, 0.84, 100.0},
    {42.0, 0.84, 100.0},
}};

std::array<double, kNumSettings> normalized(const std::array<double, kNumSettings>& s) {
  return {s[0] / 42.0, s[1] / 0.84, s[2] / 100.0};
}

void check_range(const CycleRange& r, const char* what) {
  if (r.min > r.max) {
    fail(ErrorCode::InvalidArgument, std::string("empty ") + what + " range [" +
                                         std::to_string(r.min) + ", " + std::to_string(r.max) +
                                         "]");
  }
  require(r.min >= 1, std::string(what) + " range must start at >= 1");
}

}  // namespace

std::array<double, kNumSettings> operating_condition(int index) {
  require(index >= 0, "operating condition index must be >= 0");
  if (index < static_cast<int>(kRegimes.size())) return kRegimes[index];
  return {45.0 + 5.0 * (index - 6), 0.5, 80.0};
}

double sensor_noise_bound(std::size_t sensor) {
  require(sensor < kNumSensors, "sensor index out of range");
  return profiles()[sensor].noise;
}

bool is_degradation_channel(std::size_t sensor, int mode) {
  require(sensor < kNumSensors, "sensor index out of range");
  require(mode >= 0 && mode < kMaxFaultModes, "fault mode out of range");
  return profiles()[sensor].drift[mode] != 0.0;
}

std::vector<SyntheticUnit> synthesize_units(const FleetConfig& config) {
  require(config.n_units >= 1, "n_units must be >= 1");
  require(config.n_conditions >= 1, "n_conditions must be >= 1");
  require(config.n_fault_modes >= 1 && config.n_fault_modes <= kMaxFaultModes,
          "n_fault_modes must be 1 or 2");
  check_range(config.fault_onset, "fault onset");
  check_range(config.degradation, "degradation length");

  const auto& prof = profiles();
  std::vector<std::array<double, kNumSettings>> regimes;
  for (int c = 0; c < config.n_conditions; ++c) regimes.push_back(operating_condition(c));

  detail::Engine rng(derive_seed(config.seed, 0x5F1EE7));
  std::vector<SyntheticUnit> units;
  units.reserve(static_cast<std::size_t>(config.n_units));

  for (int u = 0; u < config.n_units; ++u) {
    SyntheticUnit unit;
    unit.onset = detail::uniform_int(rng, config.fault_onset.min, config.fault_onset.max);
    const int span = detail::uniform_int(rng, config.degradation.min, config.degradation.max);
    const int life = unit.onset - 1 + span;
    unit.fault_mode = detail::uniform_int(rng, 0, config.n_fault_modes - 1);
    const double exponent = detail::uniform(rng, 1.3, 2.2);

    std::array<double, kNumSensors> wear{};
    for (std::size_t s = 0; s < kNumSensors; ++s) {
      wear[s] = prof[s].noise * detail::uniform(rng, -0.5, 0.5);
    }

    Trajectory& t = unit.trajectory;
    t.unit_id = u + 1;
    t.samples.resize(static_cast<std::size_t>(life));
    for (int cycle = 1; cycle <= life; ++cycle) {
      const auto& setting = regimes[detail::uniform_index(rng, regimes.size())];
      const auto norm = normalized(setting);
      const double health =
          cycle < unit.onset
              ? 0.0
              : std::pow(static_cast<double>(cycle - unit.onset + 1) / span, exponent);
      const double severity = 1.0 + 0.2 * norm[0];

      Sample& x = t.samples[static_cast<std::size_t>(cycle - 1)];
      std::copy(setting.begin(), setting.end(), x.begin());
      for (std::size_t s = 0; s < kNumSensors; ++s) {
        const SensorProfile& p = prof[s];
        double v = p.base + wear[s];
        for (std::size_t k = 0; k < kNumSettings; ++k) v += p.gain[k] * norm[k];
        v += p.drift[unit.fault_mode] * p.noise * severity * health;
        v += p.noise * detail::uniform(rng, -1.0, 1.0);
        x[kNumSettings + s] = v;
      }
    }
    units.push_back(std::move(unit));
  }
  return units;
}

std::vector<Trajectory> synthesize_fleet(const FleetConfig& config) {
  auto units = synthesize_units(config);
  std::vector<Trajectory> out;
  out.reserve(units.size());
  for (auto& u : units) out.push_back(std::move(u.trajectory));
  return out;
}

void write_synthetic_data_root(const std::filesystem::path& root,
                               const SyntheticRootConfig& config) {
  require(config.units_per_subset >= 1, "units_per_subset must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + root.string() + ": " + ec.message());

  struct Layout {
    SubsetId id;
    int conditions;
    int faults;
  };
  constexpr std::array<Layout, 4> layouts{{
      {SubsetId::FD001, 1, 1},
      {SubsetId::FD002, 6, 1},
      {SubsetId::FD003, 1, 2},
      {SubsetId::FD004, 6, 2},
  }};

  for (const auto& layout : layouts) {
    const auto sid = static_cast<std::uint64_t>(layout.id);
    FleetConfig fc;
    fc.n_units = config.units_per_subset;
    fc.n_conditions = layout.conditions;
    fc.n_fault_modes = layout.faults;

    fc.seed = derive_seed(config.seed, sid * 2);
    const auto train = synthesize_fleet(fc);

    fc.seed = derive_seed(config.seed, sid * 2 + 1);
    auto test = synthesize_fleet(fc);
    detail::Engine cut_rng(derive_seed(fc.seed, 0xC07));
    for (auto& t : test) {
      const int life = static_cast<int>(t.length());
      const int max_rul = std::min(life - 20, 200);
      const int rul = detail::uniform_int(cut_rng, 5, std::max(5, max_rul));
      t.samples.resize(static_cast<std::size_t>(life - rul));
      t.censored_rul = rul;
    }

    {
      std::ofstream out(trajectory_file(root, layout.id, Split::Alpha));
      if (!out) fail(ErrorCode::Io, "cannot write training file under " + root.string());
      write_cmapss(out, train);
    }
    {
      std::ofstream out(trajectory_file(root, layout.id, Split::Beta));
      if (!out) fail(ErrorCode::Io, "cannot write test file under " + root.string());
      write_cmapss(out, test);
    }
    {
      std::ofstream out(rul_file(root, layout.id));
      if (!out) fail(ErrorCode::Io, "cannot write RUL file under " + root.string());
      write_rul_list(out, test);
    }
  }
}

}  // namespace cosmo_rul
