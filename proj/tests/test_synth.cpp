#include <doctest.h>

#include <algorithm>
#include <set>

#include "cosmo_rul/error.hpp"
#include "cosmo_rul/synth.hpp"

using namespace cosmo_rul;

namespace {

std::set<std::array<double, 3>> triples(const std::vector<Trajectory>& fleet) {
  std::set<std::array<double, 3>> out;
  for (const auto& t : fleet) {
    for (const auto& s : t.samples) out.insert({s[0], s[1], s[2]});
  }
  return out;
}

}  // namespace

TEST_CASE("same seed, same fleet") {
  FleetConfig cfg;
  cfg.n_units = 8;
  cfg.n_conditions = 6;
  cfg.seed = 21;
  CHECK(synthesize_fleet(cfg) == synthesize_fleet(cfg));
  FleetConfig other = cfg;
  other.seed = 22;
  CHECK_FALSE(synthesize_fleet(cfg) == synthesize_fleet(other));
}

TEST_CASE("condition counts") {
  for (int n : {1, 2, 3, 6}) {
    FleetConfig cfg;
    cfg.n_units = 10;
    cfg.n_conditions = n;
    cfg.seed = 4;
    CHECK(triples(synthesize_fleet(cfg)).size() == static_cast<std::size_t>(n));
  }
}

TEST_CASE("trajectories are run-to-failure with consecutive cycles") {
  FleetConfig cfg;
  cfg.n_units = 20;
  cfg.seed = 8;
  const auto units = synthesize_units(cfg);
  for (const auto& u : units) {
    CHECK(u.trajectory.run_to_failure());
    CHECK(u.onset >= cfg.fault_onset.min);
    CHECK(u.onset <= cfg.fault_onset.max);
    CHECK(static_cast<int>(u.trajectory.length()) >= u.onset - 1 + cfg.degradation.min);
  }
}

TEST_CASE("degradation channels flat before onset, drifting after") {
  FleetConfig cfg;
  cfg.n_units = 15;
  cfg.n_conditions = 1;
  cfg.seed = 13;
  for (const auto& u : synthesize_units(cfg)) {
    const auto& xs = u.trajectory.samples;
    const auto pre_end = static_cast<std::size_t>(u.onset - 1);
    for (std::size_t s = 0; s < kNumSensors; ++s) {
      if (!is_degradation_channel(s, u.fault_mode)) continue;
      const std::size_t col = kNumSettings + s;
      const double bound = sensor_noise_bound(s);
      double lo = 1e300, hi = -1e300, pre_sum = 0;
      for (std::size_t t = 0; t < pre_end; ++t) {
        lo = std::min(lo, xs[t][col]);
        hi = std::max(hi, xs[t][col]);
        pre_sum += xs[t][col];
      }
      if (pre_end >= 2) CHECK(hi - lo <= 2 * bound + 1e-9);
      if (pre_end == 0) continue;
      const double pre_mean = pre_sum / static_cast<double>(pre_end);
      double tail = 0;
      for (std::size_t t = xs.size() - 5; t < xs.size(); ++t) tail += xs[t][col];
      tail /= 5;
      CHECK(std::abs(tail - pre_mean) > 2 * bound);
      // window means move monotonically once the ramp is under way
      const std::size_t span = xs.size() - pre_end;
      const std::size_t w = span / 4;
      if (w < 10) continue;
      std::vector<double> means;
      for (std::size_t q = 0; q < 4; ++q) {
        double m = 0;
        for (std::size_t t = pre_end + q * w; t < pre_end + (q + 1) * w; ++t) m += xs[t][col];
        means.push_back(m / static_cast<double>(w));
      }
      const double dir = tail > pre_mean ? 1.0 : -1.0;
      CHECK(dir * (means[3] - means[1]) > 0);
    }
  }
}

TEST_CASE("invalid configs") {
  FleetConfig cfg;
  cfg.fault_onset = {50, 40};
  CHECK_THROWS_AS(synthesize_fleet(cfg), Error);
  cfg = {};
  cfg.n_units = 0;
  CHECK_THROWS_AS(synthesize_fleet(cfg), Error);
  cfg = {};
  cfg.n_conditions = 0;
  CHECK_THROWS_AS(synthesize_fleet(cfg), Error);
}
