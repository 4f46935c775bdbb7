#include <doctest.h>

#include <cmath>
#include <random>

#include "cosmo_rul/error.hpp"
#include "cosmo_rul/metrics.hpp"

using namespace cosmo_rul;

namespace {

UnitPrediction unit(int id, std::vector<double> truth, std::vector<double> pred) {
  UnitPrediction u;
  u.unit_id = id;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    u.cycles.push_back({static_cast<int>(i + 1), truth[i], pred[i]});
  }
  return u;
}

// Run-to-failure style truth: capped ramp down to 0.
UnitPrediction rtf_unit(int id, int length, double rel_err, int cap = 130) {
  UnitPrediction u;
  u.unit_id = id;
  for (int t = 1; t <= length; ++t) {
    const double y = std::min(cap, length - t);
    u.cycles.push_back({t, y, (1.0 + rel_err) * y});
  }
  return u;
}

}  // namespace

TEST_CASE("unit MAPE examples") {
  CHECK(*mape_unit(unit(1, {10, 5}, {10, 5})) == 0.0);
  CHECK(std::abs(*mape_unit(unit(1, {10, 5}, {5, 10})) - 0.75) < 1e-12);
  CHECK_FALSE(mape_unit(unit(1, {130, 130, 130}, {1, 2, 3}), 129).has_value());
  // y = 0 never counts
  CHECK(*mape_unit(unit(1, {2, 1, 0}, {2, 1, 5})) == 0.0);
}

TEST_CASE("fleet MAPE") {
  const std::vector<UnitPrediction> two{unit(1, {10}, {12}), unit(2, {10}, {14})};
  CHECK(std::abs(mape_fleet(two).mape - 0.3) < 1e-12);

  const std::vector<UnitPrediction> mixed{unit(1, {10}, {12}), unit(2, {130}, {0})};
  const MetricReport r = mape_fleet(mixed);
  CHECK(r.n_units_excluded == 1);
  CHECK(r.n_units_included == 1);
  CHECK(std::abs(r.mape - 0.2) < 1e-12);

  const std::vector<UnitPrediction> one{unit(1, {10, 5}, {5, 10})};
  CHECK(mape_fleet(one).mape == *mape_unit(one[0]));

  const std::vector<UnitPrediction> plateau{unit(1, {130}, {1}), unit(2, {140}, {3})};
  CHECK_THROWS_AS(mape_fleet(plateau), Error);
}

TEST_CASE("last-cycle RMSE") {
  CHECK(rmse_last_cycle(std::vector<UnitPrediction>{unit(1, {5, 4}, {1, 4})}) == 0.0);
  const std::vector<UnitPrediction> two{unit(1, {9, 10}, {9, 13}), unit(2, {20}, {16})};
  CHECK(std::abs(rmse_last_cycle(two) - 3.5355339059327378) < 1e-12);
  CHECK(std::abs(rmse_last_cycle(two) - std::sqrt(12.5)) < 1e-12);
  CHECK(rmse_last_cycle(std::vector<UnitPrediction>{unit(1, {7}, {4.5})}) == 2.5);
  CHECK_THROWS_AS(rmse_last_cycle(std::vector<UnitPrediction>{}), Error);
}

TEST_CASE("scale covariance and RMSE translation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1, 120);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<UnitPrediction> a, b, shifted;
    const double c = std::uniform_real_distribution<double>(0.1, 10)(rng);
    const double off = std::uniform_real_distribution<double>(-20, 20)(rng);
    for (int k = 0; k < 6; ++k) {
      std::vector<double> y, p;
      for (int i = 0; i < 8; ++i) {
        y.push_back(std::round(u(rng)));
        p.push_back(u(rng));
      }
      a.push_back(unit(k, y, p));
      std::vector<double> ys = y, ps = p;
      for (auto& v : ys) v *= c;
      for (auto& v : ps) v *= c;
      b.push_back(unit(k, ys, ps));
      std::vector<double> pshift = y;
      pshift.back() += off;
      shifted.push_back(unit(k, y, pshift));
    }
    // scaled copies keep every cycle below the limit
    CHECK(mape_fleet(b, 1000000).mape ==
          doctest::Approx(mape_fleet(a, 1000000).mape).epsilon(1e-12));
    CHECK(rmse_last_cycle(shifted) == doctest::Approx(std::abs(off)).epsilon(1e-12));
  }
}

TEST_CASE("MAPE against RUL limit") {
  std::vector<UnitPrediction> fleet;
  for (int k = 0; k < 10; ++k) fleet.push_back(rtf_unit(k, 150 + 7 * k, 0.0));
  const std::vector<int> limits{10, 50, 130};
  for (const auto& [lim, m] : mape_vs_rul_limit(fleet, limits)) CHECK(m == 0.0);

  std::vector<UnitPrediction> biased;
  for (int k = 0; k < 10; ++k) biased.push_back(rtf_unit(k, 150 + 7 * k, 0.125));
  for (const auto& [lim, m] : mape_vs_rul_limit(biased, limits)) {
    CHECK(std::abs(m - 0.125) < 1e-12);
  }

  const std::vector<int> one{130};
  CHECK(mape_vs_rul_limit(biased, one)[0].second == mape_fleet(biased, 130).mape);

  std::vector<UnitPrediction> noisy;
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    auto u = rtf_unit(k, 180, 0.0);
    for (auto& c : u.cycles) c.prediction += std::normal_distribution<double>(0, 10)(rng);
    noisy.push_back(u);
  }
  const std::vector<int> sweep{20, 40, 80, 129};
  const auto curve = mape_vs_rul_limit(noisy, sweep);
  CHECK(curve.back().second == mape_fleet(noisy, 129).mape);
  CHECK_THROWS_AS(mape_vs_rul_limit(noisy, std::vector<int>{50, 20}), Error);
}

TEST_CASE("aggregate uses the sample standard deviation") {
  const std::vector<double> v{1, 2, 3, 4};
  const Aggregate a = aggregate(v);
  CHECK(a.mean == 2.5);
  CHECK(std::abs(a.std - std::sqrt(5.0 / 3.0)) < 1e-12);
  CHECK(a.n == 4);
  CHECK(aggregate(std::vector<double>{7}).std == 0.0);
}
