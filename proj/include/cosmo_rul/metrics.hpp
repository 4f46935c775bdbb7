#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cosmo_rul {

// Cycles with truth above this are on the target plateau and are ignored.
inline constexpr int kDefaultRulLimit = 129;

struct CyclePrediction {
  int cycle = 0;
  double truth = 0.0;
  double prediction = 0.0;
};

struct UnitPrediction {
  int unit_id = 0;
  std::vector<CyclePrediction> cycles;  // strictly ascending cycle
};

struct MetricReport {
  double mape = 0.0;
  double rmse_last_cycle = 0.0;
  std::size_t n_units_included = 0;
  std::size_t n_units_excluded = 0;
  int rul_limit = kDefaultRulLimit;
};

// Mean of |y - yhat| / y over cycles with 1 <= y <= rul_limit. Empty when the
// unit has no such cycle (excluded from the fleet average).
std::optional<double> mape_unit(const UnitPrediction& unit, int rul_limit = kDefaultRulLimit);

// Unweighted mean of per-unit MAPE over included units, plus last-cycle RMSE
// over all units. Throws when every unit is excluded.
MetricReport mape_fleet(std::span<const UnitPrediction> units,
                        int rul_limit = kDefaultRulLimit);

// sqrt(mean over units of (y_last - yhat_last)^2).
double rmse_last_cycle(std::span<const UnitPrediction> units);

// Fleet MAPE at each limit, computed independently. Limits strictly ascending.
std::vector<std::pair<int, double>> mape_vs_rul_limit(std::span<const UnitPrediction> units,
                                                      std::span<const int> limits);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for fewer than 2 values
  std::size_t n = 0;
};

Aggregate aggregate(std::span<const double> values);

}  // namespace cosmo_rul
