#include "cosmo_rul/metrics.hpp"

#include <cmath>
#include <string>

#include "cosmo_rul/error.hpp"

namespace cosmo_rul {

namespace {

void check_unit(const UnitPrediction& unit) {
  const std::string who = "unit " + std::to_string(unit.unit_id);
  for (std::size_t i = 0; i < unit.cycles.size(); ++i) {
    const auto& c = unit.cycles[i];
    if (!(c.truth >= 0.0) || !std::isfinite(c.truth)) {
      fail(ErrorCode::InvalidArgument, who + ": truths must be finite and nonnegative");
    }
    if (!std::isfinite(c.prediction)) {
      fail(ErrorCode::Numeric, who + ": non-finite prediction at cycle " +
                                   std::to_string(c.cycle));
    }
    if (i > 0 && c.cycle <= unit.cycles[i - 1].cycle) {
      fail(ErrorCode::InvalidArgument, who + ": cycles must be strictly ascending");
    }
  }
}

}  // namespace

std::optional<double> mape_unit(const UnitPrediction& unit, int rul_limit) {
  require(rul_limit >= 1, "rul_limit must be >= 1");
  check_unit(unit);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : unit.cycles) {
    if (c.truth < 1.0 || c.truth > rul_limit) continue;
    sum += std::abs(c.truth - c.prediction) / c.truth;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

MetricReport mape_fleet(std::span<const UnitPrediction> units, int rul_limit) {
  require(!units.empty(), "fleet MAPE needs at least one unit");
  MetricReport report;
  report.rul_limit = rul_limit;
  double sum = 0.0;
  for (const auto& u : units) {
    if (auto m = mape_unit(u, rul_limit)) {
      sum += *m;
      ++report.n_units_included;
    } else {
      ++report.n_units_excluded;
    }
  }
  if (report.n_units_included == 0) {
    fail(ErrorCode::InvalidArgument, "all " + std::to_string(units.size()) +
                                         " units have no cycle with 1 <= RUL <= " +
                                         std::to_string(rul_limit));
  }
  report.mape = sum / static_cast<double>(report.n_units_included);
  report.rmse_last_cycle = rmse_last_cycle(units);
  return report;
}

double rmse_last_cycle(std::span<const UnitPrediction> units) {
  require(!units.empty(), "last-cycle RMSE needs at least one unit");
  double sum = 0.0;
  for (const auto& u : units) {
    if (u.cycles.empty()) {
      fail(ErrorCode::InvalidArgument, "unit " + std::to_string(u.unit_id) + " has no cycles");
    }
    check_unit(u);
    const double e = u.cycles.back().truth - u.cycles.back().prediction;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(units.size()));
}

std::vector<std::pair<int, double>> mape_vs_rul_limit(std::span<const UnitPrediction> units,
                                                      std::span<const int> limits) {
  require(!limits.empty(), "at least one RUL limit is required");
  for (std::size_t i = 1; i < limits.size(); ++i) {
    require(limits[i] > limits[i - 1], "RUL limits must be strictly ascending");
  }
  std::vector<std::pair<int, double>> curve;
  curve.reserve(limits.size());
  for (int limit : limits) curve.emplace_back(limit, mape_fleet(units, limit).mape);
  return curve;
}

Aggregate aggregate(std::span<const double> values) {
  Aggregate a;
  a.n = values.size();
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(a.n - 1));
  }
  return a;
}

}  // namespace cosmo_rul
