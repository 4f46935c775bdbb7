#include <doctest.h>

#include <algorithm>
#include <random>

#include "cosmo_rul/cosmo.hpp"
#include "cosmo_rul/synth.hpp"

using namespace cosmo_rul;

namespace {

Sample at(double a, double b, double c) {
  Sample s{};
  s[0] = a;
  s[1] = b;
  s[2] = c;
  for (std::size_t j = 3; j < kNumFeatures; ++j) s[j] = 1000.0 + a * j;  // ignored columns
  return s;
}

std::vector<Sample> clouds(const std::vector<std::array<double, 3>>& centers, int per,
                           double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, spread);
  std::vector<Sample> out;
  for (const auto& c : centers) {
    for (int i = 0; i < per; ++i) out.push_back(at(c[0] + n(rng), c[1] + n(rng), c[2] + n(rng)));
  }
  return out;
}

}  // namespace

TEST_CASE("two separated clouds give 2") {
  const auto pts = clouds({{0, 0, 0}, {10, 10, 10}}, 60, 0.3, 1);
  CHECK(estimate_num_conditions(pts) == 2);
  const auto ev = setting_laplacian_spectrum(pts);
  // disconnected graph: two eigenvalues near zero
  CHECK(ev[0] < 1e-6);
  CHECK(ev[1] < 1e-3);
  CHECK(ev[2] > 0.1);
}

TEST_CASE("identical samples give 1") {
  std::vector<Sample> same(50, at(3, 0.5, 100));
  CHECK(estimate_num_conditions(same) == 1);
}

TEST_CASE("synthetic fleets recover their condition count") {
  for (int n : {1, 2, 3, 6}) {
    FleetConfig cfg;
    cfg.n_units = 10;
    cfg.n_conditions = n;
    cfg.seed = 100 + static_cast<std::uint64_t>(n);
    const auto fleet = synthesize_fleet(cfg);
    std::vector<Sample> samples;
    for (const auto& t : fleet) samples.insert(samples.end(), t.samples.begin(), t.samples.end());
    CHECK(estimate_num_conditions(samples) == n);
  }
}

TEST_CASE("result is invariant to sample order, also above the subsample cap") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    auto pts = clouds({{0, 0, 0}, {5, 0, 0}, {0, 5, 0}}, 250, 0.8, 10 + trial);
    const int base = estimate_num_conditions(pts);
    const auto base_ev = setting_laplacian_spectrum(pts);
    std::shuffle(pts.begin(), pts.end(), rng);
    CHECK(estimate_num_conditions(pts) == base);
    CHECK(setting_laplacian_spectrum(pts) == base_ev);
  }
}

TEST_CASE("spectrum is a normalized Laplacian spectrum") {
  const auto pts = clouds({{0, 0, 0}, {3, 3, 3}, {9, 0, 1}}, 40, 1.0, 8);
  const auto ev = setting_laplacian_spectrum(pts);
  CHECK(std::is_sorted(ev.begin(), ev.end()));
  CHECK(ev.front() > -1e-9);
  CHECK(ev.back() < 2.0 + 1e-9);
}

TEST_CASE("result stays within [1, max_k]") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Sample> pts;
    const int n = 2 + trial * 5;
    for (int i = 0; i < n; ++i) pts.push_back(at(u(rng), u(rng), u(rng)));
    EigengapOptions o;
    o.max_k = 2 + trial % 9;
    const int r = estimate_num_conditions(pts, o);
    CHECK(r >= 1);
    CHECK(r <= o.max_k);
  }
}
