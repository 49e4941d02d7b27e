#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include <xycount/moments.hpp>
#include <xycount/sweep.hpp>

using namespace xycount;
using Catch::Matchers::WithinAbs;

namespace {

ModelParams params(int n, double gamma, double kappa) {
  ModelParams p;
  p.n_sites = n;
  p.gamma = gamma;
  p.kappa = kappa;
  return p;
}

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(a + (b - a) * i / (count - 1));
  return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("sweep input validation", "[sweep]") {
  const auto p = params(100, 1.0, 1.0);
  const std::vector<double> empty;
  CHECK_THROWS_AS(derivative_sweep(p, empty, 1e-3), InvalidInput);
  const std::vector<double> unsorted = {0.5, 0.4};
  CHECK_THROWS_AS(derivative_sweep(p, unsorted, 1e-3), InvalidInput);
  const std::vector<double> coarse = {0.5, 0.5005};
  CHECK_THROWS_AS(derivative_sweep(p, coarse, 1e-3), InvalidInput);
  const std::vector<double> ok = {0.5};
  CHECK_THROWS_AS(derivative_sweep(p, ok, 0.0), InvalidInput);
  CHECK_THROWS_AS(derivative_sweep(params(102, 1.0, 1.0), ok, 1e-3, {CountMode::every_second, 1}),
                  InvalidInput);
}

TEST_CASE("single-point sweep equals direct library calls", "[sweep]") {
  auto p = params(300, 0.7, 0.8);
  p.g = 0.6;
  const std::vector<double> grid = {0.6};
  const auto recs = derivative_sweep(p, grid, 1e-3);
  REQUIRE(recs.size() == 1);
  const auto s = build_spectrum(p);
  CHECK_THAT(recs[0].mean_per_site, WithinAbs(mean_by_recurrence(s, 0.8, 150) / 300, 1e-14));
  CHECK_THAT(recs[0].var_per_site, WithinAbs(variance_exact(s, 0.8, 150) / 300, 1e-14));
  CHECK(recs[0].fd_step == 1e-3);
  CHECK(recs[0].classification == Classification::sub_poissonian);
  CHECK_THAT(recs[0].moments.parity_sum, WithinAbs(parity_product(s, 0.8, 150), 1e-14));
}

TEST_CASE("thread count never changes results", "[sweep]") {
  const auto grid = linspace(0.0, 3.0, 37);
  const auto p = params(500, 0.5, 0.9);
  const auto one = derivative_sweep(p, grid, 1e-3, {CountMode::total, 1});
  const auto four = derivative_sweep(p, grid, 1e-3, {CountMode::total, 4});
  REQUIRE(one.size() == four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].params.g == grid[i]);
    CHECK(same_bits(one[i].mean_per_site, four[i].mean_per_site));
    CHECK(same_bits(one[i].var_per_site, four[i].var_per_site));
    CHECK(same_bits(one[i].d_mean_dg, four[i].d_mean_dg));
    CHECK(same_bits(one[i].d_var_dg, four[i].d_var_dg));
  }
}

TEST_CASE("records near the critical field are flagged", "[sweep]") {
  const std::vector<double> grid = {0.5, 0.995, 1.0, 1.02};
  const auto recs = derivative_sweep(params(200, 1.0, 1.0), grid, 1e-3);
  CHECK_FALSE(recs[0].near_critical);
  CHECK(recs[1].near_critical);
  CHECK(recs[2].near_critical);
  CHECK_FALSE(recs[3].near_critical);
}

TEST_CASE("isotropic chain: mean is constant above the critical field", "[sweep]") {
  const auto grid = linspace(1.05, 3.0, 20);
  for (const auto& r : derivative_sweep(params(400, 0.0, 1.0), grid, 1e-3)) {
    CHECK(r.d_mean_dg == 0.0);
    CHECK(r.var_per_site == 0.0);
  }
}

TEST_CASE("Ising variance has a kink at g = 1", "[sweep]") {
  const std::vector<double> grid = {0.98, 0.99, 1.01, 1.02};
  const auto recs = derivative_sweep(params(20000, 1.0, 1.0), grid, 1e-4);
  CHECK_THAT(recs[0].d_var_dg, WithinAbs(0.0, 1e-6));
  CHECK_THAT(recs[1].d_var_dg, WithinAbs(0.0, 1e-6));
  CHECK(recs[2].d_var_dg < -0.45);
  CHECK(recs[3].d_var_dg < -0.45);
}

TEST_CASE("Ising mean derivative follows the logarithmic law near g = 1", "[sweep]") {
  // Slope against ln|g - 1| between |g - 1| = 1e-3 and 3e-3, where the
  // asymptotic regime is reached.
  auto p = params(200000, 1.0, 1.0);
  const std::vector<double> grid = {1.001, 1.003};
  const auto recs = derivative_sweep(p, grid, 1e-5);
  const double slope = (recs[1].d_mean_dg - recs[0].d_mean_dg) / std::log(3.0);
  CHECK_THAT(slope, WithinAbs(-1.0 / (2.0 * std::numbers::pi), 0.01));
}

TEST_CASE("every-second Fano factor crosses one near g = 0.5", "[sweep]") {
  const auto grid = linspace(0.1, 0.9, 81);
  const auto recs = derivative_sweep(params(400, 1.0, 1.0), grid, 1e-4, {CountMode::every_second, 1});
  const auto changes = classification_changes(recs);
  REQUIRE(changes.size() == 1);
  CHECK_THAT(changes[0], WithinAbs(0.5, 0.05));
  CHECK(recs.front().classification == Classification::super_poissonian);
  CHECK(recs.back().classification == Classification::sub_poissonian);
}

TEST_CASE("ferromagnetic sign: one classification change below g = 1", "[sweep]") {
  // With the mean replaced by N (1/2 - mean/N) the low-field side is
  // super-Poissonian (the transformed mean vanishes at g = 0).
  auto p = params(2000, 0.5, 1.0);
  p.magnetic_sign = MagneticSign::ferromagnetic;
  const auto grid = linspace(0.01, 2.0, 200);
  const auto recs = derivative_sweep(p, grid, 1e-4);
  const auto changes = classification_changes(recs);
  REQUIRE(changes.size() == 1);
  CHECK(changes[0] > 0.0);
  CHECK(changes[0] < 1.0);
  CHECK(recs.front().classification == Classification::super_poissonian);
  CHECK(recs.back().classification == Classification::sub_poissonian);
  // Variance is untouched by the transform.
  auto afm = p;
  afm.magnetic_sign = MagneticSign::antiferromagnetic;
  const auto ref = derivative_sweep(afm, grid, 1e-4);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].var_per_site == ref[i].var_per_site);
    CHECK_THAT(recs[i].mean_per_site, WithinAbs(0.5 - ref[i].mean_per_site, 1e-14));
  }
}
