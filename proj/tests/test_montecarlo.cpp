#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qlil/error.hpp"
#include "qlil/montecarlo.hpp"

using namespace qlil;

namespace {

ExperimentConfig base_config(std::vector<double> grid, std::uint64_t n) {
  ExperimentConfig c;
  c.grid = std::move(grid);
  c.replications = n;
  c.master_seed = 42;
  return c;
}

bool same(const NormalityReport& a, const NormalityReport& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& x = a.rows[i];
    const auto& y = b.rows[i];
    if (x.used != y.used || x.ks_theta != y.ks_theta || x.ks_phi != y.ks_phi ||
        x.mean_z_theta != y.mean_z_theta || x.mean_z_phi != y.mean_z_phi) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("replications are independent of the worker count") {
  auto c = base_config({50.0, 200.0}, 40);
  const auto serial = run_paths(c);
  c.parallelism = 4;
  const auto parallel = run_paths(c);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].replication == i);
    CHECK(parallel[i].replication == i);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& a = serial[i].checkpoints[k];
      const auto& b = parallel[i].checkpoints[k];
      CHECK(a.a_count == b.a_count);
      CHECK(a.d_count == b.d_count);
      CHECK(a.idle == b.idle);
      CHECK(a.theta_hat == b.theta_hat);
      CHECK(a.z_phi == b.z_phi);
    }
  }
}

TEST_CASE("aggregates do not depend on record order") {
  auto c = base_config({100.0, 400.0, 1600.0}, 300);
  const auto records = run_paths(c);
  auto shuffled = records;
  std::mt19937_64 g(7);
  std::shuffle(shuffled.begin(), shuffled.end(), g);
  CHECK(same(summarize_normality(c, records), summarize_normality(c, shuffled)));

  const auto c1a = summarize_condition_c1(c, records);
  const auto c1b = summarize_condition_c1(c, shuffled);
  for (std::size_t k = 0; k < c1a.rows.size(); ++k) {
    CHECK(c1a.rows[k].mean_a == c1b.rows[k].mean_a);
    CHECK(c1a.rows[k].freq_d == c1b.rows[k].freq_d);
  }
  const auto ca = summarize_consistency(c, records);
  const auto cb = summarize_consistency(c, shuffled);
  for (std::size_t k = 0; k < ca.rows.size(); ++k) {
    CHECK(ca.rows[k].mae_theta == cb.rows[k].mae_theta);
  }
}

TEST_CASE("normality summary") {
  auto c = base_config({200.0, 800.0}, 400);
  const auto report = run_normality(c);
  REQUIRE(report.rows.size() == 2);
  for (const auto& row : report.rows) {
    CHECK(row.used + row.excluded == 400);
    // Sampling error plus a finite-sample bias of order T^(-1/2).
    const double tol = 3.0 / std::sqrt(double(row.used)) + 3.0 / std::sqrt(row.T);
    CHECK(std::abs(row.mean_z_theta) <= tol);
    CHECK(std::abs(row.mean_z_phi) <= tol);
    CHECK(row.ks_theta <= 1.63 / std::sqrt(double(row.used)) + 0.05);
    CHECK(row.envelope_25 == doctest::Approx(25.0 * std::pow(row.T, -0.2)));
  }

  // A single replication: KS is max(Phi(z), 1 - Phi(z)).
  const auto one = summarize_normality(c, {run_paths(base_config({200.0, 800.0}, 1))[0]});
  CHECK(one.rows[0].ks_theta >= 0.5);
  CHECK(one.rows[0].ks_theta <= 1.0);

  CHECK_THROWS_AS(run_normality(base_config({200.0}, 100)), PreconditionError);
}

TEST_CASE("too many unestimable windows") {
  // At T = 0.01 nearly every window lacks an arrival.
  auto c = base_config({0.01}, 200);
  CHECK_THROWS_AS(summarize_normality(c, run_paths(c)), DataError);
}

TEST_CASE("condition C1 frequencies") {
  auto c = base_config({250.0, 1000.0}, 500);
  const auto report = run_condition_c1(c);
  for (const auto& row : report.rows) {
    CHECK(row.mean_a == doctest::Approx(row.T).epsilon(0.05));
    CHECK(row.freq_a >= 0.0);
    CHECK(row.freq_a <= 1.0);
    CHECK(row.se_a == doctest::Approx(std::sqrt(row.freq_a * (1 - row.freq_a) / 500.0)));
  }
  c.epsilon = {"ten", [](double) { return std::log(10.0); }};
  for (const auto& row : run_condition_c1(c).rows) {
    CHECK(row.freq_a == 0.0);
    CHECK(row.freq_d == 0.0);
  }
  CHECK_THROWS_AS(run_condition_c1(base_config({250.0}, 499)), PreconditionError);
}

TEST_CASE("crossing frequencies for trivial boundaries") {
  const auto grid = geometric_grid(1000.0, 32000.0, 6);
  auto c = base_config(grid, 500);
  c.boundaries.push_back(ClassFunction::user_table({{1.0, 0.0}, {1e9, 0.0}}));
  c.boundaries.push_back(
      ClassFunction::user_table({{1.0, std::numeric_limits<double>::infinity()}, {1e9, std::numeric_limits<double>::infinity()}}));
  const auto report = run_crossings(c);
  REQUIRE(report.boundaries.size() == 2);
  const double se = std::sqrt(0.25 / 500.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(report.boundaries[0].crossing_freq[k] - 0.5) <= 3.0 * se);
    CHECK(report.boundaries[1].crossing_freq[k] == 0.0);
    CHECK(report.boundaries[1].tail_fraction[k] == 0.0);
  }
  const auto& tail = report.boundaries[0].tail_fraction;
  for (std::size_t k = 1; k < tail.size(); ++k) CHECK(tail[k] <= tail[k - 1]);
  for (std::size_t k = 0; k < tail.size(); ++k) {
    CHECK(tail[k] >= report.boundaries[0].crossing_freq[k]);
  }

  // Crossing frequencies line up with the grid for the series diagnostics.
  const auto rows = series_diagnostics(ClassFunction::scaled_lil(1.0), report.grid,
                                       std::span<const double>(report.boundaries[0].crossing_freq));
  REQUIRE(rows.size() == grid.size());
  CHECK(rows.back().s_a.has_value());
}

TEST_CASE("crossing preconditions") {
  auto c = base_config(geometric_grid(100.0, 1e5, 6), 500);
  CHECK_THROWS_AS(run_crossings(c), PreconditionError);  // no boundary
  c.boundaries.push_back(ClassFunction::scaled_lil(1.0));
  c.grid = geometric_grid(100.0, 1e5, 5);
  CHECK_THROWS_AS(run_crossings(c), PreconditionError);
  c.grid = {100, 200, 400, 800, 1600, 3300};
  CHECK_THROWS_AS(run_crossings(c), PreconditionError);
  c.grid = geometric_grid(100.0, 1e5, 6);
  c.replications = 100;
  CHECK_THROWS_AS(run_crossings(c), PreconditionError);
}

TEST_CASE("consistency ratios") {
  auto c = base_config({100.0, 400.0, 1600.0}, 500);
  const auto report = run_consistency(c);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[0].ratio_theta.has_value());
  CHECK_FALSE(report.rows[2].ratio_theta.has_value());
  CHECK(*report.rows[0].ratio_theta == doctest::Approx(0.5).epsilon(0.2));
  CHECK(*report.rows[1].ratio_phi == doctest::Approx(0.5).epsilon(0.2));

  c.grid = {100.0, 300.0, 900.0};
  CHECK_THROWS_AS(run_consistency(c), PreconditionError);
}

TEST_CASE("stability warning") {
  auto c = base_config({10.0}, 1);
  CHECK_FALSE(stability_warning(c).has_value());
  c.stability_check = true;
  CHECK_FALSE(stability_warning(c).has_value());
  c.service.param = 0.5;
  CHECK(stability_warning(c).has_value());
}

TEST_CASE("invalid true parameters") {
  auto c = base_config({10.0}, 1);
  c.arrival.param = -1.0;
  CHECK_THROWS_AS(run_paths(c), DomainError);
  c = base_config({10.0, 5.0}, 1);
  CHECK_THROWS_AS(run_paths(c), PreconditionError);
}
