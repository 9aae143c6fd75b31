#include <doctest.h>

#include <cmath>
#include <limits>

#include "qlil/classfn.hpp"
#include "qlil/error.hpp"

using namespace qlil;

TEST_CASE("boundary families") {
  const auto h = ClassFunction::scaled_lil(1.0);
  CHECK(h(std::exp(std::exp(1.0))) == doctest::Approx(1.414213562373095).epsilon(1e-14));
  CHECK(ClassFunction::power_loglog(2.0)(std::exp(std::exp(4.0))) == doctest::Approx(4.0));
  CHECK(h.domain_floor() > std::exp(1.0));
  CHECK_THROWS_AS(ClassFunction::scaled_lil(0.0), PreconditionError);
  CHECK_THROWS_AS(ClassFunction::power_loglog(-1.0), PreconditionError);
}

TEST_CASE("user tables interpolate in log time") {
  const auto h = ClassFunction::user_table({{10.0, 1.0}, {1000.0, 3.0}});
  CHECK(h(10.0) == 1.0);
  CHECK(h(100.0) == doctest::Approx(2.0));
  CHECK(h(1000.0) == 3.0);
  CHECK(h(1.0) == 1.0);
  CHECK(h(1e9) == 3.0);

  const auto inf = ClassFunction::user_table({{10.0, 0.0}, {20.0, std::numeric_limits<double>::infinity()}});
  CHECK(std::isinf(inf(30.0)));

  CHECK_THROWS_AS(ClassFunction::user_table({}), PreconditionError);
  CHECK_THROWS_AS(ClassFunction::user_table({{10.0, 2.0}, {20.0, 1.0}}), PreconditionError);
  CHECK_THROWS_AS(ClassFunction::user_table({{20.0, 1.0}, {10.0, 2.0}}), PreconditionError);
}

TEST_CASE("integral test on the scaled iterated-logarithm family") {
  for (double c : {0.6, 0.8}) {
    CHECK(integral_test(ClassFunction::scaled_lil(c)).verdict == Verdict::Lower);
  }
  for (double c : {1.2, 1.5, 2.0}) {
    const auto r = integral_test(ClassFunction::scaled_lil(c));
    CHECK(r.verdict == Verdict::Upper);
    CHECK(r.exponent_estimate == doctest::Approx(c * c).epsilon(1e-6));
  }
  CHECK(integral_test(ClassFunction::power_loglog(2.0)).verdict == Verdict::Upper);
  CHECK(integral_test(ClassFunction::power_loglog(1.0)).verdict == Verdict::Lower);
}

TEST_CASE("verdicts are monotone in the coefficient") {
  auto rank = [](Verdict v) { return v == Verdict::Lower ? 0 : v == Verdict::Indeterminate ? 1 : 2; };
  int previous = 0;
  for (double c = 0.3; c <= 2.5; c += 0.05) {
    const int current = rank(integral_test(ClassFunction::scaled_lil(c)).verdict);
    CHECK(current >= previous);
    previous = current;
  }
}

TEST_CASE("integral test preconditions") {
  const auto h = ClassFunction::scaled_lil(1.2);
  CHECK_THROWS_AS(integral_test(h, 100.0), PreconditionError);
  CHECK_THROWS_AS(integral_test(h, 1e12, 0.0), PreconditionError);
  CHECK(integral_test(ClassFunction::user_table({{10.0, 0.0}, {20.0, std::numeric_limits<double>::infinity()}}))
            .verdict == Verdict::Upper);
}

TEST_CASE("partial integrals are nondecreasing") {
  const auto r = integral_test(ClassFunction::scaled_lil(1.0));
  for (std::size_t i = 1; i < r.tail_partial_integrals.size(); ++i) {
    CHECK(r.tail_partial_integrals[i].t > r.tail_partial_integrals[i - 1].t);
    CHECK(r.tail_partial_integrals[i].value >= r.tail_partial_integrals[i - 1].value);
  }
}

TEST_CASE("condition on the decay function") {
  for (double a : {0.2, 0.4, 1.0}) {
    CHECK(condition_c2_check(DecayFunction::power(a)).verdict == C2Verdict::Finite);
  }
  CHECK(condition_c2_check(DecayFunction::exponential()).verdict == C2Verdict::Finite);
  CHECK(condition_c2_check(DecayFunction::inverse_loglog_squared()).verdict == C2Verdict::Infinite);

  const auto r = condition_c2_check(DecayFunction::power(0.4));
  for (std::size_t i = 1; i < r.partial_integrals.size(); ++i) {
    CHECK(r.partial_integrals[i].value >= r.partial_integrals[i - 1].value);
  }
  CHECK(r.tail_estimate >= 0.0);

  DecayFunction bad{"zero", [](double) { return -std::numeric_limits<double>::infinity(); }};
  CHECK_THROWS_AS(condition_c2_check(bad), PreconditionError);
  DecayFunction growing{"growing", [](double s) { return s; }};
  CHECK_THROWS_AS(condition_c2_check(growing), PreconditionError);
}

TEST_CASE("decay function parsing") {
  CHECK(DecayFunction::parse("power:0.5")(100.0) == doctest::Approx(0.1));
  CHECK(DecayFunction::parse("exp")(2.0) == doctest::Approx(std::exp(-2.0)));
  CHECK(DecayFunction::parse("inv_loglog_sq")(std::exp(std::exp(2.0))) == doctest::Approx(0.25));
  CHECK_THROWS_AS(DecayFunction::parse("power:-1"), PreconditionError);
  CHECK_THROWS_AS(DecayFunction::parse("cubic"), PreconditionError);
}

TEST_CASE("series diagnostics track convergence") {
  const auto grid = geometric_grid(10.0, 1e300, 600);
  const auto upper = series_diagnostics(ClassFunction::scaled_lil(1.2), grid);
  const auto lower = series_diagnostics(ClassFunction::scaled_lil(0.8), grid);
  auto at = [&](const std::vector<SeriesRow>& rows, double t) {
    for (const auto& row : rows) {
      if (row.t >= t) return row;
    }
    return rows.back();
  };

  // Convergent pair: tail increments shrink.
  const double b_mid = at(upper, 1e100).s_b, b_late = at(upper, 1e200).s_b, b_end = upper.back().s_b;
  CHECK((b_end - b_late) < (b_late - b_mid));
  const double c_mid = at(upper, 1e100).s_c, c_late = at(upper, 1e200).s_c, c_end = upper.back().s_c;
  CHECK((c_end - c_late) < (c_late - c_mid));

  // Divergent pair keeps growing.
  CHECK(lower.back().s_c > 2.0 * at(lower, 1e12).s_c);
  CHECK(lower.back().s_b > 2.0 * at(lower, 1e12).s_b);

  for (const auto& row : upper) {
    CHECK_FALSE(row.s_a.has_value());
    CHECK(row.ratio_b_over_c == doctest::Approx(row.s_b / row.s_c));
  }
}

TEST_CASE("series C = 0 reproduces S_B") {
  const auto grid = geometric_grid(10.0, 1e20, 50);
  const auto rows = series_diagnostics(ClassFunction::scaled_lil(1.0), grid, std::nullopt, {0.0});
  for (const auto& row : rows) CHECK(row.s_d == row.s_b);
  const auto shifted = series_diagnostics(ClassFunction::scaled_lil(1.0), grid, std::nullopt, {2.0});
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(shifted[i].s_d < rows[i].s_b);
}

TEST_CASE("series with crossing probabilities and unit weights") {
  const auto grid = geometric_grid(10.0, 1000.0, 5);
  const std::vector<double> probs{0.5, 0.4, 0.3, 0.2, 0.1};
  const auto rows = series_diagnostics(ClassFunction::scaled_lil(1.0), grid, std::span<const double>(probs),
                                       {1.0, SeriesWeighting::Unit});
  double expected = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    expected += std::log(std::log(grid[i])) / grid[i] * probs[i];
    REQUIRE(rows[i].s_a.has_value());
    CHECK(*rows[i].s_a == doctest::Approx(expected).epsilon(1e-13));
    CHECK(rows[i].n == i + 1);
  }
  const std::vector<double> short_probs{0.5, 0.4};
  CHECK_THROWS_AS(series_diagnostics(ClassFunction::scaled_lil(1.0), grid, std::span<const double>(short_probs)),
                  PreconditionError);
  const std::vector<double> early{2.0, 10.0};
  CHECK_THROWS_AS(series_diagnostics(ClassFunction::scaled_lil(1.0), early), PreconditionError);
  const std::vector<double> unsorted{100.0, 10.0};
  CHECK_THROWS_AS(series_diagnostics(ClassFunction::scaled_lil(1.0), unsorted), PreconditionError);
}

TEST_CASE("envelope") {
  const auto grid = geometric_grid(10.0, 1e6, 7);
  const auto env = envelope(ClassFunction::scaled_lil(1.0), grid);
  REQUIRE(env.size() == grid.size());
  for (std::size_t i = 1; i < env.size(); ++i) {
    CHECK(env[i].first > env[i - 1].first);
    CHECK(env[i].second >= env[i - 1].second);
  }
  const auto table = ClassFunction::user_table({{10.0, 1.0}, {100.0, 2.0}, {1000.0, 2.5}});
  const std::vector<double> knots{10.0, 100.0, 1000.0};
  const auto back = envelope(table, knots);
  CHECK(back[0].second == 1.0);
  CHECK(back[1].second == 2.0);
  CHECK(back[2].second == 2.5);
}

TEST_CASE("geometric grid") {
  const auto g = geometric_grid(100.0, 6400.0, 4);
  REQUIRE(g.size() == 4);
  CHECK(g.front() == 100.0);
  CHECK(g.back() == 6400.0);
  CHECK(g[1] == doctest::Approx(400.0));
  CHECK_THROWS_AS(geometric_grid(10.0, 5.0, 3), PreconditionError);
}
