#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "qlil/error.hpp"
#include "qlil/expfam.hpp"
#include "qlil/numeric.hpp"

using namespace qlil;

namespace {

// Independent of the library's Gauss-Kronrod path.
template <class F>
double integrate_half_line(F f, double a = 0.0) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f, a, std::numeric_limits<double>::infinity());
}

double relative_error(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace

TEST_CASE("exponential density and domain") {
  const auto m = exponential_model();
  CHECK(m.density(0.5, 2.0) == doctest::Approx(0.7357588823428846).epsilon(1e-14));
  CHECK(m.density(-1.0, 2.0) == 0.0);
  CHECK_THROWS_AS(m.density(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(m.density(1.0, -1.0), DomainError);
}

TEST_CASE("gamma density uses the rate parameterization") {
  const auto m = gamma_model(2.0);
  // rate 4 at x = 0.25: 16 * 0.25 * e^-1 / Gamma(2)
  CHECK(m.density(0.25, 4.0) == doctest::Approx(1.4715177646857693).epsilon(1e-14));
  CHECK(m.density(-1.0, 4.0) == 0.0);
}

TEST_CASE("mean map and its inverse") {
  const auto e = exponential_model();
  CHECK(e.eta(2.0) == -0.5);
  CHECK(e.eta_inv(-0.5) == 2.0);
  CHECK(e.variance(2.0) == 0.25);

  const auto g = gamma_model(2.0);
  CHECK(g.eta(4.0) == doctest::Approx(-0.5));
  const double eh = integrate_half_line([&](double x) { return g.stat(x) * g.density(x, 4.0); });
  CHECK(eh == doctest::Approx(g.eta(4.0)).epsilon(1e-10));
  CHECK(g.eta_inv(-0.5) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("inversion outside the range of eta fails") {
  const auto e = exponential_model();
  CHECK_THROWS_AS(e.eta_inv(0.0), InversionError);
  CHECK_THROWS_AS(e.eta_inv(0.5), InversionError);
  CHECK_THROWS_AS(e.eta_inv_numeric(0.0), InversionError);
  CHECK_THROWS_AS(e.eta_inv_numeric(std::nan("")), InversionError);
  CHECK_THROWS_AS(gamma_model(3.0).eta_inv(1.0), InversionError);
}

TEST_CASE("eta inverse round trip across the domain") {
  for (const auto& m : {exponential_model(), gamma_model(0.5), gamma_model(2.0), gamma_model(7.5)}) {
    for (int i = 0; i < 100; ++i) {
      const double theta = std::pow(10.0, -3.0 + 6.0 * i / 99.0);
      const double back = m.eta_inv_numeric(m.eta(theta));
      CHECK(std::abs(back - theta) <= 1e-10 * std::max(1.0, theta));
    }
  }
}

// A plain second difference of k at step 1e-5 is dominated by rounding
// (about 1e-16 / 1e-10), so sigma^2 is checked as the central difference of
// eta, which is itself checked against k.
TEST_CASE("eta and sigma^2 agree with finite differences of k") {
  constexpr double step = 1e-5;
  for (const auto& m : {exponential_model(), gamma_model(2.0), gamma_model(0.7)}) {
    for (const double theta : {0.3, 1.0, 2.5, 8.0}) {
      const double d1 = (m.cumulant(theta + step) - m.cumulant(theta - step)) / (2 * step);
      const double d2 = (m.eta(theta + step) - m.eta(theta - step)) / (2 * step);
      CHECK(std::abs(d1 - m.eta(theta)) <= 1e-6 * std::abs(m.eta(theta)));
      CHECK(std::abs(d2 - m.variance(theta)) <= 1e-6 * std::abs(m.variance(theta)));
      CHECK(m.variance(theta) > 0.0);
    }
  }
}

TEST_CASE("densities integrate to one") {
  for (const auto& m : {exponential_model(), gamma_model(2.0), gamma_model(3.5)}) {
    for (const double theta : {0.25, 1.0, 3.0, 10.0}) {
      const double total = integrate_half_line([&](double x) { return m.density(x, theta); });
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("survival") {
  const auto e = exponential_model();
  CHECK(e.survival(1.0, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(e.survival(0.0, 1.0) == 1.0);
  CHECK(gamma_model(2.0).survival(0.0, 4.0) == 1.0);

  // Gamma(2, rate 4) tail: closed form (1 + 4x) e^{-4x} and an independent
  // quadrature of the density.
  const auto g = gamma_model(2.0);
  const double closed = 3.0 * std::exp(-2.0);
  const double quad = integrate_half_line([&](double x) { return 16.0 * x * std::exp(-4.0 * x); }, 0.5);
  CHECK(std::abs(g.survival(0.5, 4.0) - closed) <= 1e-8);
  CHECK(std::abs(g.survival(0.5, 4.0) - quad) <= 1e-8);
  // Deep tail keeps relative accuracy.
  const double far = 21.0 * std::exp(-20.0);
  CHECK(std::abs(g.survival(5.0, 4.0) - far) <= 1e-8 * far);
  CHECK(g.cdf(0.5, 4.0) == doctest::Approx(1.0 - closed).epsilon(1e-9));
  CHECK(g.cdf(0.05, 4.0) == doctest::Approx(1.0 - 1.2 * std::exp(-0.2)).epsilon(1e-9));
}

TEST_CASE("sampler mean of h converges to eta") {
  const auto e = exponential_model();
  RngStream rng(12345, 0);
  constexpr int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += e.stat(e.sample(1.0, rng));
  CHECK(std::abs(sum / n - e.eta(1.0)) <= 4.0 / std::sqrt(double(n)));
}

TEST_CASE("sampler is deterministic per stream") {
  const auto g = gamma_model(2.0);
  RngStream a(7, 3);
  RngStream b(7, 3);
  RngStream c(7, 4);
  bool all_equal = true;
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double x = g.sample(2.0, a);
    all_equal = all_equal && x == g.sample(2.0, b);
    any_diff = any_diff || x != g.sample(2.0, c);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("sampler matches the CDF by KS") {
  constexpr int n = 10000;
  const double critical = 1.63 / std::sqrt(double(n));
  for (const auto& [m, theta] : {std::pair{exponential_model(), 1.5}, std::pair{gamma_model(2.0), 4.0}}) {
    RngStream rng(99, 0);
    std::vector<double> xs(n);
    for (auto& x : xs) x = m.sample(theta, rng);
    const double d = numeric::ks_statistic(xs, [&](double x) { return m.cdf(x, theta); });
    CHECK(d < critical);
  }
}

TEST_CASE("catalog") {
  CHECK(make_model("exponential").name() == "exponential");
  CHECK(make_model("gamma:2.5").eta(1.0) == -2.5);
  CHECK_THROWS_AS(make_model("weibull"), PreconditionError);
  CHECK_THROWS_AS(make_model("gamma:x"), PreconditionError);
  CHECK_THROWS_AS(make_model("gamma:-1"), PreconditionError);
}
