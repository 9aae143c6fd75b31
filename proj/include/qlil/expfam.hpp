#pragma once

#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "qlil/rng.hpp"

namespace qlil {

/// Open interval (lo, hi) of admissible parameter values.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return x > lo && x < hi; }
};

/// A one-parameter continuous exponential family on [0, inf) with density
///
///     f(x; theta) = a(x) exp(theta h(x) - k(theta)),   x >= 0,
///
/// and zero for x < 0. The carrier is held as log a(x). Instances are
/// immutable and safe to share between threads.
class ExpFamilyModel {
 public:
  using ScalarFn = std::function<double(double)>;
  using Sampler = std::function<double(double theta, RngStream&)>;

  struct Definition {
    std::string name;
    ScalarFn log_carrier;  // log a(x), x >= 0
    ScalarFn stat;         // h(x)
    ScalarFn cumulant;     // k(theta)
    ScalarFn cumulant_d1;  // eta(theta) = k'(theta)
    ScalarFn cumulant_d2;  // sigma^2(theta) = k''(theta)
    Interval natural_domain;
    double reference_param = 1.0;  // interior starting point for bracketing
    Sampler sampler;
    ScalarFn eta_inverse;                    // optional closed form
    std::function<double(double, double)> cdf;       // optional closed form F(x; theta)
    std::function<double(double, double)> survival;  // optional closed form 1 - F(x; theta)
    ScalarFn mean;                           // optional E[X] as a function of theta
  };

  explicit ExpFamilyModel(Definition def);

  const std::string& name() const { return def_.name; }
  const Interval& natural_domain() const { return def_.natural_domain; }

  double log_carrier(double x) const { return def_.log_carrier(x); }
  double stat(double x) const { return def_.stat(x); }
  double cumulant(double theta) const;
  double eta(double theta) const;
  double variance(double theta) const;

  double density(double x, double theta) const;
  double log_density(double x, double theta) const;

  /// Mean-map inverse. Uses the closed form when the model has one.
  double eta_inv(double y) const;
  /// Mean-map inverse by bracket expansion and bisection, ignoring any
  /// closed form.
  double eta_inv_numeric(double y) const;
  bool has_closed_form_inverse() const { return static_cast<bool>(def_.eta_inverse); }

  double cdf(double x, double theta) const;
  /// 1 - F(x; theta). Computed directly from the upper tail when no closed
  /// form is available, so small tails keep their relative accuracy.
  double survival(double x, double theta) const;

  double sample(double theta, RngStream& rng) const;

  /// E[X] when the model knows it in closed form, NaN otherwise.
  double mean(double theta) const;

  void require_in_domain(double theta) const;

 private:
  Definition def_;
};

/// Exponential law with rate theta: a(x) = 1, h(x) = -x, k(theta) = -log theta.
ExpFamilyModel exponential_model();

/// Gamma law with known shape alpha and rate theta: h(x) = -x,
/// a(x) = x^(alpha-1) / Gamma(alpha), k(theta) = -alpha log theta.
ExpFamilyModel gamma_model(double alpha);

/// Builds a model from its catalog name: "exponential" or "gamma:<alpha>".
/// Throws PreconditionError for unknown names.
ExpFamilyModel make_model(std::string_view spec);

std::vector<std::string> catalog_names();

}  // namespace qlil
