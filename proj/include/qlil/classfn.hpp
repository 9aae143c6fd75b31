#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qlil {

/// A candidate boundary h(T) for the standardized estimator.
///
/// Boundaries are evaluated through s = log T so that very large horizons
/// (T up to e^700) stay representable.
class ClassFunction {
 public:
  enum class Family { ScaledLil, PowerLogLog, UserTable };

  /// c * sqrt(2 loglog T)
  static ClassFunction scaled_lil(double c);
  /// c * (loglog T)^(1/2)
  static ClassFunction power_loglog(double c);
  /// Piecewise linear in log T through (T_i, h_i); constant outside the
  /// table. Requires strictly increasing T_i > 0 and nondecreasing h_i.
  /// Entries may be +infinity.
  static ClassFunction user_table(std::vector<std::pair<double, double>> points);

  double operator()(double T) const { return at_log_time(std::log(T)); }
  double at_log_time(double s) const;

  Family family() const { return family_; }
  double coefficient() const { return coefficient_; }
  const std::vector<std::pair<double, double>>& table() const { return table_; }

  /// Smallest admissible T. Above e, so loglog T > 0.
  double domain_floor() const;
  std::string describe() const;

 private:
  ClassFunction(Family family, double coefficient,
                std::vector<std::pair<double, double>> table);

  Family family_;
  double coefficient_ = 0.0;
  std::vector<std::pair<double, double>> table_;
  std::vector<double> log_t_;
};

/// A positive decay function eps(t), represented by log eps as a function of
/// s = log t so that fast decay does not underflow.
struct DecayFunction {
  std::string name;
  std::function<double(double s)> log_value_at_log_time;

  double operator()(double t) const { return std::exp(log_value_at_log_time(std::log(t))); }

  /// t^(-a)
  static DecayFunction power(double a);
  /// 1 / (loglog t)^2
  static DecayFunction inverse_loglog_squared();
  /// e^(-t)
  static DecayFunction exponential();
  /// Parses "power:<a>", "inv_loglog_sq" or "exp".
  static DecayFunction parse(const std::string& spec);
};

enum class Verdict { Upper, Lower, Indeterminate };
enum class C2Verdict { Finite, Infinite, Indeterminate };

std::string to_string(Verdict v);
std::string to_string(C2Verdict v);

struct PartialIntegral {
  double t;      // upper endpoint
  double value;  // integral from e^2 to t
};

struct ClassificationReport {
  Verdict verdict = Verdict::Indeterminate;
  double exponent_estimate = 0.0;  // limit of h^2(T) / (2 loglog T)
  std::vector<PartialIntegral> tail_partial_integrals;
  std::vector<std::string> notes;
};

inline constexpr double kDefaultClassifyHorizon = 1e12;
inline constexpr double kDefaultMargin = 0.05;
inline constexpr std::size_t kExtrapolationPoints = 40;

/// Classifies h by the integral test on int (h(T)/T) exp(-h^2(T)/2) dT.
///
/// With s = log T the integrand is h exp(-h^2/2) ds, and h^2 ~ 2 rho log s
/// makes it behave like s^(-rho) up to a sqrt(log s) factor. rho is
/// extrapolated from 40 points equally spaced in log T on [e^2, t_max] by a
/// least-squares fit in 1/loglog T. Within `margin` of the critical value 1
/// the trend of the tail increments decides, or the result is Indeterminate.
///
/// Throws PreconditionError if t_max < e^(e^2), margin <= 0, or h decreases
/// on the grid.
ClassificationReport integral_test(const ClassFunction& h,
                                   double t_max = kDefaultClassifyHorizon,
                                   double margin = kDefaultMargin);

struct C2Report {
  C2Verdict verdict = C2Verdict::Indeterminate;
  std::vector<PartialIntegral> partial_integrals;
  std::vector<double> increment_ratios;
  double tail_estimate = 0.0;  // geometric bound on the remaining tail, when Finite
  std::vector<std::string> notes;
};

inline constexpr double kDefaultC2Horizon = 1e100;

/// Decides finiteness of int t^-1 (loglog t) eps^(1/2)(t) dt on [e^2, inf).
/// Partial integrals are taken at endpoints geometric in log t; Finite when
/// the block increments contract geometrically, Infinite when they do not
/// shrink at all.
C2Report condition_c2_check(const DecayFunction& eps, double t_max = kDefaultC2Horizon);

enum class SeriesWeighting {
  GridSpacing,  // term n weighted by t_n - t_{n-1}: a Riemann sum of the integral form
  Unit,         // literal series over the grid points
};

struct SeriesRow {
  std::size_t n;
  double t;
  double h;
  std::optional<double> s_a;  // needs crossing probabilities
  double s_b;
  double s_c;
  double s_d;
  // Partial-sum ratios; they settle to constants when the pair converges or
  // diverges together.
  double ratio_b_over_c;
  std::optional<double> ratio_a_over_b;
  double ratio_d_over_b;
};

struct SeriesOptions {
  double c = 1.0;  // constant in the (1 + C / loglog t) exponent factor
  SeriesWeighting weighting = SeriesWeighting::GridSpacing;
};

/// Partial sums over `t_grid` of
///   S_A = sum loglog t_n t_n^-1 p_n
///   S_B = sum loglog t_n (t_n h)^-1 exp(-h^2/2)
///   S_C = sum (t_n h)^-1 exp(-h^2/2)
///   S_D = sum loglog t_n (t_n h)^-1 exp(-(h^2/2)(1 + C/loglog t_n))
/// Throws PreconditionError if the grid is not increasing from t_1 >= e^2,
/// or if `crossing_probs` is given with a different length.
std::vector<SeriesRow> series_diagnostics(const ClassFunction& h,
                                          std::span<const double> t_grid,
                                          std::optional<std::span<const double>> crossing_probs = std::nullopt,
                                          const SeriesOptions& options = {});

std::vector<std::pair<double, double>> envelope(const ClassFunction& h,
                                                std::span<const double> t_grid);

/// Geometric grid of `count` points from `first` to `last` inclusive.
std::vector<double> geometric_grid(double first, double last, std::size_t count);

}  // namespace qlil
