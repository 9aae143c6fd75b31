#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "qlil/expfam.hpp"
#include "qlil/qsim.hpp"

namespace qlil {

struct TrueParams {
  double theta0;
  double phi0;
};

/// Estimates from one window. Information values are the plug-in
/// I(theta_hat) = sigma^2(theta_hat) A(T); the standardized deviations use
/// I(theta0) = sigma^2(theta0) A(T) and exist only when true values are given.
struct MleResult {
  double theta_hat = 0.0;
  double phi_hat = 0.0;
  double info_theta = 0.0;
  double info_phi = 0.0;
  std::optional<double> z_theta;
  std::optional<double> z_phi;
  std::size_t a_count = 0;
  std::size_t d_count = 0;
};

enum class Inversion {
  Auto,     // closed form when the model has one
  Numeric,  // always bracket-and-bisect
};

/// Score l'(theta) = sum h(x_i) - n k'(theta) for one component's sample.
double score(std::span<const double> sample, const ExpFamilyModel& model, double theta);

/// Observed information -l''(theta) = n sigma^2(theta).
double observed_info(std::span<const double> sample, const ExpFamilyModel& model,
                     double theta);

/// One component's contribution to the approximate log-likelihood:
/// sum log a(x_i) + sum [theta h(x_i) - k(theta)].
double component_loglik(std::span<const double> sample, const ExpFamilyModel& model,
                        double theta);

/// Approximate log-likelihood (product of completed-interval densities).
double loglik_approx(const WindowView& w, const ExpFamilyModel& arrival,
                     const ExpFamilyModel& service, double theta, double phi);

/// The two censoring factors of the full likelihood, in log space. Both are
/// <= 0; -inf means the survival factor vanished.
struct CensoringTerms {
  double arrival = 0.0;
  double service = 0.0;

  bool degenerate() const;
};

CensoringTerms censoring_terms(const WindowView& w, const ExpFamilyModel& arrival,
                               const ExpFamilyModel& service, double theta, double phi);

/// Full log-likelihood: loglik_approx plus the censoring terms for the
/// partially elapsed interarrival and service intervals at T. May be -inf
/// (see CensoringTerms::degenerate).
double loglik_full(const WindowView& w, const ExpFamilyModel& arrival,
                   const ExpFamilyModel& service, double theta, double phi);

/// MLE of one component: eta^{-1}(mean of h). Throws InsufficientDataError
/// on an empty sample and InversionError when the mean is outside eta's range.
double estimate_component(std::span<const double> sample, const ExpFamilyModel& model,
                          Inversion inversion = Inversion::Auto);

MleResult estimate(const WindowView& w, const ExpFamilyModel& arrival,
                   const ExpFamilyModel& service,
                   std::optional<TrueParams> truth = std::nullopt,
                   Inversion inversion = Inversion::Auto);

/// I^{1/2}(estimate - truth) with I = sigma^2(truth) * count.
double standardized_deviation(const ExpFamilyModel& model, double estimate, double truth,
                              std::size_t count);

}  // namespace qlil
