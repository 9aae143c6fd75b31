#include "qlil/mle.hpp"

#include <cmath>
#include <numeric>
#include <limits>
#include <vector>

#include "qlil/error.hpp"
#include "qlil/numeric.hpp"

namespace qlil {

namespace {

double sum_stat(std::span<const double> sample, const ExpFamilyModel& model) {
  std::vector<double> h;
  h.reserve(sample.size());
  for (const double x : sample) {
    h.push_back(model.stat(x));
  }
  return numeric::stable_sum(h);
}

double sum_log_carrier(std::span<const double> sample, const ExpFamilyModel& model) {
  std::vector<double> a;
  a.reserve(sample.size());
  for (const double x : sample) {
    a.push_back(model.log_carrier(x));
  }
  return numeric::stable_sum(a);
}

double residual(double T, double elapsed) { return std::max(0.0, T - elapsed); }

}  // namespace

double score(std::span<const double> sample, const ExpFamilyModel& model, double theta) {
  const auto n = static_cast<double>(sample.size());
  return sum_stat(sample, model) - n * model.eta(theta);
}

double observed_info(std::span<const double> sample, const ExpFamilyModel& model,
                     double theta) {
  return static_cast<double>(sample.size()) * model.variance(theta);
}

double component_loglik(std::span<const double> sample, const ExpFamilyModel& model,
                        double theta) {
  const double k = model.cumulant(theta);
  if (sample.empty()) {
    return 0.0;
  }
  const auto n = static_cast<double>(sample.size());
  return sum_log_carrier(sample, model) + theta * sum_stat(sample, model) - n * k;
}

double loglik_approx(const WindowView& w, const ExpFamilyModel& arrival,
                     const ExpFamilyModel& service, double theta, double phi) {
  return component_loglik(w.arrivals, arrival, theta) +
         component_loglik(w.services, service, phi);
}

bool CensoringTerms::degenerate() const { return std::isinf(arrival) || std::isinf(service); }

CensoringTerms censoring_terms(const WindowView& w, const ExpFamilyModel& arrival,
                               const ExpFamilyModel& service, double theta, double phi) {
  // Summed in path order, as the simulator clock is, so a window stopped at
  // an arrival has a residual of exactly zero.
  const double sum_u = std::accumulate(w.arrivals.begin(), w.arrivals.end(), 0.0);
  const double sum_v = std::accumulate(w.services.begin(), w.services.end(), 0.0);
  const double arrival_residual = residual(w.T, sum_u);
  const double service_residual = residual(w.T, w.idle + sum_v);
  CensoringTerms terms;
  terms.arrival = std::log(arrival.survival(arrival_residual, theta));
  terms.service = std::log(service.survival(service_residual, phi));
  return terms;
}

double loglik_full(const WindowView& w, const ExpFamilyModel& arrival,
                   const ExpFamilyModel& service, double theta, double phi) {
  const CensoringTerms terms = censoring_terms(w, arrival, service, theta, phi);
  if (terms.degenerate()) {
    return -std::numeric_limits<double>::infinity();
  }
  return loglik_approx(w, arrival, service, theta, phi) + terms.arrival + terms.service;
}

double estimate_component(std::span<const double> sample, const ExpFamilyModel& model,
                          Inversion inversion) {
  if (sample.empty()) {
    throw InsufficientDataError("no observations for '" + model.name() + "'");
  }
  const double mean_h = sum_stat(sample, model) / static_cast<double>(sample.size());
  return inversion == Inversion::Numeric ? model.eta_inv_numeric(mean_h)
                                         : model.eta_inv(mean_h);
}

double standardized_deviation(const ExpFamilyModel& model, double estimate, double truth,
                              std::size_t count) {
  const double info = model.variance(truth) * static_cast<double>(count);
  return std::sqrt(info) * (estimate - truth);
}

MleResult estimate(const WindowView& w, const ExpFamilyModel& arrival,
                   const ExpFamilyModel& service, std::optional<TrueParams> truth,
                   Inversion inversion) {
  if (w.a_count() == 0) {
    throw InsufficientDataError("window has no completed interarrival times (A(T) = 0)");
  }
  if (w.d_count() == 0) {
    throw InsufficientDataError("window has no completed services (D(T) = 0)");
  }
  MleResult r;
  r.a_count = w.a_count();
  r.d_count = w.d_count();
  r.theta_hat = estimate_component(w.arrivals, arrival, inversion);
  r.phi_hat = estimate_component(w.services, service, inversion);
  r.info_theta = observed_info(w.arrivals, arrival, r.theta_hat);
  r.info_phi = observed_info(w.services, service, r.phi_hat);
  if (truth) {
    r.z_theta = standardized_deviation(arrival, r.theta_hat, truth->theta0, r.a_count);
    r.z_phi = standardized_deviation(service, r.phi_hat, truth->phi0, r.d_count);
  }
  return r;
}

}  // namespace qlil
