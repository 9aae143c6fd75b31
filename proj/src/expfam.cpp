#include "qlil/expfam.hpp"

#include <cmath>
#include <charconv>
#include <limits>
#include <sstream>
#include <utility>

#include "qlil/error.hpp"
#include "qlil/numeric.hpp"

namespace qlil {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadratureTol = 1e-10;
constexpr double kBisectionWidth = 1e-12;
constexpr int kMaxBracketSteps = 2100;

}  // namespace

ExpFamilyModel::ExpFamilyModel(Definition def) : def_(std::move(def)) {
  if (!def_.log_carrier || !def_.stat || !def_.cumulant || !def_.cumulant_d1 ||
      !def_.cumulant_d2 || !def_.sampler) {
    throw PreconditionError("model '" + def_.name + "' is missing a required function");
  }
  if (!def_.natural_domain.contains(def_.reference_param)) {
    throw PreconditionError("model '" + def_.name +
                            "': reference parameter outside the natural domain");
  }
}

void ExpFamilyModel::require_in_domain(double theta) const {
  if (!def_.natural_domain.contains(theta)) {
    std::ostringstream msg;
    msg << "parameter " << theta << " outside the natural domain of '" << def_.name
        << "' (" << def_.natural_domain.lo << ", " << def_.natural_domain.hi << ")";
    throw DomainError(msg.str());
  }
}

double ExpFamilyModel::cumulant(double theta) const {
  require_in_domain(theta);
  return def_.cumulant(theta);
}

double ExpFamilyModel::eta(double theta) const {
  require_in_domain(theta);
  return def_.cumulant_d1(theta);
}

double ExpFamilyModel::variance(double theta) const {
  require_in_domain(theta);
  return def_.cumulant_d2(theta);
}

double ExpFamilyModel::log_density(double x, double theta) const {
  require_in_domain(theta);
  if (x < 0.0) {
    return -kInf;
  }
  return def_.log_carrier(x) + theta * def_.stat(x) - def_.cumulant(theta);
}

double ExpFamilyModel::density(double x, double theta) const {
  return std::exp(log_density(x, theta));
}

double ExpFamilyModel::eta_inv(double y) const {
  if (def_.eta_inverse) {
    if (!std::isfinite(y)) {
      throw InversionError("eta inverse: non-finite target");
    }
    const double theta = def_.eta_inverse(y);
    if (!def_.natural_domain.contains(theta)) {
      std::ostringstream msg;
      msg << "eta inverse: " << y << " is outside the range of eta for '" << def_.name << "'";
      throw InversionError(msg.str());
    }
    return theta;
  }
  return eta_inv_numeric(y);
}

double ExpFamilyModel::eta_inv_numeric(double y) const {
  if (!std::isfinite(y)) {
    throw InversionError("eta inverse: non-finite target");
  }
  const Interval& dom = def_.natural_domain;
  const auto& eta_fn = def_.cumulant_d1;
  const auto out_of_range = [&] {
    std::ostringstream msg;
    msg << "eta inverse: " << y << " is outside the range of eta for '" << def_.name << "'";
    return InversionError(msg.str());
  };

  // eta is strictly increasing (k is strictly convex). Grow a bracket
  // [lo, hi] around the root, stepping geometrically toward an infinite end
  // or halving the distance to a finite one.
  double lo = def_.reference_param;
  double hi = lo;
  if (eta_fn(lo) < y) {
    double step = std::max(1.0, std::abs(lo));
    for (int i = 0;; ++i) {
      if (i == kMaxBracketSteps) throw out_of_range();
      lo = hi;
      hi = std::isinf(dom.hi) ? hi + step : 0.5 * (hi + dom.hi);
      step *= 2.0;
      if (!std::isfinite(hi) || !dom.contains(hi) || hi == lo) throw out_of_range();
      if (eta_fn(hi) >= y) break;
    }
  } else {
    double step = std::max(1.0, std::abs(hi));
    for (int i = 0;; ++i) {
      if (i == kMaxBracketSteps) throw out_of_range();
      hi = lo;
      lo = std::isinf(dom.lo) ? lo - step : 0.5 * (lo + dom.lo);
      step *= 2.0;
      if (!std::isfinite(lo) || !dom.contains(lo) || hi == lo) throw out_of_range();
      if (eta_fn(lo) <= y) break;
    }
  }

  while (hi - lo > kBisectionWidth) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (eta_fn(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double ExpFamilyModel::cdf(double x, double theta) const {
  require_in_domain(theta);
  if (x <= 0.0) {
    return 0.0;
  }
  if (def_.cdf) {
    return def_.cdf(x, theta);
  }
  const double tail = survival(x, theta);
  if (tail < 0.5) {
    return 1.0 - tail;
  }
  return numeric::integrate([&](double t) { return density(t, theta); }, 0.0, x,
                            kQuadratureTol);
}

double ExpFamilyModel::survival(double x, double theta) const {
  require_in_domain(theta);
  if (x <= 0.0) {
    return 1.0;
  }
  if (def_.survival) {
    return def_.survival(x, theta);
  }
  if (def_.cdf) {
    return 1.0 - def_.cdf(x, theta);
  }
  return numeric::integrate([&](double t) { return density(t, theta); }, x, kInf,
                            kQuadratureTol);
}

double ExpFamilyModel::sample(double theta, RngStream& rng) const {
  require_in_domain(theta);
  return def_.sampler(theta, rng);
}

double ExpFamilyModel::mean(double theta) const {
  require_in_domain(theta);
  return def_.mean ? def_.mean(theta) : std::numeric_limits<double>::quiet_NaN();
}

ExpFamilyModel exponential_model() {
  ExpFamilyModel::Definition def;
  def.name = "exponential";
  def.log_carrier = [](double) { return 0.0; };
  def.stat = [](double x) { return -x; };
  def.cumulant = [](double theta) { return -std::log(theta); };
  def.cumulant_d1 = [](double theta) { return -1.0 / theta; };
  def.cumulant_d2 = [](double theta) { return 1.0 / (theta * theta); };
  def.natural_domain = {0.0, kInf};
  def.reference_param = 1.0;
  def.sampler = [](double theta, RngStream& rng) { return -std::log(rng.uniform_open()) / theta; };
  def.eta_inverse = [](double y) { return -1.0 / y; };
  def.cdf = [](double x, double theta) { return -std::expm1(-theta * x); };
  def.survival = [](double x, double theta) { return std::exp(-theta * x); };
  def.mean = [](double theta) { return 1.0 / theta; };
  return ExpFamilyModel(std::move(def));
}

ExpFamilyModel gamma_model(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw PreconditionError("gamma shape must be positive and finite");
  }
  const double log_gamma_alpha = std::lgamma(alpha);
  ExpFamilyModel::Definition def;
  std::ostringstream name;
  name << "gamma:" << alpha;
  def.name = name.str();
  def.log_carrier = [alpha, log_gamma_alpha](double x) {
    if (x == 0.0) {
      if (alpha == 1.0) return -log_gamma_alpha;
      return alpha < 1.0 ? kInf : -kInf;
    }
    return (alpha - 1.0) * std::log(x) - log_gamma_alpha;
  };
  def.stat = [](double x) { return -x; };
  def.cumulant = [alpha](double theta) { return -alpha * std::log(theta); };
  def.cumulant_d1 = [alpha](double theta) { return -alpha / theta; };
  def.cumulant_d2 = [alpha](double theta) { return alpha / (theta * theta); };
  def.natural_domain = {0.0, kInf};
  def.reference_param = 1.0;
  def.sampler = [alpha](double theta, RngStream& rng) {
    std::gamma_distribution<double> dist(alpha, 1.0 / theta);
    return dist(rng.engine());
  };
  def.mean = [alpha](double theta) { return alpha / theta; };
  // No closed-form inverse or CDF: these go through bisection and quadrature.
  return ExpFamilyModel(std::move(def));
}

ExpFamilyModel make_model(std::string_view spec) {
  if (spec == "exponential") {
    return exponential_model();
  }
  constexpr std::string_view kGamma = "gamma:";
  if (spec.substr(0, kGamma.size()) == kGamma) {
    const std::string_view arg = spec.substr(kGamma.size());
    double alpha = 0.0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), alpha);
    if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
      throw PreconditionError("bad gamma shape in model name '" + std::string(spec) + "'");
    }
    return gamma_model(alpha);
  }
  throw PreconditionError("unknown model '" + std::string(spec) +
                          "' (known: exponential, gamma:<alpha>)");
}

std::vector<std::string> catalog_names() { return {"exponential", "gamma:<alpha>"}; }

}  // namespace qlil
