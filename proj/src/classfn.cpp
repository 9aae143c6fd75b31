#include "qlil/classfn.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "qlil/error.hpp"
#include "qlil/numeric.hpp"

namespace qlil {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLowerLogTime = 2.0;  // integrals start at T = e^2
constexpr std::size_t kTailEndpoints = 16;
constexpr std::size_t kC2Endpoints = 25;
constexpr double kContracting = 0.95;
constexpr double kNonContracting = 0.99;

// h exp(-h^2/2), the integrand in s = log T.
double integrand_in_log_time(double h) {
  if (std::isinf(h)) return 0.0;
  return h * std::exp(-0.5 * h * h);
}

// Endpoints geometric in s, from s_lo to s_hi inclusive.
std::vector<double> expanding_endpoints(double s_lo, double s_hi, std::size_t count) {
  std::vector<double> s(count);
  for (std::size_t k = 0; k < count; ++k) {
    s[k] = s_lo * std::pow(s_hi / s_lo, static_cast<double>(k) / static_cast<double>(count - 1));
  }
  s.back() = s_hi;
  return s;
}

std::vector<PartialIntegral> partial_integrals(const std::function<double(double)>& f,
                                               std::span<const double> endpoints) {
  std::vector<PartialIntegral> out;
  double total = 0.0;
  for (std::size_t k = 1; k < endpoints.size(); ++k) {
    total += numeric::integrate(f, endpoints[k - 1], endpoints[k]);
    out.push_back({std::exp(endpoints[k]), total});
  }
  return out;
}

// Ratios of successive block increments over the last half of the blocks.
// Increments that have underflowed relative to the running total count as
// full contraction.
std::vector<double> tail_increment_ratios(std::span<const PartialIntegral> partials) {
  std::vector<double> increments;
  double previous = 0.0;
  for (const auto& p : partials) {
    increments.push_back(p.value - previous);
    previous = p.value;
  }
  const double total = partials.empty() ? 0.0 : partials.back().value;
  const auto negligible = [&](double d) {
    return d <= 1e-300 || d <= 1e-17 * std::abs(total);
  };
  std::vector<double> ratios;
  for (std::size_t k = increments.size() / 2; k + 1 < increments.size(); ++k) {
    if (negligible(increments[k + 1])) {
      ratios.push_back(0.0);
    } else if (negligible(increments[k])) {
      ratios.push_back(kInf);
    } else {
      ratios.push_back(increments[k + 1] / increments[k]);
    }
  }
  return ratios;
}

double parse_number(std::string_view text, const std::string& context) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw PreconditionError("cannot parse number in '" + context + "'");
  }
  return value;
}

}  // namespace

ClassFunction::ClassFunction(Family family, double coefficient,
                             std::vector<std::pair<double, double>> table)
    : family_(family), coefficient_(coefficient), table_(std::move(table)) {
  for (const auto& [t, h] : table_) {
    log_t_.push_back(std::log(t));
  }
}

ClassFunction ClassFunction::scaled_lil(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw PreconditionError("scaled LIL coefficient must be positive");
  }
  return ClassFunction(Family::ScaledLil, c, {});
}

ClassFunction ClassFunction::power_loglog(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw PreconditionError("loglog power coefficient must be positive");
  }
  return ClassFunction(Family::PowerLogLog, c, {});
}

ClassFunction ClassFunction::user_table(std::vector<std::pair<double, double>> points) {
  if (points.empty()) {
    throw PreconditionError("boundary table is empty");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto [t, h] = points[i];
    if (!(t > 0.0) || !std::isfinite(t) || std::isnan(h)) {
      throw PreconditionError("boundary table needs finite T > 0 and non-NaN h");
    }
    if (i > 0 && (!(t > points[i - 1].first) || h < points[i - 1].second)) {
      throw PreconditionError("boundary table must be increasing in T and nondecreasing in h");
    }
  }
  return ClassFunction(Family::UserTable, 0.0, std::move(points));
}

double ClassFunction::at_log_time(double s) const {
  switch (family_) {
    case Family::ScaledLil:
      return coefficient_ * std::sqrt(2.0 * std::max(0.0, std::log(s)));
    case Family::PowerLogLog:
      return coefficient_ * std::sqrt(std::max(0.0, std::log(s)));
    case Family::UserTable: {
      if (s <= log_t_.front()) return table_.front().second;
      if (s >= log_t_.back()) return table_.back().second;
      const auto it = std::upper_bound(log_t_.begin(), log_t_.end(), s);
      const auto i = static_cast<std::size_t>(it - log_t_.begin());
      const double h0 = table_[i - 1].second;
      const double h1 = table_[i].second;
      if (std::isinf(h0)) return h0;
      if (std::isinf(h1)) return s == log_t_[i - 1] ? h0 : h1;
      const double w = (s - log_t_[i - 1]) / (log_t_[i] - log_t_[i - 1]);
      return h0 + w * (h1 - h0);
    }
  }
  return 0.0;
}

double ClassFunction::domain_floor() const { return std::exp(kLowerLogTime); }

std::string ClassFunction::describe() const {
  std::ostringstream out;
  switch (family_) {
    case Family::ScaledLil:
      out << "scaled_lil(" << coefficient_ << ")";
      break;
    case Family::PowerLogLog:
      out << "power_loglog(" << coefficient_ << ")";
      break;
    case Family::UserTable:
      out << "table(" << table_.size() << " points)";
      break;
  }
  return out.str();
}

DecayFunction DecayFunction::power(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw PreconditionError("power decay exponent must be positive");
  }
  std::ostringstream name;
  name << "power:" << a;
  return {name.str(), [a](double s) { return -a * s; }};
}

DecayFunction DecayFunction::inverse_loglog_squared() {
  return {"inv_loglog_sq", [](double s) { return -2.0 * std::log(std::log(s)); }};
}

DecayFunction DecayFunction::exponential() {
  return {"exp", [](double s) { return -std::exp(s); }};
}

DecayFunction DecayFunction::parse(const std::string& spec) {
  if (spec == "inv_loglog_sq") return inverse_loglog_squared();
  if (spec == "exp") return exponential();
  constexpr std::string_view kPower = "power:";
  if (spec.starts_with(kPower)) {
    return power(parse_number(std::string_view(spec).substr(kPower.size()), spec));
  }
  throw PreconditionError("unknown decay function '" + spec +
                          "' (known: power:<a>, inv_loglog_sq, exp)");
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Upper:
      return "Upper";
    case Verdict::Lower:
      return "Lower";
    case Verdict::Indeterminate:
      break;
  }
  return "Indeterminate";
}

std::string to_string(C2Verdict v) {
  switch (v) {
    case C2Verdict::Finite:
      return "Finite";
    case C2Verdict::Infinite:
      return "Infinite";
    case C2Verdict::Indeterminate:
      break;
  }
  return "Indeterminate";
}

ClassificationReport integral_test(const ClassFunction& h, double t_max, double margin) {
  if (!(t_max >= std::exp(std::exp(2.0))) || !std::isfinite(t_max)) {
    throw PreconditionError("integral test horizon must satisfy t_max >= e^(e^2)");
  }
  if (!(margin > 0.0) || !std::isfinite(margin)) {
    throw PreconditionError("classification margin must be positive");
  }
  const double s_hi = std::log(t_max);

  std::vector<double> s(kExtrapolationPoints);
  std::vector<double> hv(kExtrapolationPoints);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = kLowerLogTime + (s_hi - kLowerLogTime) * static_cast<double>(i) /
                               static_cast<double>(s.size() - 1);
    hv[i] = h.at_log_time(s[i]);
    if (std::isnan(hv[i]) || hv[i] < 0.0) {
      throw PreconditionError("boundary " + h.describe() + " is negative or undefined");
    }
    if (i > 0 && hv[i] < hv[i - 1] - 1e-12 * std::abs(hv[i - 1])) {
      throw PreconditionError("boundary " + h.describe() + " decreases on the grid");
    }
  }

  ClassificationReport report;
  if (!(hv.back() > hv.front() + 1.0)) {
    report.notes.push_back("h grows by less than 1 over the horizon");
  }

  const std::vector<double> endpoints = expanding_endpoints(kLowerLogTime, s_hi, kTailEndpoints);
  report.tail_partial_integrals = partial_integrals(
      [&](double x) { return integrand_in_log_time(h.at_log_time(x)); }, endpoints);

  if (std::isinf(hv.back())) {
    report.verdict = Verdict::Upper;
    report.exponent_estimate = kInf;
    report.notes.push_back("h is infinite near the horizon; the integrand vanishes");
    return report;
  }

  // rho(T) = h^2 / (2 loglog T), fitted as rho_inf + b / loglog T.
  std::vector<double> x(s.size());
  std::vector<double> rho(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    x[i] = 1.0 / std::log(s[i]);
    rho[i] = hv[i] * hv[i] * 0.5 * x[i];
  }
  const auto n = static_cast<double>(s.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(rho.begin(), rho.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (rho[i] - my);
  }
  const double slope = sxy / sxx;
  report.exponent_estimate = my - slope * mx;

  std::ostringstream note;
  note << "extrapolated rho = " << report.exponent_estimate << " (slope " << slope
       << " in 1/loglog T, " << kExtrapolationPoints << " points up to T = " << t_max << ")";
  report.notes.push_back(note.str());

  if (report.exponent_estimate >= 1.0 + margin) {
    report.verdict = Verdict::Upper;
    report.notes.push_back("rho above 1 + margin: integral converges by comparison");
    return report;
  }
  if (report.exponent_estimate <= 1.0 - margin) {
    report.verdict = Verdict::Lower;
    report.notes.push_back("rho below 1 - margin: integral diverges by comparison");
    return report;
  }

  const std::vector<double> ratios = tail_increment_ratios(report.tail_partial_integrals);
  const double max_ratio = *std::max_element(ratios.begin(), ratios.end());
  const double min_ratio = *std::min_element(ratios.begin(), ratios.end());
  std::ostringstream trend;
  trend << "rho within margin of 1; tail increment ratios in [" << min_ratio << ", "
        << max_ratio << "]";
  report.notes.push_back(trend.str());
  if (max_ratio <= kContracting) {
    report.verdict = Verdict::Upper;
    report.notes.push_back("tail increments contract geometrically");
  } else if (min_ratio >= 1.0) {
    report.verdict = Verdict::Lower;
    report.notes.push_back("tail increments do not shrink");
  } else {
    report.verdict = Verdict::Indeterminate;
  }
  return report;
}

C2Report condition_c2_check(const DecayFunction& eps, double t_max) {
  if (!(t_max > std::exp(2.0 * kLowerLogTime)) || !std::isfinite(t_max)) {
    throw PreconditionError("C2 horizon must exceed e^4");
  }
  const double s_hi = std::log(t_max);
  constexpr int kChecks = 200;
  double previous = kInf;
  for (int i = 0; i < kChecks; ++i) {
    const double s = kLowerLogTime + (s_hi - kLowerLogTime) * i / (kChecks - 1);
    const double lv = eps.log_value_at_log_time(s);
    if (std::isnan(lv) || lv == -kInf) {
      throw PreconditionError("decay function " + eps.name + " is not positive");
    }
    if (lv > previous + 1e-12 * std::abs(previous)) {
      throw PreconditionError("decay function " + eps.name + " is not decreasing");
    }
    previous = lv;
  }

  const auto f = [&](double s) {
    return std::log(s) * std::exp(0.5 * eps.log_value_at_log_time(s));
  };
  C2Report report;
  const std::vector<double> endpoints = expanding_endpoints(kLowerLogTime, s_hi, kC2Endpoints);
  report.partial_integrals = partial_integrals(f, endpoints);
  report.increment_ratios = tail_increment_ratios(report.partial_integrals);

  const double max_ratio =
      *std::max_element(report.increment_ratios.begin(), report.increment_ratios.end());
  const double min_ratio =
      *std::min_element(report.increment_ratios.begin(), report.increment_ratios.end());
  std::ostringstream note;
  note << "block increment ratios over the last half in [" << min_ratio << ", " << max_ratio
       << "], endpoints geometric in log t up to t = " << t_max;
  report.notes.push_back(note.str());

  if (max_ratio <= kContracting) {
    report.verdict = C2Verdict::Finite;
    const auto& p = report.partial_integrals;
    const double last = p.back().value - p[p.size() - 2].value;
    report.tail_estimate = max_ratio == 0.0 ? 0.0 : last * max_ratio / (1.0 - max_ratio);
  } else if (min_ratio >= kNonContracting) {
    report.verdict = C2Verdict::Infinite;
    report.tail_estimate = kInf;
  } else {
    report.verdict = C2Verdict::Indeterminate;
    report.tail_estimate = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

std::vector<SeriesRow> series_diagnostics(const ClassFunction& h, std::span<const double> t_grid,
                                          std::optional<std::span<const double>> crossing_probs,
                                          const SeriesOptions& options) {
  if (t_grid.empty()) {
    throw PreconditionError("series grid is empty");
  }
  if (!(t_grid.front() >= std::exp(kLowerLogTime) * (1.0 - 1e-12))) {
    throw PreconditionError("series grid must start at t_1 >= e^2");
  }
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) {
      throw PreconditionError("series grid must be strictly increasing");
    }
  }
  if (crossing_probs && crossing_probs->size() != t_grid.size()) {
    throw PreconditionError("crossing probabilities are not aligned with the grid");
  }

  std::vector<SeriesRow> rows;
  rows.reserve(t_grid.size());
  double s_a = 0.0;
  double s_b = 0.0;
  double s_c = 0.0;
  double s_d = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    const double hv = h(t);
    if (!(hv > 0.0)) {
      throw PreconditionError("series diagnostics need h > 0 on the grid");
    }
    double weight = 1.0;
    if (options.weighting == SeriesWeighting::GridSpacing) {
      if (i > 0) {
        weight = t - t_grid[i - 1];
      } else if (t_grid.size() > 1) {
        weight = t * (1.0 - t / t_grid[1]);
      } else {
        weight = t;
      }
    }
    const double loglog = std::log(std::log(t));
    const double half_sq = 0.5 * hv * hv;
    const double base = weight / (t * hv) * std::exp(-half_sq);
    s_b += loglog * base;
    s_c += base;
    s_d += loglog * (weight / (t * hv) * std::exp(-half_sq * (1.0 + options.c / loglog)));

    SeriesRow row{};
    row.n = i + 1;
    row.t = t;
    row.h = hv;
    row.s_b = s_b;
    row.s_c = s_c;
    row.s_d = s_d;
    row.ratio_b_over_c = s_b / s_c;
    row.ratio_d_over_b = s_d / s_b;
    if (crossing_probs) {
      s_a += loglog * weight / t * (*crossing_probs)[i];
      row.s_a = s_a;
      row.ratio_a_over_b = s_a / s_b;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::pair<double, double>> envelope(const ClassFunction& h,
                                                std::span<const double> t_grid) {
  std::vector<std::pair<double, double>> out;
  out.reserve(t_grid.size());
  for (const double t : t_grid) {
    out.emplace_back(t, h(t));
  }
  return out;
}

std::vector<double> geometric_grid(double first, double last, std::size_t count) {
  if (count == 0 || !(first > 0.0) || !(last >= first)) {
    throw PreconditionError("geometric grid needs count >= 1 and 0 < first <= last");
  }
  if (count == 1) {
    return {first};
  }
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = first * std::pow(last / first, static_cast<double>(i) / static_cast<double>(count - 1));
  }
  grid.front() = first;
  grid.back() = last;
  return grid;
}

}  // namespace qlil
