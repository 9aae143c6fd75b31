#include "qlil/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "qlil/error.hpp"

namespace qlil {

namespace {

std::string cell(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

// nlohmann writes non-finite doubles as null; keep them readable instead.
Json number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

Json partials_to_json(const std::vector<PartialIntegral>& partials) {
  Json out = Json::array();
  for (const auto& p : partials) {
    out.push_back({{"t", number(p.t)}, {"value", number(p.value)}});
  }
  return out;
}

template <class T>
T required(const Json& j, const char* key) {
  if (!j.contains(key)) {
    throw PreconditionError(std::string("window record: missing key '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw PreconditionError(std::string("window record: key '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

Json window_to_json(const ObservationWindow& w) {
  return {{"T", w.T},
          {"a_count", w.a_count()},
          {"d_count", w.d_count()},
          {"arrivals", w.arrivals},
          {"services", w.services},
          {"idle", w.idle},
          {"initial_customer_present", w.initial_customer_present}};
}

ObservationWindow window_from_json(const Json& j) {
  if (!j.is_object()) {
    throw PreconditionError("window record must be a JSON object");
  }
  static const char* const kKeys[] = {"T",        "a_count", "d_count", "arrivals",
                                      "services", "idle",    "initial_customer_present"};
  for (const auto& item : j.items()) {
    if (std::find_if(std::begin(kKeys), std::end(kKeys),
                     [&](const char* k) { return item.key() == k; }) == std::end(kKeys)) {
      throw PreconditionError("window record: unknown key '" + item.key() + "'");
    }
  }
  ObservationWindow w;
  w.T = required<double>(j, "T");
  w.arrivals = required<std::vector<double>>(j, "arrivals");
  w.services = required<std::vector<double>>(j, "services");
  w.idle = required<double>(j, "idle");
  w.initial_customer_present = required<bool>(j, "initial_customer_present");
  if (required<std::size_t>(j, "a_count") != w.arrivals.size() ||
      required<std::size_t>(j, "d_count") != w.services.size()) {
    throw PreconditionError("window record: counts do not match the interval lists");
  }
  const WindowCheck check = check_window(w);
  if (!check.ok) {
    throw PreconditionError("window record violates invariants: " + check.violations.front());
  }
  return w;
}

Json mle_to_json(const MleResult& r) {
  Json j = {{"theta_hat", r.theta_hat}, {"phi_hat", r.phi_hat}, {"info_theta", r.info_theta},
            {"info_phi", r.info_phi},   {"a_count", r.a_count}, {"d_count", r.d_count}};
  if (r.z_theta) j["z_theta"] = *r.z_theta;
  if (r.z_phi) j["z_phi"] = *r.z_phi;
  return j;
}

Json report_to_json(const ClassificationReport& r) {
  return {{"verdict", to_string(r.verdict)},
          {"exponent_estimate", number(r.exponent_estimate)},
          {"tail_partial_integrals", partials_to_json(r.tail_partial_integrals)},
          {"notes", r.notes}};
}

Json report_to_json(const C2Report& r) {
  Json ratios = Json::array();
  for (const double x : r.increment_ratios) ratios.push_back(number(x));
  return {{"verdict", to_string(r.verdict)},
          {"partial_integrals", partials_to_json(r.partial_integrals)},
          {"increment_ratios", ratios},
          {"tail_estimate", number(r.tail_estimate)},
          {"notes", r.notes}};
}

Json report_to_json(const NormalityReport& r) {
  Json rows = Json::array();
  for (const auto& x : r.rows) {
    rows.push_back({{"T", x.T},
                    {"used", x.used},
                    {"excluded", x.excluded},
                    {"ks_theta", x.ks_theta},
                    {"ks_phi", x.ks_phi},
                    {"mean_z_theta", x.mean_z_theta},
                    {"mean_z_phi", x.mean_z_phi},
                    {"eps_sqrt", x.eps_sqrt},
                    {"envelope_1", x.envelope_1},
                    {"envelope_5", x.envelope_5},
                    {"envelope_25", x.envelope_25}});
  }
  return {{"rows", rows}};
}

Json report_to_json(const C1Report& r) {
  Json rows = Json::array();
  for (const auto& x : r.rows) {
    rows.push_back({{"T", x.T},
                    {"eps", x.eps},
                    {"eps_sqrt", x.eps_sqrt},
                    {"mean_a", x.mean_a},
                    {"mean_d", x.mean_d},
                    {"freq_a", x.freq_a},
                    {"se_a", x.se_a},
                    {"freq_d", x.freq_d},
                    {"se_d", x.se_d}});
  }
  return {{"rows", rows}};
}

Json report_to_json(const CrossingReport& r) {
  Json boundaries = Json::array();
  for (const auto& b : r.boundaries) {
    Json h = Json::array();
    for (const double x : b.h_values) h.push_back(number(x));
    boundaries.push_back({{"boundary", b.boundary},
                          {"h", h},
                          {"crossing_freq", b.crossing_freq},
                          {"tail_fraction", b.tail_fraction}});
  }
  return {{"grid", r.grid}, {"replications", r.replications}, {"boundaries", boundaries}};
}

Json report_to_json(const ConsistencyReport& r) {
  Json rows = Json::array();
  for (const auto& x : r.rows) {
    Json row = {{"T", x.T}, {"mae_theta", x.mae_theta}, {"mae_phi", x.mae_phi}};
    row["ratio_theta"] = x.ratio_theta ? Json(*x.ratio_theta) : Json(nullptr);
    row["ratio_phi"] = x.ratio_phi ? Json(*x.ratio_phi) : Json(nullptr);
    rows.push_back(row);
  }
  return {{"rows", rows}};
}

std::string to_csv(const NormalityReport& r) {
  std::ostringstream out;
  out << kNormalityHeader << '\n';
  for (const auto& x : r.rows) {
    out << format_double(x.T) << ',' << x.used << ',' << x.excluded << ','
        << format_double(x.ks_theta) << ',' << format_double(x.ks_phi) << ','
        << format_double(x.mean_z_theta) << ',' << format_double(x.mean_z_phi) << ','
        << format_double(x.eps_sqrt) << ',' << format_double(x.envelope_1) << ','
        << format_double(x.envelope_5) << ',' << format_double(x.envelope_25) << '\n';
  }
  return out.str();
}

std::string to_csv(const C1Report& r) {
  std::ostringstream out;
  out << kC1Header << '\n';
  for (const auto& x : r.rows) {
    out << format_double(x.T) << ',' << format_double(x.eps) << ',' << format_double(x.eps_sqrt)
        << ',' << format_double(x.mean_a) << ',' << format_double(x.mean_d) << ','
        << format_double(x.freq_a) << ',' << format_double(x.se_a) << ','
        << format_double(x.freq_d) << ',' << format_double(x.se_d) << '\n';
  }
  return out.str();
}

std::string to_csv(const CrossingReport& r) {
  std::ostringstream out;
  out << kCrossingsHeader << '\n';
  for (const auto& b : r.boundaries) {
    for (std::size_t k = 0; k < r.grid.size(); ++k) {
      out << b.boundary << ',' << k << ',' << format_double(r.grid[k]) << ','
          << format_double(b.h_values[k]) << ',' << format_double(b.crossing_freq[k]) << ','
          << format_double(b.tail_fraction[k]) << '\n';
    }
  }
  return out.str();
}

std::string to_csv(const ConsistencyReport& r) {
  std::ostringstream out;
  out << kConsistencyHeader << '\n';
  for (const auto& x : r.rows) {
    out << format_double(x.T) << ',' << format_double(x.mae_theta) << ','
        << format_double(x.mae_phi) << ',' << cell(x.ratio_theta) << ',' << cell(x.ratio_phi)
        << '\n';
  }
  return out.str();
}

std::string to_csv(const std::vector<SeriesRow>& rows) {
  std::ostringstream out;
  out << kDiagnosticsHeader << '\n';
  for (const auto& x : rows) {
    out << x.n << ',' << format_double(x.t) << ',' << format_double(x.h) << ',' << cell(x.s_a)
        << ',' << format_double(x.s_b) << ',' << format_double(x.s_c) << ','
        << format_double(x.s_d) << '\n';
  }
  return out.str();
}

}  // namespace qlil
