#include "qlil/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <set>

#include "qlil/error.hpp"
#include "qlil/numeric.hpp"

namespace qlil {

namespace {

void only_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) {
    throw PreconditionError("config: '" + where + "' must be an object");
  }
  for (const auto& item : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; })) {
      const std::string path = where.empty() ? item.key() : where + "." + item.key();
      throw PreconditionError("config: unknown key '" + path + "'");
    }
  }
}

std::string path_of(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

template <class T>
T get(const Json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) {
    throw PreconditionError("config: missing key '" + path_of(where, key) + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw PreconditionError("config: key '" + path_of(where, key) + "' has the wrong type");
  }
}

double positive(double x, const std::string& what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw PreconditionError("config: '" + what + "' must be positive and finite");
  }
  return x;
}

ModelRef parse_model(const Json& j, const std::string& where) {
  only_keys(j, where, {"model", "param"});
  ModelRef ref;
  ref.model = get<std::string>(j, where, "model");
  make_model(ref.model);  // rejects unknown names early
  if (j.contains("param")) {
    ref.param = get<double>(j, where, "param");
  }
  return ref;
}

StoppingRule parse_rule(const Json& j) {
  only_keys(j, "rule", {"type", "value"});
  const auto type = get<std::string>(j, "rule", "type");
  const auto value = get<double>(j, "rule", "value");
  const auto count = [&] {
    if (!(value >= 0.0) || value != std::floor(value) || value > 1e15) {
      throw PreconditionError("config: 'rule.value' must be a nonnegative integer for " + type);
    }
    return static_cast<std::uint64_t>(value);
  };
  StoppingRule rule;
  if (type == "fixed_time") {
    rule = FixedTime{value};
  } else if (type == "fixed_departures") {
    rule = FixedDepartures{count()};
  } else if (type == "fixed_arrivals") {
    rule = FixedArrivals{count()};
  } else if (type == "fixed_transitions") {
    rule = FixedTransitions{count()};
  } else {
    throw PreconditionError("config: unknown rule type '" + type +
                            "' (fixed_time, fixed_departures, fixed_arrivals, fixed_transitions)");
  }
  validate(rule);
  return rule;
}

std::vector<double> parse_grid(const Json& j) {
  if (j.is_array()) {
    try {
      return j.get<std::vector<double>>();
    } catch (const Json::exception&) {
      throw PreconditionError("config: 'grid' must be an array of numbers");
    }
  }
  only_keys(j, "grid", {"start", "ratio", "count"});
  const double start = positive(get<double>(j, "grid", "start"), "grid.start");
  const double ratio = get<double>(j, "grid", "ratio");
  const auto count = get<std::size_t>(j, "grid", "count");
  if (!(ratio > 1.0) || count == 0) {
    throw PreconditionError("config: grid needs ratio > 1 and count >= 1");
  }
  std::vector<double> grid;
  double t = start;
  for (std::size_t i = 0; i < count; ++i) {
    grid.push_back(t);
    t *= ratio;
  }
  return grid;
}

}  // namespace

ClassFunction parse_boundary(const Json& j, const std::string& where) {
  if (!j.is_object()) {
    throw PreconditionError("config: '" + where + "' must be an object");
  }
  const auto family = get<std::string>(j, where, "family");
  if (family == "scaled_lil" || family == "power_loglog") {
    only_keys(j, where, {"family", "param"});
    const double c = get<double>(j, where, "param");
    return family == "scaled_lil" ? ClassFunction::scaled_lil(c) : ClassFunction::power_loglog(c);
  }
  if (family == "table") {
    only_keys(j, where, {"family", "points"});
    std::vector<std::pair<double, double>> points;
    for (const auto& p : get<Json>(j, where, "points")) {
      if (!p.is_array() || p.size() != 2) {
        throw PreconditionError("config: '" + where + ".points' entries must be [T, h] pairs");
      }
      // "inf" is accepted for the infinite boundary marker.
      const auto value = [&](const Json& x) {
        if (x.is_string() && x.get<std::string>() == "inf") {
          return std::numeric_limits<double>::infinity();
        }
        if (!x.is_number()) {
          throw PreconditionError("config: '" + where + ".points' must hold numbers");
        }
        return x.get<double>();
      };
      points.emplace_back(value(p[0]), value(p[1]));
    }
    return ClassFunction::user_table(std::move(points));
  }
  throw PreconditionError("config: unknown boundary family '" + family +
                          "' (scaled_lil, power_loglog, table)");
}

RunConfig parse_run_config(const Json& j) {
  only_keys(j, "",
            {"arrival", "service", "rule", "grid", "replications", "seed", "boundaries",
             "boundary", "epsilon", "parallel", "out", "stability_check", "t_max", "margin", "C",
             "true_params"});
  RunConfig cfg;
  if (j.contains("arrival")) cfg.arrival = parse_model(j["arrival"], "arrival");
  if (j.contains("service")) cfg.service = parse_model(j["service"], "service");
  if (j.contains("rule")) cfg.rule = parse_rule(j["rule"]);
  if (j.contains("grid")) cfg.grid = parse_grid(j["grid"]);
  if (j.contains("replications")) cfg.replications = get<std::uint64_t>(j, "", "replications");
  if (j.contains("seed")) cfg.seed = get<std::uint64_t>(j, "", "seed");
  if (j.contains("boundaries")) {
    const auto& list = j["boundaries"];
    if (!list.is_array()) throw PreconditionError("config: 'boundaries' must be an array");
    std::vector<ClassFunction> boundaries;
    for (std::size_t i = 0; i < list.size(); ++i) {
      boundaries.push_back(parse_boundary(list[i], "boundaries[" + std::to_string(i) + "]"));
    }
    cfg.boundaries = std::move(boundaries);
  }
  if (j.contains("boundary")) cfg.boundary = parse_boundary(j["boundary"], "boundary");
  if (j.contains("epsilon")) {
    cfg.epsilon = get<std::string>(j, "", "epsilon");
    DecayFunction::parse(cfg.epsilon);
  }
  if (j.contains("parallel")) {
    cfg.parallel = get<unsigned>(j, "", "parallel");
    if (cfg.parallel == 0) throw PreconditionError("config: 'parallel' must be >= 1");
  }
  if (j.contains("out")) cfg.out = get<std::string>(j, "", "out");
  if (j.contains("stability_check")) cfg.stability_check = get<bool>(j, "", "stability_check");
  if (j.contains("t_max")) cfg.t_max = positive(get<double>(j, "", "t_max"), "t_max");
  if (j.contains("margin")) cfg.margin = positive(get<double>(j, "", "margin"), "margin");
  if (j.contains("C")) cfg.c = get<double>(j, "", "C");
  if (j.contains("true_params")) {
    const auto& t = j["true_params"];
    only_keys(t, "true_params", {"theta0", "phi0"});
    cfg.true_params = TrueParams{get<double>(t, "true_params", "theta0"),
                                 get<double>(t, "true_params", "phi0")};
  }
  cfg.canonical = j;
  cfg.canonical.erase("parallel");
  cfg.canonical.erase("out");
  return cfg;
}

LawSpec RunConfig::require_law(const char* which) const {
  const auto& ref = std::string_view(which) == "arrival" ? arrival : service;
  if (!ref) throw PreconditionError(std::string("config: missing key '") + which + ".model'");
  if (!ref->param) throw PreconditionError(std::string("config: missing key '") + which + ".param'");
  return {ref->model, *ref->param};
}

std::vector<double> RunConfig::require_grid() const {
  if (!grid) throw PreconditionError("config: missing key 'grid'");
  return *grid;
}

std::uint64_t RunConfig::require_replications() const {
  if (!replications) throw PreconditionError("config: missing key 'replications'");
  return *replications;
}

std::vector<ClassFunction> RunConfig::require_boundaries() const {
  if (!boundaries) throw PreconditionError("config: missing key 'boundaries'");
  return *boundaries;
}

ClassFunction RunConfig::require_boundary() const {
  if (!boundary) throw PreconditionError("config: missing key 'boundary'");
  return *boundary;
}

StoppingRule RunConfig::require_rule() const {
  if (!rule) throw PreconditionError("config: missing key 'rule'");
  return *rule;
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.arrival = require_law("arrival");
  e.service = require_law("service");
  e.grid = require_grid();
  e.replications = require_replications();
  e.master_seed = seed;
  if (boundaries) e.boundaries = *boundaries;
  e.epsilon = DecayFunction::parse(epsilon);
  e.parallelism = parallel;
  e.stability_check = stability_check;
  return e;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(numeric::fnv1a64(canonical.dump())));
  return buf;
}

}  // namespace qlil
