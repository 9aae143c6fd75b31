#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qlil/classfn.hpp"
#include "qlil/mle.hpp"
#include "qlil/montecarlo.hpp"
#include "qlil/qsim.hpp"
#include "qlil/serialize.hpp"

namespace qlil {

/// A model reference as written in a config file. The parameter is optional
/// because `estimate` only needs the family.
struct ModelRef {
  std::string model;
  std::optional<double> param;
};

/// Parsed run configuration. Every key is optional at parse time; commands
/// ask for what they need through the require_* accessors, which throw
/// PreconditionError naming the missing key.
struct RunConfig {
  std::optional<ModelRef> arrival;
  std::optional<ModelRef> service;
  std::optional<StoppingRule> rule;
  std::optional<std::vector<double>> grid;
  std::optional<std::uint64_t> replications;
  std::uint64_t seed = 0;
  std::optional<std::vector<ClassFunction>> boundaries;
  std::optional<ClassFunction> boundary;
  std::string epsilon = "power:0.4";
  unsigned parallel = 1;
  std::string out = "runs";
  bool stability_check = false;
  std::optional<double> t_max;
  std::optional<double> margin;
  double c = 1.0;
  std::optional<TrueParams> true_params;

  /// The effective configuration without the keys that cannot change results
  /// (parallel, out). Its hash names output directories.
  Json canonical;

  LawSpec require_law(const char* which) const;
  std::vector<double> require_grid() const;
  std::uint64_t require_replications() const;
  std::vector<ClassFunction> require_boundaries() const;
  ClassFunction require_boundary() const;
  StoppingRule require_rule() const;

  ExperimentConfig experiment() const;
  std::string hash() const;
};

/// Validates and parses a config object. Unknown keys are rejected at every
/// level.
RunConfig parse_run_config(const Json& j);

ClassFunction parse_boundary(const Json& j, const std::string& where);

}  // namespace qlil
