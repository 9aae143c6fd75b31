#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlil/classfn.hpp"
#include "qlil/expfam.hpp"
#include "qlil/qsim.hpp"

namespace qlil {

struct LawSpec {
  std::string model;  // catalog name
  double param;       // true parameter value

  BoundLaw bind() const { return {make_model(model), param}; }
};

struct ExperimentConfig {
  LawSpec arrival{"exponential", 1.0};
  LawSpec service{"exponential", 1.5};
  /// Checkpoint times. Each replication is one path observed at every time.
  std::vector<double> grid;
  std::uint64_t replications = 1;
  std::uint64_t master_seed = 0;
  std::vector<ClassFunction> boundaries;
  DecayFunction epsilon = DecayFunction::power(0.4);
  unsigned parallelism = 1;
  bool stability_check = false;
};

struct Checkpoint {
  double T = 0.0;
  std::size_t a_count = 0;
  std::size_t d_count = 0;
  double idle = 0.0;
  bool estimable = false;  // both A(T) >= 1 and D(T) >= 1
  double theta_hat = 0.0;
  double phi_hat = 0.0;
  double z_theta = 0.0;
  double z_phi = 0.0;
};

struct PathRecord {
  std::uint64_t replication = 0;
  std::vector<Checkpoint> checkpoints;
};

/// Runs every replication of `config` and returns the records ordered by
/// replication id. Replication i uses RngStream(master_seed, i); the worker
/// count only changes wall time.
std::vector<PathRecord> run_paths(const ExperimentConfig& config);

/// Returns a warning when the stability flag is set and the mean
/// interarrival time does not exceed the mean service time.
std::optional<std::string> stability_warning(const ExperimentConfig& config);

struct NormalityRow {
  double T;
  std::size_t used;
  std::size_t excluded;
  double ks_theta;
  double ks_phi;
  double mean_z_theta;
  double mean_z_phi;
  double eps_sqrt;
  double envelope_1;
  double envelope_5;
  double envelope_25;
};

struct NormalityReport {
  std::vector<NormalityRow> rows;
};

inline constexpr std::uint64_t kMinNormalityReplications = 200;
inline constexpr std::uint64_t kMinC1Replications = 500;
inline constexpr std::uint64_t kMinCrossingReplications = 500;
inline constexpr std::uint64_t kMinConsistencyReplications = 500;
inline constexpr double kMaxExcludedFraction = 0.05;

/// KS distance of the standardized estimates to N(0, 1) at each grid time.
/// Throws PreconditionError when N < 200 and DataError when more than 5% of
/// windows at some T cannot be estimated.
NormalityReport run_normality(const ExperimentConfig& config);
NormalityReport summarize_normality(const ExperimentConfig& config,
                                    std::vector<PathRecord> records);

struct C1Row {
  double T;
  double eps;
  double eps_sqrt;
  double mean_a;
  double mean_d;
  double freq_a;
  double se_a;
  double freq_d;
  double se_d;
};

struct C1Report {
  std::vector<C1Row> rows;
};

/// Empirical P{|A(T)/E^(A(T)) - 1| >= eps(T)} (and the D analogue) with the
/// replication mean standing in for E(A(T)). Requires N >= 500.
C1Report run_condition_c1(const ExperimentConfig& config);
C1Report summarize_condition_c1(const ExperimentConfig& config,
                                std::vector<PathRecord> records);

struct BoundaryCrossings {
  std::string boundary;
  std::vector<double> h_values;       // h(T_k)
  std::vector<double> crossing_freq;  // p_k = fraction with z(T_k) > h(T_k)
  std::vector<double> tail_fraction;  // fraction crossing at some k >= j
};

struct CrossingReport {
  std::vector<double> grid;
  std::size_t replications = 0;
  std::vector<BoundaryCrossings> boundaries;
};

/// Nested-path crossing experiment. Requires a geometric grid of at least six
/// points, N >= 500 and at least one boundary.
CrossingReport run_crossings(const ExperimentConfig& config);
CrossingReport summarize_crossings(const ExperimentConfig& config,
                                   std::vector<PathRecord> records);

struct ConsistencyRow {
  double T;
  double mae_theta;
  double mae_phi;
  std::optional<double> ratio_theta;  // MAE(next T) / MAE(T)
  std::optional<double> ratio_phi;
};

struct ConsistencyReport {
  std::vector<ConsistencyRow> rows;
};

/// Mean absolute error of the estimates on a ratio-4 grid. Requires N >= 500.
ConsistencyReport run_consistency(const ExperimentConfig& config);
ConsistencyReport summarize_consistency(const ExperimentConfig& config,
                                        std::vector<PathRecord> records);

}  // namespace qlil
