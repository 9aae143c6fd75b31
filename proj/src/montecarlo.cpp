#include "qlil/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "qlil/error.hpp"
#include "qlil/mle.hpp"
#include "qlil/numeric.hpp"

namespace qlil {

namespace {

void require_grid(std::span<const double> grid) {
  if (grid.empty()) {
    throw PreconditionError("experiment needs a nonempty time grid");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw PreconditionError("time grid must be positive and strictly increasing");
    }
  }
}

void require_replications(const ExperimentConfig& config, std::uint64_t minimum,
                          const char* what) {
  if (config.replications < minimum) {
    std::ostringstream msg;
    msg << what << " needs at least " << minimum << " replications, got "
        << config.replications;
    throw PreconditionError(msg.str());
  }
}

void require_constant_ratio(std::span<const double> grid, std::optional<double> ratio,
                            const char* what) {
  if (grid.size() < 2) return;
  const double r = ratio.value_or(grid[1] / grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(grid[i] / grid[i - 1] - r) > 1e-9 * r) {
      throw PreconditionError(std::string(what) + " needs a geometric grid" +
                              (ratio ? " with ratio 4" : ""));
    }
  }
}

PathRecord run_replication(const BoundLaw& arrival, const BoundLaw& service,
                           std::span<const double> grid, std::uint64_t master_seed,
                           std::uint64_t id) {
  RngStream rng(master_seed, id);
  QueuePath path(arrival, service, rng);
  const TrueParams truth{arrival.param, service.param};
  PathRecord record;
  record.replication = id;
  record.checkpoints.reserve(grid.size());
  for (const double T : grid) {
    path.advance_to(T);
    const WindowView view = path.view(T);
    Checkpoint cp;
    cp.T = T;
    cp.a_count = view.a_count();
    cp.d_count = view.d_count();
    cp.idle = view.idle;
    if (cp.a_count >= 1 && cp.d_count >= 1) {
      const MleResult r = estimate(view, arrival.model, service.model, truth);
      cp.estimable = true;
      cp.theta_hat = r.theta_hat;
      cp.phi_hat = r.phi_hat;
      cp.z_theta = *r.z_theta;
      cp.z_phi = *r.z_phi;
    }
    record.checkpoints.push_back(cp);
  }
  return record;
}

// Keyed reduction: aggregation always sees replications in id order.
void order_by_replication(std::vector<PathRecord>& records, std::size_t grid_size) {
  std::sort(records.begin(), records.end(),
            [](const PathRecord& a, const PathRecord& b) { return a.replication < b.replication; });
  for (const auto& r : records) {
    if (r.checkpoints.size() != grid_size) {
      throw PreconditionError("path record does not match the experiment grid");
    }
  }
}

double mean_of(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  return numeric::stable_sum(values) / static_cast<double>(values.size());
}

}  // namespace

std::vector<PathRecord> run_paths(const ExperimentConfig& config) {
  require_grid(config.grid);
  if (config.replications == 0) {
    throw PreconditionError("experiment needs at least one replication");
  }
  const BoundLaw arrival = config.arrival.bind();
  const BoundLaw service = config.service.bind();
  arrival.model.require_in_domain(arrival.param);
  service.model.require_in_domain(service.param);

  const std::uint64_t n = config.replications;
  std::vector<PathRecord> records(n);
  std::vector<std::exception_ptr> failures(n);
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};

  const auto worker = [&] {
    const BoundLaw local_arrival = arrival;
    const BoundLaw local_service = service;
    for (std::uint64_t i = next++; i < n && !failed; i = next++) {
      try {
        records[i] =
            run_replication(local_arrival, local_service, config.grid, config.master_seed, i);
      } catch (...) {
        failures[i] = std::current_exception();
        failed = true;
      }
    }
  };

  const unsigned threads =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1U, config.parallelism), n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return records;
}

std::optional<std::string> stability_warning(const ExperimentConfig& config) {
  if (!config.stability_check) return std::nullopt;
  const BoundLaw arrival = config.arrival.bind();
  const BoundLaw service = config.service.bind();
  const double mean_u = arrival.model.mean(arrival.param);
  const double mean_v = service.model.mean(service.param);
  if (std::isnan(mean_u) || std::isnan(mean_v)) {
    return "stability could not be checked: model means unknown";
  }
  if (!(mean_u > mean_v)) {
    std::ostringstream msg;
    msg << "queue is not stable: mean interarrival " << mean_u << " <= mean service " << mean_v;
    return msg.str();
  }
  return std::nullopt;
}

NormalityReport run_normality(const ExperimentConfig& config) {
  require_replications(config, kMinNormalityReplications, "normality experiment");
  return summarize_normality(config, run_paths(config));
}

NormalityReport summarize_normality(const ExperimentConfig& config,
                                    std::vector<PathRecord> records) {
  order_by_replication(records, config.grid.size());
  const auto total = static_cast<double>(records.size());
  NormalityReport report;
  for (std::size_t k = 0; k < config.grid.size(); ++k) {
    std::vector<double> z_theta;
    std::vector<double> z_phi;
    for (const auto& r : records) {
      const Checkpoint& cp = r.checkpoints[k];
      if (cp.estimable) {
        z_theta.push_back(cp.z_theta);
        z_phi.push_back(cp.z_phi);
      }
    }
    NormalityRow row{};
    row.T = config.grid[k];
    row.used = z_theta.size();
    row.excluded = records.size() - row.used;
    if (static_cast<double>(row.excluded) > kMaxExcludedFraction * total) {
      std::ostringstream msg;
      msg << row.excluded << " of " << records.size() << " windows at T = " << row.T
          << " have A(T) = 0 or D(T) = 0";
      throw DataError(msg.str());
    }
    row.ks_theta = numeric::ks_normal(z_theta);
    row.ks_phi = numeric::ks_normal(z_phi);
    row.mean_z_theta = mean_of(z_theta);
    row.mean_z_phi = mean_of(z_phi);
    row.eps_sqrt = std::sqrt(config.epsilon(row.T));
    row.envelope_1 = row.eps_sqrt;
    row.envelope_5 = 5.0 * row.eps_sqrt;
    row.envelope_25 = 25.0 * row.eps_sqrt;
    report.rows.push_back(row);
  }
  return report;
}

C1Report run_condition_c1(const ExperimentConfig& config) {
  require_replications(config, kMinC1Replications, "condition C1 experiment");
  return summarize_condition_c1(config, run_paths(config));
}

C1Report summarize_condition_c1(const ExperimentConfig& config,
                                std::vector<PathRecord> records) {
  order_by_replication(records, config.grid.size());
  const auto n = static_cast<double>(records.size());
  C1Report report;
  for (std::size_t k = 0; k < config.grid.size(); ++k) {
    std::vector<double> a;
    std::vector<double> d;
    for (const auto& r : records) {
      a.push_back(static_cast<double>(r.checkpoints[k].a_count));
      d.push_back(static_cast<double>(r.checkpoints[k].d_count));
    }
    C1Row row{};
    row.T = config.grid[k];
    row.eps = config.epsilon(row.T);
    row.eps_sqrt = std::sqrt(row.eps);
    row.mean_a = mean_of(a);
    row.mean_d = mean_of(d);
    const auto exceed = [&](const std::vector<double>& counts, double mean) {
      std::size_t hits = 0;
      for (const double c : counts) {
        if (std::abs(c / mean - 1.0) >= row.eps) ++hits;
      }
      return static_cast<double>(hits) / n;
    };
    row.freq_a = exceed(a, row.mean_a);
    row.freq_d = exceed(d, row.mean_d);
    row.se_a = std::sqrt(row.freq_a * (1.0 - row.freq_a) / n);
    row.se_d = std::sqrt(row.freq_d * (1.0 - row.freq_d) / n);
    report.rows.push_back(row);
  }
  return report;
}

CrossingReport run_crossings(const ExperimentConfig& config) {
  require_replications(config, kMinCrossingReplications, "crossing experiment");
  if (config.grid.size() < 6) {
    throw PreconditionError("crossing experiment needs at least 6 checkpoints");
  }
  require_constant_ratio(config.grid, std::nullopt, "crossing experiment");
  if (config.boundaries.empty()) {
    throw PreconditionError("crossing experiment needs at least one boundary");
  }
  return summarize_crossings(config, run_paths(config));
}

CrossingReport summarize_crossings(const ExperimentConfig& config,
                                   std::vector<PathRecord> records) {
  order_by_replication(records, config.grid.size());
  const std::size_t m = config.grid.size();
  const auto n = static_cast<double>(records.size());
  CrossingReport report;
  report.grid = config.grid;
  report.replications = records.size();
  for (const auto& h : config.boundaries) {
    BoundaryCrossings b;
    b.boundary = h.describe();
    for (const double T : config.grid) {
      b.h_values.push_back(h(T));
    }
    std::vector<std::size_t> hits(m, 0);
    std::vector<std::size_t> tail_hits(m, 0);
    for (const auto& r : records) {
      // Last checkpoint index at which this path is above the boundary.
      std::optional<std::size_t> last;
      for (std::size_t k = 0; k < m; ++k) {
        const Checkpoint& cp = r.checkpoints[k];
        if (cp.estimable && cp.z_theta > b.h_values[k]) {
          ++hits[k];
          last = k;
        }
      }
      if (last) {
        for (std::size_t j = 0; j <= *last; ++j) ++tail_hits[j];
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      b.crossing_freq.push_back(static_cast<double>(hits[k]) / n);
      b.tail_fraction.push_back(static_cast<double>(tail_hits[k]) / n);
    }
    report.boundaries.push_back(std::move(b));
  }
  return report;
}

ConsistencyReport run_consistency(const ExperimentConfig& config) {
  require_replications(config, kMinConsistencyReplications, "consistency experiment");
  require_constant_ratio(config.grid, 4.0, "consistency experiment");
  return summarize_consistency(config, run_paths(config));
}

ConsistencyReport summarize_consistency(const ExperimentConfig& config,
                                        std::vector<PathRecord> records) {
  order_by_replication(records, config.grid.size());
  const double theta0 = config.arrival.param;
  const double phi0 = config.service.param;
  ConsistencyReport report;
  for (std::size_t k = 0; k < config.grid.size(); ++k) {
    std::vector<double> err_theta;
    std::vector<double> err_phi;
    for (const auto& r : records) {
      const Checkpoint& cp = r.checkpoints[k];
      if (cp.estimable) {
        err_theta.push_back(std::abs(cp.theta_hat - theta0));
        err_phi.push_back(std::abs(cp.phi_hat - phi0));
      }
    }
    const std::size_t excluded = records.size() - err_theta.size();
    if (static_cast<double>(excluded) >
        kMaxExcludedFraction * static_cast<double>(records.size())) {
      std::ostringstream msg;
      msg << excluded << " of " << records.size() << " windows at T = " << config.grid[k]
          << " have A(T) = 0 or D(T) = 0";
      throw DataError(msg.str());
    }
    report.rows.push_back({config.grid[k], mean_of(err_theta), mean_of(err_phi), {}, {}});
  }
  for (std::size_t k = 0; k + 1 < report.rows.size(); ++k) {
    report.rows[k].ratio_theta = report.rows[k + 1].mae_theta / report.rows[k].mae_theta;
    report.rows[k].ratio_phi = report.rows[k + 1].mae_phi / report.rows[k].mae_phi;
  }
  return report;
}

}  // namespace qlil
