#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qlil/expfam.hpp"
#include "qlil/rng.hpp"

namespace qlil {

/// A model together with its true parameter value.
struct BoundLaw {
  ExpFamilyModel model;
  double param;

  double draw(RngStream& rng) const { return model.sample(param, rng); }
};

// The four ways of ending observation.
struct FixedTime {
  double t;
};
struct FixedDepartures {
  std::uint64_t d;
};
struct FixedArrivals {
  std::uint64_t m;
};
struct FixedTransitions {
  std::uint64_t n;
};

using StoppingRule =
    std::variant<FixedTime, FixedDepartures, FixedArrivals, FixedTransitions>;

/// Throws PreconditionError unless t > 0, d >= 1, m >= 1, n >= 2.
void validate(const StoppingRule& rule);
std::string describe(const StoppingRule& rule);

/// Non-owning view of one observed sample path on [0, T].
struct WindowView {
  double T = 0.0;
  std::span<const double> arrivals;  // u_1 .. u_A(T)
  std::span<const double> services;  // v_1 .. v_D(T), completed services only
  double idle = 0.0;                 // gamma(T)

  std::size_t a_count() const { return arrivals.size(); }
  std::size_t d_count() const { return services.size(); }
};

/// One observed sample path: the stopping time, the completed interarrival
/// and service times, and the total idle time. The customer present at t = 0
/// is not counted among the arrivals; its service, once completed, is the
/// first entry of `services`.
struct ObservationWindow {
  double T = 0.0;
  std::vector<double> arrivals;
  std::vector<double> services;
  double idle = 0.0;
  bool initial_customer_present = true;

  std::size_t a_count() const { return arrivals.size(); }
  std::size_t d_count() const { return services.size(); }

  WindowView view() const { return {T, arrivals, services, idle}; }

  bool operator==(const ObservationWindow&) const = default;
};

inline constexpr std::uint64_t kMaxEventsPerWindow = 100'000'000;

/// Event-driven FCFS single-server queue. One path can be advanced
/// repeatedly, so nested observation windows share a single realization.
///
/// Draw order is fixed: u_1 then v_1 at construction; on each arrival the
/// next interarrival time is drawn before any service that the arrival starts;
/// on each departure the next service (if a customer waits) is drawn.
class QueuePath {
 public:
  QueuePath(BoundLaw arrival, BoundLaw service, RngStream& rng);

  /// Processes every event with epoch <= t. Does not move backwards.
  void advance_to(double t);
  /// Processes exactly one event (departures win ties) and returns its epoch.
  double step();

  double now() const { return now_; }
  double next_event_epoch() const;
  std::uint64_t transitions() const { return arrivals_.size() + services_.size(); }
  std::size_t a_count() const { return arrivals_.size(); }
  std::size_t d_count() const { return services_.size(); }

  /// Idle time accumulated on [0, t] for t >= now().
  double idle_until(double t) const;

  /// View of the window ending at T >= now(). Valid until the next advance.
  WindowView view(double T) const;
  ObservationWindow snapshot(double T) const;

 private:
  void start_service(double epoch);
  double checked_draw(const BoundLaw& law);

  BoundLaw arrival_;
  BoundLaw service_;
  RngStream& rng_;

  double now_ = 0.0;
  double next_arrival_ = 0.0;
  double next_departure_ = 0.0;
  double pending_service_ = 0.0;
  double pending_gap_ = 0.0;
  std::uint64_t in_system_ = 1;
  bool busy_ = false;
  double idle_ = 0.0;
  double idle_since_ = 0.0;
  std::vector<double> arrivals_;
  std::vector<double> services_;
};

/// Simulates one window under `rule`.
ObservationWindow simulate(const BoundLaw& arrival, const BoundLaw& service,
                           const StoppingRule& rule, RngStream& rng);

/// Observes a single path at each time of a strictly increasing positive
/// grid. Later windows extend earlier ones.
std::vector<ObservationWindow> checkpoints(const BoundLaw& arrival,
                                           const BoundLaw& service,
                                           std::span<const double> grid,
                                           RngStream& rng);

struct WindowCheck {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Checks the structural invariants of a window (and the rule-specific
/// identities when `rule` is given). Sums are compared with a relative slack
/// of `rel_tol * T` to absorb floating-point rounding.
WindowCheck check_window(const ObservationWindow& w, const StoppingRule* rule = nullptr,
                         double rel_tol = 1e-11);

}  // namespace qlil
