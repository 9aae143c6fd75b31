#include "qlil/qsim.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "qlil/error.hpp"

namespace qlil {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validate(const StoppingRule& rule) {
  std::visit(Overloaded{
                 [](const FixedTime& r) {
                   if (!(r.t > 0.0) || !std::isfinite(r.t))
                     throw PreconditionError("fixed-time rule needs t > 0");
                 },
                 [](const FixedDepartures& r) {
                   if (r.d < 1) throw PreconditionError("fixed-departures rule needs d >= 1");
                 },
                 [](const FixedArrivals& r) {
                   if (r.m < 1) throw PreconditionError("fixed-arrivals rule needs m >= 1");
                 },
                 [](const FixedTransitions& r) {
                   if (r.n < 2) throw PreconditionError("fixed-transitions rule needs n >= 2");
                 },
             },
             rule);
}

std::string describe(const StoppingRule& rule) {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const FixedTime& r) { out << "fixed_time(" << r.t << ")"; },
                 [&](const FixedDepartures& r) { out << "fixed_departures(" << r.d << ")"; },
                 [&](const FixedArrivals& r) { out << "fixed_arrivals(" << r.m << ")"; },
                 [&](const FixedTransitions& r) { out << "fixed_transitions(" << r.n << ")"; },
             },
             rule);
  return out.str();
}

QueuePath::QueuePath(BoundLaw arrival, BoundLaw service, RngStream& rng)
    : arrival_(std::move(arrival)), service_(std::move(service)), rng_(rng) {
  arrival_.model.require_in_domain(arrival_.param);
  service_.model.require_in_domain(service_.param);
  // The initial customer arrives at t = 0 and is served immediately.
  pending_gap_ = checked_draw(arrival_);
  next_arrival_ = pending_gap_;
  start_service(0.0);
}

double QueuePath::checked_draw(const BoundLaw& law) {
  const double x = law.draw(rng_);
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream msg;
    msg << "sampler for '" << law.model.name() << "' produced invalid draw " << x;
    throw SimulationFault(msg.str());
  }
  return x;
}

void QueuePath::start_service(double epoch) {
  pending_service_ = checked_draw(service_);
  next_departure_ = epoch + pending_service_;
  busy_ = true;
}

double QueuePath::next_event_epoch() const {
  return busy_ && next_departure_ <= next_arrival_ ? next_departure_ : next_arrival_;
}

double QueuePath::step() {
  if (transitions() >= kMaxEventsPerWindow) {
    throw SimulationFault("event ceiling reached before the stopping rule was met");
  }
  if (busy_ && next_departure_ <= next_arrival_) {
    now_ = next_departure_;
    services_.push_back(pending_service_);
    --in_system_;
    if (in_system_ > 0) {
      start_service(now_);
    } else {
      busy_ = false;
      idle_since_ = now_;
    }
  } else {
    now_ = next_arrival_;
    arrivals_.push_back(pending_gap_);
    ++in_system_;
    pending_gap_ = checked_draw(arrival_);
    next_arrival_ = now_ + pending_gap_;
    if (!busy_) {
      idle_ += now_ - idle_since_;
      start_service(now_);
    }
  }
  return now_;
}

void QueuePath::advance_to(double t) {
  while (next_event_epoch() <= t) {
    step();
  }
}

double QueuePath::idle_until(double t) const { return busy_ ? idle_ : idle_ + (t - idle_since_); }

WindowView QueuePath::view(double T) const {
  return {T, arrivals_, services_, idle_until(T)};
}

ObservationWindow QueuePath::snapshot(double T) const {
  ObservationWindow w;
  w.T = T;
  w.arrivals = arrivals_;
  w.services = services_;
  w.idle = idle_until(T);
  w.initial_customer_present = true;
  return w;
}

ObservationWindow simulate(const BoundLaw& arrival, const BoundLaw& service,
                           const StoppingRule& rule, RngStream& rng) {
  validate(rule);
  QueuePath path(arrival, service, rng);
  return std::visit(Overloaded{
                        [&](const FixedTime& r) {
                          path.advance_to(r.t);
                          return path.snapshot(r.t);
                        },
                        [&](const FixedDepartures& r) {
                          while (path.d_count() < r.d) path.step();
                          return path.snapshot(path.now());
                        },
                        [&](const FixedArrivals& r) {
                          while (path.a_count() < r.m) path.step();
                          return path.snapshot(path.now());
                        },
                        [&](const FixedTransitions& r) {
                          while (path.transitions() < r.n) path.step();
                          return path.snapshot(path.now());
                        },
                    },
                    rule);
}

std::vector<ObservationWindow> checkpoints(const BoundLaw& arrival, const BoundLaw& service,
                                           std::span<const double> grid, RngStream& rng) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw PreconditionError("checkpoint grid must be positive and strictly increasing");
    }
  }
  QueuePath path(arrival, service, rng);
  std::vector<ObservationWindow> windows;
  windows.reserve(grid.size());
  for (const double t : grid) {
    path.advance_to(t);
    windows.push_back(path.snapshot(t));
  }
  return windows;
}

WindowCheck check_window(const ObservationWindow& w, const StoppingRule* rule, double rel_tol) {
  WindowCheck check;
  const auto fail = [&](std::string what) {
    check.ok = false;
    check.violations.push_back(std::move(what));
  };
  const double slack = rel_tol * std::max(1.0, std::abs(w.T));
  const double sum_u = std::accumulate(w.arrivals.begin(), w.arrivals.end(), 0.0);
  const double sum_v = std::accumulate(w.services.begin(), w.services.end(), 0.0);

  if (!(w.T >= 0.0)) fail("T is negative");
  if (!(w.idle >= 0.0)) fail("idle time is negative");
  for (const double u : w.arrivals) {
    if (!(u > 0.0)) {
      fail("nonpositive interarrival time");
      break;
    }
  }
  for (const double v : w.services) {
    if (!(v > 0.0)) {
      fail("nonpositive service time");
      break;
    }
  }
  if (sum_u > w.T + slack) fail("sum of interarrival times exceeds T");
  if (w.idle + sum_v > w.T + slack) fail("idle plus service time exceeds T");
  if (w.d_count() > w.a_count() + 1) fail("more departures than customers");

  if (rule != nullptr) {
    std::visit(Overloaded{
                   [&](const FixedTime& r) {
                     if (w.T != r.t) fail("T differs from the fixed time");
                   },
                   [&](const FixedDepartures& r) {
                     if (w.d_count() != r.d) fail("D(T) differs from d");
                     if (std::abs(w.T - (w.idle + sum_v)) > slack) fail("T != idle + sum v");
                   },
                   [&](const FixedArrivals& r) {
                     if (w.a_count() != r.m) fail("A(T) differs from m");
                     if (w.T != sum_u) fail("T != sum u");
                   },
                   [&](const FixedTransitions& r) {
                     if (w.a_count() + w.d_count() != r.n) fail("A(T) + D(T) differs from n");
                   },
               },
               *rule);
  }
  return check;
}

}  // namespace qlil
