#pragma once

// Resource tuning for a fixed placement and the overall least-energy search.
//
// Every local latency shrinks as the clock rises and every uplink time shrinks
// as transmit power rises, so feasibility is monotone in f and in p. Local
// energy grows with f^2 and the total uplink energy E1(p) = p*D/rate(p) grows
// with p, so the cheapest feasible operating point is the smallest feasible f
// and the smallest feasible p. Both are located by bisection.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mecoff/allocate.hpp"
#include "mecoff/schedule.hpp"

namespace mecoff {

struct TuneOptions {
  double rel_tol = 1e-6;       // bisection stops when (hi - lo) <= rel_tol * hi
  double f_min_floor = 1e6;    // clock reported when no unit runs locally
  bool prune_by_bound = true;  // skip members whose energy lower bound exceeds the incumbent
};

struct TunedSolution {
  Assignment assignment;
  double f = 0.0;
  double p = 0.0;
  double energy = 0.0;
  ScheduleResult schedule;
};

// Total uplink energy for D bits at power p: (D / B) * p * log_eta(2),
// eta = 1 + p h^2 / (B N0).
struct TxEnergyCurve {
  double d_total = 0.0;
  double eta = 1.0;
};

inline TxEnergyCurve tx_energy_curve(double d_total, double p, const ChannelState& ch) {
  return {d_total, 1.0 + snr(p, ch)};
}

inline double tx_energy_total(double d_total, double p, const ChannelState& ch) {
  if (!(p > 0.0)) throw InvalidParameter("tx_energy_total: power must be positive");
  // log_eta(2) = ln 2 / ln(eta); ln(eta) via log1p keeps precision at low SNR.
  return d_total / ch.bw * p * std::numbers::ln2 / std::log1p(snr(p, ch));
}

namespace detail {

template <class Pred>
double bisect_lowest(double hi, double rel_tol, Pred&& feasible) {
  double lo = 0.0;
  while (hi - lo > rel_tol * hi) {
    const double mid = lo + (hi - lo) / 2.0;
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

inline bool any_of(std::span<const Placement> placement, Placement which) {
  for (Placement b : placement)
    if (b == which) return true;
  return false;
}

inline std::optional<double> min_frequency_ordered(std::span<const Unit> ordered, std::span<const Placement> placement,
                                                   const ChannelState& ch, const MecCaps& mec, const DeviceCaps& caps,
                                                   double p, const TuneOptions& opt) {
  auto ok = [&](double f) { return is_feasible(ordered, placement, f, p, ch, mec, caps); };
  if (!any_of(placement, Placement::Local)) {
    return ok(opt.f_min_floor) ? std::optional<double>(opt.f_min_floor) : std::nullopt;
  }
  if (!ok(caps.f_max)) return std::nullopt;
  return bisect_lowest(caps.f_max, opt.rel_tol, ok);
}

inline std::optional<double> min_power_ordered(std::span<const Unit> ordered, std::span<const Placement> placement,
                                               const ChannelState& ch, const MecCaps& mec, const DeviceCaps& caps,
                                               double f, const TuneOptions& opt) {
  auto ok = [&](double p) { return is_feasible(ordered, placement, f, p, ch, mec, caps); };
  if (!any_of(placement, Placement::Mec)) {
    return ok(0.0) ? std::optional<double>(0.0) : std::nullopt;
  }
  if (!ok(caps.p_max)) return std::nullopt;
  return bisect_lowest(caps.p_max, opt.rel_tol, ok);
}

// Lower bound on the tuned energy of one placement: the clock can be no lower
// than the cumulative-work/deadline ratio of any local unit, and E1 is never
// below its p -> 0 limit D ln2 / (B g).
inline double energy_lower_bound(std::span<const Unit> ordered, std::span<const Placement> placement,
                                  const ChannelState& ch, const DeviceCaps& caps) {
  double w_cum = 0.0, f_lb = 0.0, d_mec = 0.0;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (placement[i] == Placement::Local) {
      w_cum += ordered[i].w;
      f_lb = std::max(f_lb, w_cum / std::min(ordered[i].deadline, caps.user_deadline));
    } else {
      d_mec += ordered[i].d;
    }
  }
  const double g = ch.gain_to_noise();
  double e_tx = (d_mec > 0.0 && g > 0.0) ? d_mec * std::numbers::ln2 / (ch.bw * g) : 0.0;
  return (caps.kappa * w_cum * f_lb * f_lb + e_tx) * (1.0 - 1e-9);
}

// Strict weak order: lower energy, then fewer MEC units, then smaller bits.
inline bool better(double e_a, std::span<const Placement> a, double e_b, std::span<const Placement> b) {
  if (e_a != e_b) return e_a < e_b;
  std::size_t ma = 0, mb = 0;
  for (auto x : a) ma += x == Placement::Mec;
  for (auto x : b) mb += x == Placement::Mec;
  if (ma != mb) return ma < mb;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

inline std::optional<double> min_feasible_frequency(const Assignment& assignment, std::span<const Unit> units,
                                                    const ChannelState& ch, const MecCaps& mec,
                                                    const DeviceCaps& caps, double p, const TuneOptions& opt = {}) {
  auto ordered = ordered_units(assignment, units);
  return detail::min_frequency_ordered(ordered, assignment.placement, ch, mec, caps, p, opt);
}

inline std::optional<double> min_feasible_power(const Assignment& assignment, std::span<const Unit> units,
                                                const ChannelState& ch, const MecCaps& mec, const DeviceCaps& caps,
                                                double f, const TuneOptions& opt = {}) {
  auto ordered = ordered_units(assignment, units);
  return detail::min_power_ordered(ordered, assignment.placement, ch, mec, caps, f, opt);
}

// Tunes one placement: f at p_max first, then p at the tuned f.
inline std::optional<TunedSolution> tune_placement(std::span<const Unit> ordered, std::span<const Placement> placement,
                                                   const ChannelState& ch, const MecCaps& mec,
                                                   const DeviceCaps& caps, const TuneOptions& opt = {}) {
  auto f = detail::min_frequency_ordered(ordered, placement, ch, mec, caps, caps.p_max, opt);
  if (!f) return std::nullopt;
  auto p = detail::min_power_ordered(ordered, placement, ch, mec, caps, *f, opt);
  if (!p) return std::nullopt;

  TunedSolution sol;
  sol.assignment.order.reserve(ordered.size());
  for (const auto& u : ordered) sol.assignment.order.push_back(u.id);
  sol.assignment.placement.assign(placement.begin(), placement.end());
  sol.f = *f;
  sol.p = *p;
  sol.schedule = evaluate_ordered(ordered, placement, sol.f, sol.p, ch, mec, caps);
  if (!check_constraints(sol.schedule, ordered, caps).empty()) {
    throw std::logic_error("tuned operating point failed re-validation");
  }
  sol.energy = sol.schedule.e_total;
  return sol;
}

// Least-energy tuned member of a feasible set, or nullopt when it is empty.
inline std::optional<TunedSolution> optimize_feasible_set(const FeasibleSet& set, const ChannelState& ch,
                                                          const MecCaps& mec, const DeviceCaps& caps,
                                                          const TuneOptions& opt = {}) {
  std::optional<TunedSolution> best;
  for (const auto& bits : set.placements) {
    if (opt.prune_by_bound && best &&
        detail::energy_lower_bound(set.order, bits, ch, caps) > best->energy) {
      continue;
    }
    auto sol = tune_placement(set.order, bits, ch, mec, caps, opt);
    if (!sol) continue;  // cannot happen for members found at (f_max, p_max)
    if (!best || detail::better(sol->energy, sol->assignment.placement, best->energy, best->assignment.placement)) {
      best = std::move(sol);
    }
  }
  return best;
}

inline std::optional<TunedSolution> optimize_user(std::span<const Unit> units, const ChannelState& ch,
                                                  const MecCaps& mec, const DeviceCaps& caps,
                                                  const TuneOptions& opt = {}) {
  auto ordered = order_units(units);
  auto set = enumerate_feasible(ordered, caps.f_max, caps.p_max, ch, mec, caps);
  return optimize_feasible_set(set, ch, mec, caps, opt);
}

// Least-energy member at the enumeration point itself, no tuning.
inline std::optional<TunedSolution> best_untuned(const FeasibleSet& set, double f, double p, const ChannelState& ch,
                                                 const MecCaps& mec, const DeviceCaps& caps) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!best || detail::better(set.energy[i], set.placements[i], set.energy[*best], set.placements[*best])) best = i;
  }
  if (!best) return std::nullopt;
  TunedSolution sol;
  sol.assignment = set.assignment(*best);
  sol.f = f;
  sol.p = p;
  sol.schedule = evaluate_ordered(set.order, set.placements[*best], f, p, ch, mec, caps);
  sol.energy = sol.schedule.e_total;
  return sol;
}

}  // namespace mecoff
