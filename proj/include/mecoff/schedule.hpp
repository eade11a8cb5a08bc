#pragma once

// Completion-time bookkeeping for one user's units.
//
// MEC-bound units share one uplink and one MEC processor, both serving a
// single unit at a time in order; transmission of unit j+1 overlaps with
// MEC computation of unit j. Local units run back to back on the device CPU,
// concurrently with the uplink/MEC pipeline.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mecoff/model.hpp"

namespace mecoff {

enum class Placement : std::uint8_t { Local = 0, Mec = 1 };

// order[i] is processed i-th; placement[i] is where order[i] runs.
struct Assignment {
  std::vector<UnitId> order;
  std::vector<Placement> placement;

  bool operator==(const Assignment&) const = default;

  std::size_t mec_count() const {
    return static_cast<std::size_t>(std::count(placement.begin(), placement.end(), Placement::Mec));
  }
};

struct MecTiming {
  double wt3 = 0.0;  // queued for the uplink + own transmission
  double wt4 = 0.0;  // received, waiting for the MEC processor
  double lt = 0.0;   // completion time
};

struct LocalTiming {
  double wt = 0.0;
  double lt = 0.0;
};

// Running state of the two service lines. Both evaluate() and the allocation
// tree advance through here so they agree bit for bit.
struct PipelineState {
  double finish_tx = 0.0;
  double last_lt_mec = 0.0;
  double last_lt_local = 0.0;
  double e_tx = 0.0;
  double e_local = 0.0;

  MecTiming push_mec(double t_tx, double t_mec, double energy) {
    MecTiming out;
    out.wt3 = finish_tx + t_tx;
    out.wt4 = std::max(out.wt3, last_lt_mec) - out.wt3;
    out.lt = (out.wt3 + out.wt4) + t_mec;
    finish_tx = out.wt3;
    last_lt_mec = out.lt;
    e_tx += energy;
    return out;
  }

  LocalTiming push_local(double t_local, double energy) {
    LocalTiming out{last_lt_local, last_lt_local + t_local};
    last_lt_local = out.lt;
    e_local += energy;
    return out;
  }

  double ts() const { return std::max(last_lt_mec, last_lt_local); }
  double energy() const { return e_tx + e_local; }
};

struct UnitTiming {
  UnitId id = 0;
  Placement where = Placement::Local;
  double wt3 = 0.0;     // MEC only
  double wt4 = 0.0;     // MEC only
  double wt = 0.0;      // WT^m for MEC units, WT^l for local units
  double lt = 0.0;      // LT^m or LT^l
  double energy = 0.0;  // E^t for MEC units, E^l for local units
};

struct ScheduleResult {
  std::vector<UnitTiming> units;  // processing order
  double ts = 0.0;
  double e_total = 0.0;

  double e_tx_total() const {
    double s = 0.0;
    for (const auto& u : units)
      if (u.where == Placement::Mec) s += u.energy;
    return s;
  }
  double e_local_total() const {
    double s = 0.0;
    for (const auto& u : units)
      if (u.where == Placement::Local) s += u.energy;
    return s;
  }
  const UnitTiming* find(UnitId id) const {
    for (const auto& u : units)
      if (u.id == id) return &u;
    return nullptr;
  }
};

struct Violation {
  Constraint which = Constraint::C1;
  std::optional<UnitId> unit;

  bool operator==(const Violation&) const = default;
};

// Recurrence over raw stage times. tx[j] is uplink time, mec[j] MEC time.
inline std::vector<MecTiming> mec_pipeline_times(std::span<const double> tx, std::span<const double> mec) {
  if (tx.size() != mec.size()) throw InvalidParameter("mec_pipeline: stage time vectors differ in length");
  std::vector<MecTiming> out;
  out.reserve(tx.size());
  PipelineState st;
  for (std::size_t j = 0; j < tx.size(); ++j) out.push_back(st.push_mec(tx[j], mec[j], 0.0));
  return out;
}

inline std::vector<MecTiming> mec_pipeline(std::span<const Unit> units_a, double rate, const MecCaps& mec) {
  if (units_a.empty()) return {};
  if (!(rate > 0.0)) throw InvalidParameter("mec_pipeline: uplink rate must be positive");
  std::vector<double> tx, cm;
  tx.reserve(units_a.size());
  cm.reserve(units_a.size());
  for (const auto& u : units_a) {
    tx.push_back(tx_latency(u.d, rate));
    cm.push_back(mec_latency(u.w, mec));
  }
  return mec_pipeline_times(tx, cm);
}

inline std::vector<LocalTiming> local_sequence_times(std::span<const double> t_local) {
  std::vector<LocalTiming> out;
  out.reserve(t_local.size());
  PipelineState st;
  for (double t : t_local) out.push_back(st.push_local(t, 0.0));
  return out;
}

inline std::vector<LocalTiming> local_sequence(std::span<const Unit> units_b, double f) {
  if (units_b.empty()) return {};
  if (!(f > 0.0)) throw InvalidParameter("local_sequence: frequency must be positive");
  std::vector<double> tl;
  tl.reserve(units_b.size());
  for (const auto& u : units_b) tl.push_back(local_latency(u.w, f));
  return local_sequence_times(tl);
}

namespace detail {

inline void check_caps(double f, double p, const DeviceCaps& caps) {
  if (f > caps.f_max) throw ConstraintViolation(Constraint::C4, "clock frequency above f_max");
  if (p > caps.p_max) throw ConstraintViolation(Constraint::C5, "transmit power above p_max");
}

inline double rate_for(std::span<const Placement> placement, double p, const ChannelState& ch) {
  bool any_mec = std::find(placement.begin(), placement.end(), Placement::Mec) != placement.end();
  if (!any_mec) return 0.0;
  double r = uplink_rate(ch, snr(p, ch));
  if (!(r > 0.0)) throw InvalidParameter("evaluate: uplink rate is zero with MEC-placed units");
  return r;
}

}  // namespace detail

// Units given in processing order with aligned placements.
inline ScheduleResult evaluate_ordered(std::span<const Unit> ordered, std::span<const Placement> placement,
                                       double f, double p, const ChannelState& ch, const MecCaps& mec,
                                       const DeviceCaps& caps) {
  if (ordered.size() != placement.size()) throw InvalidParameter("evaluate: placement does not cover all units");
  detail::check_caps(f, p, caps);
  const double rate = detail::rate_for(placement, p, ch);

  ScheduleResult res;
  res.units.reserve(ordered.size());
  PipelineState st;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const Unit& u = ordered[i];
    UnitTiming t;
    t.id = u.id;
    t.where = placement[i];
    if (placement[i] == Placement::Mec) {
      double t_tx = tx_latency(u.d, rate);
      t.energy = tx_energy(p, t_tx);
      MecTiming m = st.push_mec(t_tx, mec_latency(u.w, mec), t.energy);
      t.wt3 = m.wt3;
      t.wt4 = m.wt4;
      t.wt = m.wt3 + m.wt4;
      t.lt = m.lt;
    } else {
      t.energy = local_energy(caps, u.w, f);
      LocalTiming l = st.push_local(local_latency(u.w, f), t.energy);
      t.wt = l.wt;
      t.lt = l.lt;
    }
    res.units.push_back(t);
  }
  res.ts = st.ts();
  res.e_total = st.energy();
  return res;
}

// Resolves assignment.order against `units` (any order, ids unique).
inline std::vector<Unit> ordered_units(const Assignment& assignment, std::span<const Unit> units) {
  std::unordered_map<UnitId, const Unit*> by_id;
  for (const auto& u : units) by_id.emplace(u.id, &u);
  if (assignment.order.size() != units.size() || assignment.placement.size() != units.size()) {
    throw InvalidParameter("assignment must cover every unit exactly once");
  }
  std::vector<Unit> out;
  out.reserve(units.size());
  std::unordered_map<UnitId, bool> seen;
  for (UnitId id : assignment.order) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw InvalidParameter("assignment references unknown unit " + std::to_string(id));
    if (!seen.emplace(id, true).second) throw InvalidParameter("unit " + std::to_string(id) + " appears twice");
    out.push_back(*it->second);
  }
  return out;
}

inline ScheduleResult evaluate(const Assignment& assignment, std::span<const Unit> units, double f, double p,
                               const ChannelState& ch, const MecCaps& mec, const DeviceCaps& caps) {
  auto ordered = ordered_units(assignment, units);
  return evaluate_ordered(ordered, assignment.placement, f, p, ch, mec, caps);
}

inline std::vector<Violation> check_constraints(const ScheduleResult& result, std::span<const Unit> units,
                                                const DeviceCaps& caps) {
  std::unordered_map<UnitId, double> deadline;
  for (const auto& u : units) deadline.emplace(u.id, u.deadline);
  std::vector<Violation> out;
  for (const auto& t : result.units) {
    auto it = deadline.find(t.id);
    if (it == deadline.end()) throw InvalidParameter("schedule references unknown unit " + std::to_string(t.id));
    if (t.lt > it->second) out.push_back({t.where == Placement::Mec ? Constraint::C1 : Constraint::C2, t.id});
  }
  if (result.ts > caps.user_deadline) out.push_back({Constraint::C3, std::nullopt});
  return out;
}

// Allocation-free C1-C3 check at (f, p); caps are not checked here.
inline bool is_feasible(std::span<const Unit> ordered, std::span<const Placement> placement, double f, double p,
                        const ChannelState& ch, const MecCaps& mec, const DeviceCaps& caps) {
  double rate = 0.0;
  bool rate_ready = false;
  PipelineState st;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const Unit& u = ordered[i];
    double lt;
    if (placement[i] == Placement::Mec) {
      if (!rate_ready) {
        rate = uplink_rate(ch, snr(p, ch));
        rate_ready = true;
        if (!(rate > 0.0)) return false;
      }
      lt = st.push_mec(u.d / rate, u.w / mec.f_mec, 0.0).lt;
    } else {
      if (!(f > 0.0)) return false;
      lt = st.push_local(u.w / f, 0.0).lt;
    }
    if (lt > u.deadline) return false;
  }
  return st.ts() <= caps.user_deadline;
}

}  // namespace mecoff
