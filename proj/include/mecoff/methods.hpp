#pragma once

// The five offloading methods, from the plain baseline to full
// correlation-aware offloading:
//
//   M1  whole tasks, least-energy feasible placement at (f_max, p_max)
//   M2  M1 + clock and transmit power tuning
//   M3  M2 on split units
//   M4  M3 + time-domain frame filtering
//   M5  M4 + duplicate removal and shared-source merging
//
// Each user is solved epoch by epoch (one frame per information stream per
// epoch). When the whole task set of an epoch cannot be scheduled, the
// largest schedulable subset of tasks is kept; the others are failures and
// cost zero. M5 may decline a reduction that would make things worse.

#include <algorithm>
#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mecoff/allocate.hpp"
#include "mecoff/correlation.hpp"
#include "mecoff/scenario.hpp"
#include "mecoff/tune.hpp"

namespace mecoff {

enum class MethodId : std::uint8_t { M1 = 1, M2, M3, M4, M5 };

inline constexpr std::array<MethodId, 5> kAllMethods{MethodId::M1, MethodId::M2, MethodId::M3, MethodId::M4,
                                                     MethodId::M5};

inline std::string to_string(MethodId m) { return "M" + std::to_string(static_cast<int>(m)); }

inline std::optional<MethodId> parse_method(const std::string& s) {
  for (MethodId m : kAllMethods)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

struct MethodOptions {
  double alpha = 0.9;
  double beta = 0.5;
  FilterScheme scheme = FilterScheme::Multi;
  TuneOptions tune;
};

inline MethodOptions method_options(const ScenarioConfig& c) {
  MethodOptions o;
  o.alpha = c.alpha;
  o.beta = c.beta;
  o.scheme = c.filter_scheme;
  return o;
}

struct EpochOutcome {
  std::uint32_t epoch = 0;
  std::uint32_t total_tasks = 0;
  std::vector<std::uint32_t> failed_tasks;  // task ids
  double energy = 0.0;
  double ts = 0.0;
  std::optional<TunedSolution> solution;  // nullopt when nothing was scheduled
};

struct MethodResult {
  MethodId method = MethodId::M1;
  std::uint32_t user = 0;
  double energy = 0.0;  // summed over epochs, failed tasks contribute 0
  std::uint32_t failed_tasks = 0;
  std::uint32_t total_tasks = 0;
  double ts = 0.0;  // mean user latency over epochs that scheduled something
  std::vector<EpochOutcome> epochs;
};

namespace detail {

// Whole-task work items: summed d and w, tightest member deadline. The item
// id is the task id (tasks are numbered in unit-id order, so item order
// matches unit order).
inline std::vector<Unit> atomic_tasks(const UserScenario& us) {
  std::vector<Unit> out;
  for (const auto& t : us.tasks) {
    Unit a;
    a.id = t.id;
    a.user = us.user;
    a.task_id = t.id;
    a.type_id = t.id;
    a.source_id = t.id;
    a.deadline = std::numeric_limits<double>::infinity();
    for (UnitId id : t.units) {
      const Unit& u = us.units.at(id);
      a.d += u.d;
      a.w += u.w;
      a.deadline = std::min(a.deadline, u.deadline);
    }
    out.push_back(a);
  }
  return out;
}

// Per source, the filter decision at every epoch.
inline std::map<std::uint32_t, std::vector<FilterDecision>> stream_decisions(const UserScenario& us,
                                                                             const MethodOptions& opt) {
  std::map<std::uint32_t, std::vector<FilterDecision>> out;
  for (const auto& [src, frames] : us.frames) {
    out.emplace(src, opt.scheme == FilterScheme::Multi ? filter_multi(frames, opt.alpha, opt.beta)
                                                       : filter_single(frames, opt.alpha));
  }
  return out;
}

inline std::vector<Unit> filtered_units(const UserScenario& us,
                                        const std::map<std::uint32_t, std::vector<FilterDecision>>& decisions,
                                        std::uint32_t epoch) {
  std::vector<Unit> out;
  for (const auto& u : us.units) {
    const auto& dec = decisions.at(u.source_id).at(epoch);
    if (dec.action == FilterAction::Skip) continue;
    Unit v = u;
    v.d *= dec.kept_fraction;
    v.w *= dec.kept_fraction;
    out.push_back(v);
  }
  return out;
}

struct Candidate {
  std::vector<std::uint32_t> kept;  // task ids, ascending
  std::optional<TunedSolution> solution;
};

// Work-item variants for the `kept` tasks, each in processing order. With
// `correlate`, the dedup+merge and dedup-only reductions come first and the
// unreduced set last: the reductions tighten deadlines and force co-placement,
// so they are offered to the optimizer rather than imposed.
inline std::vector<std::vector<Unit>> item_variants(const std::vector<Unit>& items,
                                                    const std::set<std::uint32_t>& kept, bool correlate) {
  std::vector<Unit> sel;
  for (const auto& u : items)
    if (kept.count(u.task_id)) sel.push_back(u);
  std::vector<std::vector<Unit>> out;
  if (correlate) {
    out.push_back(order_units(reduce_correlated(sel).units));
    auto dd = dedup(sel);
    if (!dd.shared.empty()) out.push_back(order_units(dd.units));
  }
  out.push_back(order_units(sel));
  return out;
}

// Solves one epoch. `items` carry task_id; tasks listed in `active` have work.
inline EpochOutcome solve_epoch(const std::vector<Unit>& items, const std::vector<std::uint32_t>& active,
                                std::uint32_t total_tasks, MethodId method, const ChannelState& ch,
                                const MecCaps& mec, const DeviceCaps& caps, const MethodOptions& opt) {
  const bool correlate = method == MethodId::M5;
  const bool tuned = method != MethodId::M1;
  EpochOutcome out;
  out.total_tasks = total_tasks;

  const std::size_t n = active.size();
  std::optional<Candidate> best;
  // Largest schedulable subsets first; within a size, subsets in
  // lexicographic order of kept task ids.
  for (std::size_t size = n; size > 0 && !best; --size) {
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(size), true);
    do {
      std::set<std::uint32_t> kept;
      for (std::size_t i = 0; i < n; ++i)
        if (pick[i]) kept.insert(active[i]);
      for (const auto& ordered : item_variants(items, kept, correlate)) {
        if (!any_feasible(ordered, caps.f_max, caps.p_max, ch, mec, caps)) continue;
        auto set = enumerate_feasible(ordered, caps.f_max, caps.p_max, ch, mec, caps);
        auto sol = tuned ? optimize_feasible_set(set, ch, mec, caps, opt.tune)
                         : best_untuned(set, caps.f_max, caps.p_max, ch, mec, caps);
        if (!sol) continue;
        if (!best || sol->energy < best->solution->energy) {
          best = Candidate{std::vector<std::uint32_t>(kept.begin(), kept.end()), std::move(sol)};
        }
      }
    } while (std::prev_permutation(pick.begin(), pick.end()));
  }

  std::set<std::uint32_t> kept;
  if (best) {
    kept.insert(best->kept.begin(), best->kept.end());
    out.energy = best->solution->energy;
    out.ts = best->solution->schedule.ts;
    out.solution = std::move(best->solution);
  }
  for (std::uint32_t t : active)
    if (!kept.count(t)) out.failed_tasks.push_back(t);
  return out;
}

inline std::vector<std::uint32_t> tasks_with_work(const std::vector<Unit>& items) {
  std::set<std::uint32_t> s;
  for (const auto& u : items) s.insert(u.task_id);
  return {s.begin(), s.end()};
}

}  // namespace detail

inline MethodResult run_method(MethodId method, const UserScenario& us, const DeviceCaps& caps, const MecCaps& mec,
                               std::uint32_t frames_per_task, const MethodOptions& opt = {}) {
  MethodResult res;
  res.method = method;
  res.user = us.user;
  const auto n_tasks = static_cast<std::uint32_t>(us.tasks.size());

  if (method == MethodId::M1 || method == MethodId::M2 || method == MethodId::M3) {
    // No frame filtering: every epoch carries the same work.
    auto items = method == MethodId::M3 ? us.units : detail::atomic_tasks(us);
    EpochOutcome once =
        detail::solve_epoch(items, detail::tasks_with_work(items), n_tasks, method, us.channel, mec, caps, opt);
    for (std::uint32_t e = 0; e < frames_per_task; ++e) {
      res.epochs.push_back(once);
      res.epochs.back().epoch = e;
    }
  } else {
    auto decisions = detail::stream_decisions(us, opt);
    for (std::uint32_t e = 0; e < frames_per_task; ++e) {
      auto items = detail::filtered_units(us, decisions, e);
      EpochOutcome out =
          detail::solve_epoch(items, detail::tasks_with_work(items), n_tasks, method, us.channel, mec, caps, opt);
      out.epoch = e;
      res.epochs.push_back(std::move(out));
    }
  }

  std::uint32_t scheduled = 0;
  for (const auto& ep : res.epochs) {
    res.energy += ep.energy;
    res.failed_tasks += static_cast<std::uint32_t>(ep.failed_tasks.size());
    res.total_tasks += ep.total_tasks;
    if (ep.solution) {
      res.ts += ep.ts;
      ++scheduled;
    }
  }
  if (scheduled) res.ts /= scheduled;
  return res;
}

inline MethodResult run_method(MethodId method, const Scenario& sc, std::uint32_t user) {
  return run_method(method, sc.users.at(user), sc.caps, sc.mec, sc.config.frames_per_task,
                    method_options(sc.config));
}

}  // namespace mecoff
