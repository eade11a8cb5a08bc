#pragma once

// Binary decision tree over LOCAL/MEC placements.
//
// Units are taken in deadline order. Each tree level decides one unit
// (MEC branch first, then LOCAL); a branch dies as soon as the unit it just
// placed misses its deadline, and full-depth leaves are kept only if the
// user latency meets the user deadline. Completion times never decrease when
// units are appended, so pruning a branch never discards a feasible leaf.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "mecoff/correlation.hpp"
#include "mecoff/schedule.hpp"

namespace mecoff {

inline constexpr std::size_t kMaxTreeDepth = 24;

struct FeasibleSet {
  std::vector<Unit> order;                          // units in tree-level order
  std::vector<std::vector<Placement>> placements;   // DFS order, aligned with `order`
  std::vector<double> energy;                       // e_total of each member at the enumeration (f, p)
  std::size_t nodes_visited = 0;

  bool empty() const { return placements.empty(); }
  std::size_t size() const { return placements.size(); }

  Assignment assignment(std::size_t i) const {
    Assignment a;
    a.order.reserve(order.size());
    for (const auto& u : order) a.order.push_back(u.id);
    a.placement = placements[i];
    return a;
  }
};

inline std::vector<Unit> order_units(std::span<const Unit> units) {
  std::vector<Unit> out(units.begin(), units.end());
  std::stable_sort(out.begin(), out.end(), [](const Unit& a, const Unit& b) {
    if (a.deadline != b.deadline) return a.deadline < b.deadline;
    return a.id < b.id;
  });
  return out;
}

namespace detail {

struct UnitCosts {
  double t_tx, t_mec, e_tx, t_local, e_local;
};

inline std::vector<UnitCosts> unit_costs(std::span<const Unit> ordered, double f, double p,
                                         const ChannelState& ch, const MecCaps& mec, const DeviceCaps& caps) {
  const double rate = uplink_rate(ch, snr(p, ch));
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<UnitCosts> c;
  c.reserve(ordered.size());
  for (const auto& u : ordered) {
    UnitCosts k{};
    k.t_tx = rate > 0.0 ? u.d / rate : inf;
    k.e_tx = rate > 0.0 ? tx_energy(p, k.t_tx) : inf;
    k.t_mec = mec_latency(u.w, mec);
    k.t_local = f > 0.0 ? u.w / f : inf;
    k.e_local = f > 0.0 ? local_energy(caps, u.w, f) : inf;
    c.push_back(k);
  }
  return c;
}

// Depth-first walk; `on_leaf(bits, state)` returns false to stop the walk.
template <class OnLeaf>
std::size_t walk_tree(std::span<const Unit> ordered, std::span<const UnitCosts> costs, const DeviceCaps& caps,
                      OnLeaf&& on_leaf) {
  const std::size_t k = ordered.size();
  std::vector<Placement> bits(k, Placement::Local);
  std::size_t visited = 1;  // root
  bool stop = false;

  auto rec = [&](auto&& self, std::size_t depth, const PipelineState& st) -> void {
    if (stop) return;
    if (depth == k) {
      if (st.ts() <= caps.user_deadline && !on_leaf(std::span<const Placement>(bits), st)) stop = true;
      return;
    }
    const Unit& u = ordered[depth];
    const UnitCosts& c = costs[depth];
    for (Placement b : {Placement::Mec, Placement::Local}) {
      if (stop) return;
      ++visited;
      PipelineState next = st;
      double lt = (b == Placement::Mec) ? next.push_mec(c.t_tx, c.t_mec, c.e_tx).lt
                                        : next.push_local(c.t_local, c.e_local).lt;
      if (!(lt <= u.deadline)) continue;
      bits[depth] = b;
      self(self, depth + 1, next);
    }
  };
  rec(rec, 0, PipelineState{});
  return visited;
}

inline void check_tree_inputs(std::span<const Unit> ordered, double f, double p, const DeviceCaps& caps) {
  if (ordered.size() > kMaxTreeDepth) {
    throw InvalidParameter("enumerate_feasible: " + std::to_string(ordered.size()) + " units exceed the tree cap of " +
                           std::to_string(kMaxTreeDepth));
  }
  detail::check_caps(f, p, caps);
}

}  // namespace detail

inline FeasibleSet enumerate_feasible(std::span<const Unit> ordered, double f, double p, const ChannelState& ch,
                                      const MecCaps& mec, const DeviceCaps& caps) {
  detail::check_tree_inputs(ordered, f, p, caps);
  FeasibleSet out;
  out.order.assign(ordered.begin(), ordered.end());
  auto costs = detail::unit_costs(ordered, f, p, ch, mec, caps);
  out.nodes_visited = detail::walk_tree(ordered, costs, caps, [&](std::span<const Placement> bits, const PipelineState& st) {
    out.placements.emplace_back(bits.begin(), bits.end());
    out.energy.push_back(st.energy());
    return true;
  });
  return out;
}

// True iff enumerate_feasible would return a nonempty set.
inline bool any_feasible(std::span<const Unit> ordered, double f, double p, const ChannelState& ch,
                         const MecCaps& mec, const DeviceCaps& caps) {
  detail::check_tree_inputs(ordered, f, p, caps);
  auto costs = detail::unit_costs(ordered, f, p, ch, mec, caps);
  bool found = false;
  detail::walk_tree(ordered, costs, caps, [&](std::span<const Placement>, const PipelineState&) {
    found = true;
    return false;
  });
  return found;
}

struct CorrelatedAllocation {
  Reduction reduction;
  FeasibleSet feasible;
};

inline CorrelatedAllocation allocate_with_correlation(std::span<const Unit> units, double f, double p,
                                                      const ChannelState& ch, const MecCaps& mec,
                                                      const DeviceCaps& caps) {
  CorrelatedAllocation out;
  out.reduction = reduce_correlated(units);
  auto ordered = order_units(out.reduction.units);
  out.feasible = enumerate_feasible(ordered, f, p, ch, mec, caps);
  return out;
}

}  // namespace mecoff
