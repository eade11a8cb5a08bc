#pragma once

// Workload reduction ahead of allocation.
//
// Time domain: successive frames of one information stream are compared with
// the Pearson coefficient against the last processed frame; highly similar
// frames are skipped (result reused), moderately similar ones are processed
// only for their differing part.
//
// Task domain: units with identical (type, source) are computed once and the
// result shared; units of different type reading the same source are merged
// into one super-unit that uploads the source once.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecoff/model.hpp"

namespace mecoff {

class DegenerateSignal : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Frame {
  std::uint32_t task_label = 0;  // logical stream the frame belongs to
  std::uint32_t epoch = 0;
  std::vector<double> data;

  bool operator==(const Frame&) const = default;
};

enum class FilterAction : std::uint8_t { ProcessFull, ProcessDiff, Skip };

inline const char* to_string(FilterAction a) {
  switch (a) {
    case FilterAction::ProcessFull: return "FULL";
    case FilterAction::ProcessDiff: return "DIFF";
    case FilterAction::Skip: return "SKIP";
  }
  return "?";
}

struct FilterDecision {
  std::uint32_t epoch = 0;
  FilterAction action = FilterAction::ProcessFull;
  double kept_fraction = 1.0;  // share of d and w still to process
  std::uint32_t reference_epoch = 0;

  bool operator==(const FilterDecision&) const = default;
};

struct UnitCorrelation {
  UnitId o = 0;
  UnitId p = 0;
  double c = 0.0;  // 0, 0.5 or 1
};

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidParameter("pearson: sequences differ in length");
  if (x.size() < 2) throw InvalidParameter("pearson: need at least two samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateSignal("pearson: zero-variance signal");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace detail {

inline void check_epochs(std::span<const Frame> frames) {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].epoch <= frames[i - 1].epoch) throw InvalidParameter("frames must be ordered by distinct epoch");
  }
}

inline std::optional<double> pearson_or_degenerate(const Frame& a, const Frame& b) {
  try {
    return pearson(a.data, b.data);
  } catch (const DegenerateSignal&) {
    return std::nullopt;
  }
}

}  // namespace detail

// `correlate(reference, frame)` returns the coefficient, or nullopt when the
// signal is degenerate (such frames are processed in full).
template <class Correlate>
std::vector<FilterDecision> filter_multi_with(std::span<const Frame> frames, double alpha, double beta,
                                              Correlate&& correlate) {
  if (!(0.0 < beta && beta < alpha && alpha < 1.0)) {
    throw InvalidParameter("filter_multi: requires 0 < beta < alpha < 1");
  }
  detail::check_epochs(frames);
  std::vector<FilterDecision> out;
  out.reserve(frames.size());
  std::size_t ref = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    FilterDecision dec;
    dec.epoch = frames[i].epoch;
    dec.reference_epoch = frames[ref].epoch;
    if (i == 0) {
      out.push_back(dec);
      continue;
    }
    std::optional<double> r = correlate(frames[ref], frames[i]);
    if (r && *r > alpha) {
      dec.action = FilterAction::Skip;
      dec.kept_fraction = 0.0;
    } else if (r && *r > beta) {
      dec.action = FilterAction::ProcessDiff;
      dec.kept_fraction = 1.0 - *r;
      ref = i;
    } else {
      ref = i;
    }
    out.push_back(dec);
  }
  return out;
}

template <class Correlate>
std::vector<FilterDecision> filter_single_with(std::span<const Frame> frames, double alpha, Correlate&& correlate) {
  if (!(0.0 < alpha && alpha < 1.0)) throw InvalidParameter("filter_single: requires 0 < alpha < 1");
  detail::check_epochs(frames);
  std::vector<FilterDecision> out;
  out.reserve(frames.size());
  std::size_t ref = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    FilterDecision dec;
    dec.epoch = frames[i].epoch;
    dec.reference_epoch = frames[ref].epoch;
    if (i > 0) {
      std::optional<double> r = correlate(frames[ref], frames[i]);
      if (r && *r > alpha) {
        dec.action = FilterAction::Skip;
        dec.kept_fraction = 0.0;
      } else {
        ref = i;
      }
    }
    out.push_back(dec);
  }
  return out;
}

inline std::vector<FilterDecision> filter_single(std::span<const Frame> frames, double alpha) {
  return filter_single_with(frames, alpha, detail::pearson_or_degenerate);
}

inline std::vector<FilterDecision> filter_multi(std::span<const Frame> frames, double alpha, double beta) {
  return filter_multi_with(frames, alpha, beta, detail::pearson_or_degenerate);
}

inline UnitCorrelation unit_correlation(const Unit& o, const Unit& p) {
  if (o.id == p.id) throw InvalidParameter("unit_correlation: a unit is not compared with itself");
  UnitCorrelation out{o.id, p.id, 0.0};
  if (o.source_id == p.source_id) out.c = (o.type_id == p.type_id) ? 1.0 : 0.5;
  return out;
}

struct DedupResult {
  std::vector<Unit> units;
  std::map<UnitId, UnitId> shared;  // removed unit -> surviving representative
};

// One survivor per (type, source) class: the lowest id, carrying the
// tightest deadline of the class. Copies are the same computation, so d and
// w are taken as the class maximum (equal for exact copies).
inline DedupResult dedup(std::span<const Unit> units) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> rep_of;  // (type, source) -> index in out
  DedupResult res;
  std::vector<std::size_t> idx(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return units[a].id < units[b].id; });

  std::map<UnitId, std::size_t> slot;  // representative id -> position in res.units
  for (std::size_t i : idx) {
    const Unit& u = units[i];
    auto key = std::make_pair(u.type_id, u.source_id);
    auto it = rep_of.find(key);
    if (it == rep_of.end()) {
      rep_of.emplace(key, i);
      continue;
    }
    const Unit& rep = units[it->second];
    res.shared.emplace(u.id, rep.id);
  }
  // Emit survivors in input order.
  for (const auto& u : units) {
    if (res.shared.count(u.id)) continue;
    slot.emplace(u.id, res.units.size());
    res.units.push_back(u);
  }
  for (const auto& u : units) {
    auto it = res.shared.find(u.id);
    if (it == res.shared.end()) continue;
    Unit& rep = res.units[slot.at(it->second)];
    rep.deadline = std::min(rep.deadline, u.deadline);
    rep.d = std::max(rep.d, u.d);
    rep.w = std::max(rep.w, u.w);
  }
  return res;
}

struct MergeResult {
  std::vector<Unit> units;
  std::map<UnitId, std::vector<UnitId>> members;  // super-unit id -> merged member ids (size >= 2)
};

// Same-source units become one super-unit: the source is uploaded once
// (d = max member d), every member still computes (w = sum), and the
// super-unit must meet the tightest member deadline. The super-unit takes the
// lowest member id and type.
inline MergeResult merge_shared_source(std::span<const Unit> units) {
  std::map<std::uint32_t, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < units.size(); ++i) by_source[units[i].source_id].push_back(i);

  MergeResult res;
  std::map<std::uint32_t, bool> emitted;
  for (const auto& u : units) {
    const auto& group = by_source.at(u.source_id);
    if (group.size() == 1) {
      res.units.push_back(u);
      continue;
    }
    if (emitted[u.source_id]) continue;
    emitted[u.source_id] = true;

    std::vector<std::size_t> g = group;
    std::sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) { return units[a].id < units[b].id; });
    Unit super = units[g.front()];
    super.d = 0.0;
    super.w = 0.0;
    std::vector<UnitId> ids;
    for (std::size_t i : g) {
      super.d = std::max(super.d, units[i].d);
      super.w += units[i].w;
      super.deadline = std::min(super.deadline, units[i].deadline);
      ids.push_back(units[i].id);
    }
    res.members.emplace(super.id, std::move(ids));
    res.units.push_back(super);
  }
  return res;
}

// dedup followed by merge; `covers` maps every surviving unit to all
// original unit ids whose results it delivers.
struct Reduction {
  std::vector<Unit> units;
  std::map<UnitId, std::vector<UnitId>> covers;
};

inline Reduction reduce_correlated(std::span<const Unit> units) {
  DedupResult dd = dedup(units);
  MergeResult mg = merge_shared_source(dd.units);

  std::map<UnitId, std::vector<UnitId>> after_dedup;
  for (const auto& u : dd.units) after_dedup[u.id].push_back(u.id);
  for (const auto& [removed, rep] : dd.shared) after_dedup[rep].push_back(removed);

  Reduction out;
  out.units = std::move(mg.units);
  for (const auto& u : out.units) {
    auto& cov = out.covers[u.id];
    auto it = mg.members.find(u.id);
    if (it == mg.members.end()) {
      cov = after_dedup.at(u.id);
    } else {
      for (UnitId m : it->second) {
        const auto& c = after_dedup.at(m);
        cov.insert(cov.end(), c.begin(), c.end());
      }
    }
    std::sort(cov.begin(), cov.end());
  }
  return out;
}

// Frame files: one frame per line, whitespace separated:
//   <task_label> <epoch> <sample> <sample> ...
// Blank lines and lines starting with '#' are ignored.
inline std::vector<Frame> read_frames(std::istream& in) {
  std::vector<Frame> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Frame f;
    std::string tok;
    auto fail = [&](const std::string& why) {
      throw InvalidParameter("frames line " + std::to_string(lineno) + ": " + why);
    };
    if (!(ss >> f.task_label >> f.epoch)) fail("expected task_label and epoch");
    while (ss >> tok) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size()) fail("bad sample '" + tok + "'");
      f.data.push_back(v);
    }
    if (f.data.size() < 2) fail("a frame needs at least two samples");
    out.push_back(std::move(f));
  }
  return out;
}

inline void write_frames(std::ostream& out, std::span<const Frame> frames) {
  char buf[64];
  for (const auto& f : frames) {
    out << f.task_label << ' ' << f.epoch;
    for (double v : f.data) {
      auto res = std::to_chars(buf, buf + sizeof buf, v);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

}  // namespace mecoff
