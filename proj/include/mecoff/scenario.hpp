#pragma once

// Seeded scenario generation: users, tasks split into units, per-source frame
// streams and block-fading Rayleigh uplinks.
//
// Config files are flat `key = value` text; '#' starts a comment and list
// values are comma separated. Every key of ScenarioConfig is accepted and
// nothing else.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mecoff/correlation.hpp"
#include "mecoff/model.hpp"
#include "mecoff/random.hpp"

namespace mecoff {

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& why)
      : std::invalid_argument(field + ": " + why), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// How cycle_density turns into a workload.
enum class WorkloadReading : std::uint8_t {
  PerBit,   // w = d * density
  PerTask,  // the task needs `density` cycles in total, shared by unit size
};

enum class FilterScheme : std::uint8_t { Single, Multi };

struct ScenarioConfig {
  std::uint32_t n_users = 4;
  std::uint32_t tasks_per_user_min = 1;
  std::uint32_t tasks_per_user_max = 3;
  std::uint32_t units_per_task_min = 2;
  std::uint32_t units_per_task_max = 5;
  double task_size_min_bits = 1e6;
  double task_size_max_bits = 3e6;
  double cycle_density_min = 1500.0;
  double cycle_density_max = 4500.0;
  WorkloadReading workload_reading = WorkloadReading::PerBit;
  double bw_hz = 20e6;
  double f_max_hz = 2e9;
  double f_mec_hz = 20e9;
  double kappa = 1e-11;
  std::vector<double> deadlines_s{0.05, 0.1};
  double user_deadline_s = 0.1;
  std::vector<double> target_snr_db{10, 20, 30, 40, 50};
  double p_max_w = 1.0;
  std::uint32_t frames_per_task = 4;
  std::uint32_t frame_length = 64;
  // Correlation between consecutive frames of a stream ~ U[min, max].
  double frame_rho_min = 0.5;
  double frame_rho_max = 1.0;
  // Per unit slot of every task after a user's first: chance of being an
  // exact copy of an earlier unit (C=1) or reading an earlier unit's source
  // with a new type (C=0.5).
  double dup_unit_prob = 0.15;
  double shared_source_prob = 0.15;
  double alpha = 0.9;
  double beta = 0.5;
  FilterScheme filter_scheme = FilterScheme::Multi;
  std::uint64_t seed = 42;

  bool operator==(const ScenarioConfig&) const = default;
};

struct Task {
  std::uint32_t id = 0;
  double size_bits = 0.0;  // sum of its units' d
  double deadline = 0.0;
  std::vector<UnitId> units;
};

struct UserScenario {
  std::uint32_t user = 0;
  std::vector<Task> tasks;
  std::vector<Unit> units;                               // ids ascend in task order
  std::map<std::uint32_t, std::vector<Frame>> frames;    // source_id -> stream
  std::map<std::uint32_t, std::vector<double>> planted;  // source_id -> rho(e-1, e), e >= 1
  double h = 1.0;
  ChannelState channel;
};

struct Scenario {
  ScenarioConfig config;
  double snr_db = 0.0;
  DeviceCaps caps;
  MecCaps mec;
  std::vector<UserScenario> users;
};

// ---------------------------------------------------------------- config I/O

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string fmt_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key, "not a finite number: '" + v + "'");
  }
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key, "not an unsigned integer: '" + v + "'");
  return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_double(v[i]);
  return s;
}

struct ConfigField {
  const char* key;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

#define MECOFF_NUM_FIELD(name)                                                                  \
  ConfigField {                                                                                 \
    #name, [](ScenarioConfig& c, const std::string& v) { c.name = parse_double(#name, v); },   \
        [](const ScenarioConfig& c) { return fmt_double(c.name); }                              \
  }
#define MECOFF_INT_FIELD(name)                                                                            \
  ConfigField {                                                                                           \
    #name, [](ScenarioConfig& c, const std::string& v) { c.name = parse_int<decltype(c.name)>(#name, v); }, \
        [](const ScenarioConfig& c) { return std::to_string(c.name); }                                    \
  }
#define MECOFF_LIST_FIELD(name)                                                                \
  ConfigField {                                                                                \
    #name, [](ScenarioConfig& c, const std::string& v) { c.name = parse_list(#name, v); },    \
        [](const ScenarioConfig& c) { return fmt_list(c.name); }                               \
  }

inline const std::vector<ConfigField>& config_fields() {
  static const std::vector<ConfigField> fields = {
      MECOFF_INT_FIELD(n_users),
      MECOFF_INT_FIELD(tasks_per_user_min),
      MECOFF_INT_FIELD(tasks_per_user_max),
      MECOFF_INT_FIELD(units_per_task_min),
      MECOFF_INT_FIELD(units_per_task_max),
      MECOFF_NUM_FIELD(task_size_min_bits),
      MECOFF_NUM_FIELD(task_size_max_bits),
      MECOFF_NUM_FIELD(cycle_density_min),
      MECOFF_NUM_FIELD(cycle_density_max),
      ConfigField{"workload_reading",
                  [](ScenarioConfig& c, const std::string& v) {
                    if (v == "per_bit") c.workload_reading = WorkloadReading::PerBit;
                    else if (v == "per_task") c.workload_reading = WorkloadReading::PerTask;
                    else throw ConfigError("workload_reading", "expected per_bit or per_task, got '" + v + "'");
                  },
                  [](const ScenarioConfig& c) {
                    return std::string(c.workload_reading == WorkloadReading::PerBit ? "per_bit" : "per_task");
                  }},
      MECOFF_NUM_FIELD(bw_hz),
      MECOFF_NUM_FIELD(f_max_hz),
      MECOFF_NUM_FIELD(f_mec_hz),
      MECOFF_NUM_FIELD(kappa),
      MECOFF_LIST_FIELD(deadlines_s),
      MECOFF_NUM_FIELD(user_deadline_s),
      MECOFF_LIST_FIELD(target_snr_db),
      MECOFF_NUM_FIELD(p_max_w),
      MECOFF_INT_FIELD(frames_per_task),
      MECOFF_INT_FIELD(frame_length),
      MECOFF_NUM_FIELD(frame_rho_min),
      MECOFF_NUM_FIELD(frame_rho_max),
      MECOFF_NUM_FIELD(dup_unit_prob),
      MECOFF_NUM_FIELD(shared_source_prob),
      MECOFF_NUM_FIELD(alpha),
      MECOFF_NUM_FIELD(beta),
      ConfigField{"filter_scheme",
                  [](ScenarioConfig& c, const std::string& v) {
                    if (v == "multi") c.filter_scheme = FilterScheme::Multi;
                    else if (v == "single") c.filter_scheme = FilterScheme::Single;
                    else throw ConfigError("filter_scheme", "expected single or multi, got '" + v + "'");
                  },
                  [](const ScenarioConfig& c) {
                    return std::string(c.filter_scheme == FilterScheme::Multi ? "multi" : "single");
                  }},
      MECOFF_INT_FIELD(seed),
  };
  return fields;
}

#undef MECOFF_NUM_FIELD
#undef MECOFF_INT_FIELD
#undef MECOFF_LIST_FIELD

}  // namespace detail

inline void validate(const ScenarioConfig& c) {
  auto need = [](bool ok, const char* field, const char* why) {
    if (!ok) throw ConfigError(field, why);
  };
  need(c.n_users >= 1, "n_users", "must be >= 1");
  need(c.tasks_per_user_min >= 1, "tasks_per_user_min", "must be >= 1");
  need(c.tasks_per_user_max >= c.tasks_per_user_min, "tasks_per_user_max", "must be >= tasks_per_user_min");
  need(c.units_per_task_min >= 1, "units_per_task_min", "must be >= 1");
  need(c.units_per_task_max >= c.units_per_task_min, "units_per_task_max", "must be >= units_per_task_min");
  need(c.task_size_min_bits >= c.units_per_task_max, "task_size_min_bits", "must leave at least one bit per unit");
  need(c.task_size_max_bits >= c.task_size_min_bits, "task_size_max_bits", "must be >= task_size_min_bits");
  need(c.cycle_density_min > 0.0, "cycle_density_min", "must be positive");
  need(c.cycle_density_max >= c.cycle_density_min, "cycle_density_max", "must be >= cycle_density_min");
  need(c.bw_hz > 0.0, "bw_hz", "must be positive");
  need(c.f_max_hz > 0.0, "f_max_hz", "must be positive");
  need(c.f_mec_hz > 0.0, "f_mec_hz", "must be positive");
  need(c.kappa > 0.0, "kappa", "must be positive");
  need(!c.deadlines_s.empty(), "deadlines_s", "must list at least one deadline");
  for (double d : c.deadlines_s) need(d > 0.0, "deadlines_s", "deadlines must be positive");
  need(c.user_deadline_s > 0.0, "user_deadline_s", "must be positive");
  need(!c.target_snr_db.empty(), "target_snr_db", "must list at least one SNR point");
  need(c.p_max_w > 0.0, "p_max_w", "must be positive");
  need(c.frames_per_task >= 1, "frames_per_task", "must be >= 1");
  need(c.frame_length >= 2, "frame_length", "must be >= 2");
  need(c.frame_rho_min >= 0.0 && c.frame_rho_min <= c.frame_rho_max, "frame_rho_min", "must lie in [0, frame_rho_max]");
  need(c.frame_rho_max <= 1.0, "frame_rho_max", "must be <= 1");
  need(c.dup_unit_prob >= 0.0 && c.dup_unit_prob <= 1.0, "dup_unit_prob", "must lie in [0, 1]");
  need(c.shared_source_prob >= 0.0 && c.dup_unit_prob + c.shared_source_prob <= 1.0, "shared_source_prob",
       "must be >= 0 with dup_unit_prob + shared_source_prob <= 1");
  need(c.alpha > 0.0 && c.alpha < 1.0, "alpha", "must lie in (0, 1)");
  need(c.beta > 0.0 && c.beta < c.alpha, "beta", "must lie in (0, alpha)");
}

inline ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig c;
  std::map<std::string, const detail::ConfigField*> by_key;
  for (const auto& f : detail::config_fields()) by_key.emplace(f.key, &f);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    std::string value = detail::trim(line.substr(eq + 1));
    auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError(key, "unknown key");
    it->second->set(c, value);
  }
  validate(c);
  return c;
}

inline ScenarioConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  try {
    return parse_config(in);
  } catch (const ConfigError& e) {
    throw ConfigError(e.field(), std::string(e.what()) + " (in " + path + ")");
  }
}

inline std::string to_config_text(const ScenarioConfig& c) {
  std::string out;
  for (const auto& f : detail::config_fields()) out += std::string(f.key) + " = " + f.get(c) + "\n";
  return out;
}

// ---------------------------------------------------------------- generation

// Rayleigh amplitude with E[h^2] = 1; the noise density is scaled so that the
// mean SNR at p_max equals the target.
inline ChannelState sample_channel(std::uint64_t seed, double target_snr_db, double bw, double p_max) {
  Rng rng(seed);
  const double x = rng.normal();
  const double y = rng.normal();
  ChannelState ch;
  ch.h = std::sqrt((x * x + y * y) / 2.0);
  ch.bw = bw;
  ch.n0 = p_max / (bw * std::pow(10.0, target_snr_db / 10.0));
  return ch;
}

namespace detail {

inline void center_normalize(std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double& x : v) {
    x -= m;
    ss += x * x;
  }
  const double n = std::sqrt(ss);
  for (double& x : v) x /= n;
}

// Stream whose consecutive frames have exactly the drawn sample correlation:
// the innovation is made orthogonal to the previous frame before mixing.
inline std::vector<Frame> synth_stream(Rng& rng, std::uint32_t label, const ScenarioConfig& c,
                                       std::vector<double>& planted) {
  std::vector<Frame> frames;
  std::vector<double> prev(c.frame_length);
  for (double& x : prev) x = rng.normal();
  center_normalize(prev);
  frames.push_back({label, 0, prev});
  for (std::uint32_t e = 1; e < c.frames_per_task; ++e) {
    const double rho = rng.uniform(c.frame_rho_min, c.frame_rho_max);
    std::vector<double> z(c.frame_length);
    for (double& x : z) x = rng.normal();
    center_normalize(z);
    double dot = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) dot += z[i] * prev[i];
    for (std::size_t i = 0; i < z.size(); ++i) z[i] -= dot * prev[i];
    center_normalize(z);
    std::vector<double> cur(c.frame_length);
    const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = rho * prev[i] + s * z[i];
    center_normalize(cur);
    planted.push_back(rho);
    frames.push_back({label, e, cur});
    prev = std::move(cur);
  }
  return frames;
}

inline UserScenario generate_user(const ScenarioConfig& c, std::uint32_t user) {
  Rng rng(mix_seed(c.seed, {1, user}));
  UserScenario us;
  us.user = user;
  std::uint32_t next_type = 0, next_source = 0;
  UnitId next_id = 0;

  auto density = [&] { return rng.uniform(c.cycle_density_min, c.cycle_density_max); };
  auto workload = [&](double d, double task_size, double dens) {
    return c.workload_reading == WorkloadReading::PerBit ? d * dens : dens * d / task_size;
  };

  const auto n_tasks = static_cast<std::uint32_t>(rng.uniform_int(c.tasks_per_user_min, c.tasks_per_user_max));
  for (std::uint32_t t = 0; t < n_tasks; ++t) {
    Task task;
    task.id = t;
    task.deadline = c.deadlines_s[rng.uniform_int(0, c.deadlines_s.size() - 1)];
    const double size = std::round(rng.uniform(c.task_size_min_bits, c.task_size_max_bits));
    const auto k = static_cast<std::uint32_t>(rng.uniform_int(c.units_per_task_min, c.units_per_task_max));

    // Integer split of `size` into k positive parts.
    std::vector<double> weight(k);
    double wsum = 0.0;
    for (double& g : weight) wsum += (g = rng.uniform(0.5, 1.5));
    std::vector<double> parts(k);
    double assigned = 0.0;
    for (std::uint32_t j = 0; j + 1 < k; ++j) {
      parts[j] = std::max(1.0, std::floor(size * weight[j] / wsum));
      assigned += parts[j];
    }
    parts[k - 1] = size - assigned;
    const double task_density = density();

    const std::size_t earlier = us.units.size();
    for (std::uint32_t j = 0; j < k; ++j) {
      Unit u;
      u.id = next_id++;
      u.user = user;
      u.task_id = t;
      u.deadline = task.deadline;
      const double roll = rng.uniform01();
      if (earlier > 0 && roll < c.dup_unit_prob) {
        const Unit& src = us.units[rng.uniform_int(0, earlier - 1)];
        u.type_id = src.type_id;
        u.source_id = src.source_id;
        u.d = src.d;
        u.w = src.w;
      } else if (earlier > 0 && roll < c.dup_unit_prob + c.shared_source_prob) {
        const Unit& src = us.units[rng.uniform_int(0, earlier - 1)];
        u.type_id = next_type++;
        u.source_id = src.source_id;
        u.d = src.d;
        u.w = workload(src.d, size, density());
      } else {
        u.type_id = next_type++;
        u.source_id = next_source++;
        u.d = parts[j];
        u.w = workload(parts[j], size, c.workload_reading == WorkloadReading::PerBit ? density() : task_density);
      }
      task.units.push_back(u.id);
      task.size_bits += u.d;
      us.units.push_back(u);
    }
    us.tasks.push_back(std::move(task));
  }

  for (std::uint32_t s = 0; s < next_source; ++s) {
    auto& planted = us.planted[s];
    us.frames.emplace(s, synth_stream(rng, s, c, planted));
  }
  us.h = sample_channel(mix_seed(c.seed, {2, user}), 0.0, c.bw_hz, c.p_max_w).h;
  return us;
}

}  // namespace detail

inline DeviceCaps device_caps(const ScenarioConfig& c) {
  return DeviceCaps{c.f_max_hz, c.p_max_w, c.kappa, c.user_deadline_s};
}

// Channels at `snr_db`. Workload, frames and fading draws depend only on
// config.seed, so scenarios at different SNR points share them.
inline Scenario generate(const ScenarioConfig& config, double snr_db) {
  validate(config);
  Scenario sc;
  sc.config = config;
  sc.snr_db = snr_db;
  sc.caps = device_caps(config);
  sc.mec = MecCaps{config.f_mec_hz};
  for (std::uint32_t u = 0; u < config.n_users; ++u) {
    UserScenario us = detail::generate_user(config, u);
    us.channel = sample_channel(mix_seed(config.seed, {2, u}), snr_db, config.bw_hz, config.p_max_w);
    sc.users.push_back(std::move(us));
  }
  return sc;
}

inline Scenario generate(const ScenarioConfig& config) { return generate(config, config.target_snr_db.front()); }

// Same scenario with every channel re-sampled at `snr_db` (same fading draws).
inline Scenario with_snr(Scenario sc, double snr_db) {
  sc.snr_db = snr_db;
  for (auto& us : sc.users) {
    us.channel = sample_channel(mix_seed(sc.config.seed, {2, us.user}), snr_db, sc.config.bw_hz, sc.config.p_max_w);
  }
  return sc;
}

// Columnar dump, whitespace separated:
//   # scenario seed=<seed> snr_db=<snr>
//   channel <user> <h> <bw_hz> <n0_w_per_hz>
//   unit <user> <task> <unit> <type> <source> <d_bits> <w_cycles> <deadline_s>
inline void dump(const Scenario& sc, std::ostream& out) {
  using detail::fmt_double;
  out << "# scenario seed=" << sc.config.seed << " snr_db=" << fmt_double(sc.snr_db) << "\n";
  out << "# channel user h bw_hz n0_w_per_hz\n";
  out << "# unit user task unit type source d_bits w_cycles deadline_s\n";
  for (const auto& us : sc.users) {
    out << "channel " << us.user << ' ' << fmt_double(us.channel.h) << ' ' << fmt_double(us.channel.bw) << ' '
        << fmt_double(us.channel.n0) << '\n';
    for (const auto& u : us.units) {
      out << "unit " << u.user << ' ' << u.task_id << ' ' << u.id << ' ' << u.type_id << ' ' << u.source_id << ' '
          << fmt_double(u.d) << ' ' << fmt_double(u.w) << ' ' << fmt_double(u.deadline) << '\n';
    }
  }
}

}  // namespace mecoff
