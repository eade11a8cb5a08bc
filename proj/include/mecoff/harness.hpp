#pragma once

// Monte Carlo sweeps over SNR points and methods, and table emission.
//
// Replication r draws its scenario from mix_seed(seed, {3, r}); every SNR
// point and every method of that replication sees the same tasks, frames and
// fading, so cells differ only by what they vary. Replications may run on
// several threads; the reduction is always in replication order.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mecoff/methods.hpp"
#include "mecoff/scenario.hpp"

namespace mecoff {

enum class OutputFormat : std::uint8_t { Csv, Json, PlotData };

inline std::optional<OutputFormat> parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  if (s == "plotdata") return OutputFormat::PlotData;
  return std::nullopt;
}

struct SweepSpec {
  ScenarioConfig config;
  std::vector<MethodId> methods{kAllMethods.begin(), kAllMethods.end()};
  std::vector<double> snr_points_db{10, 20, 30, 40, 50};
  std::uint32_t replications = 100;
  std::uint64_t seed = 42;
  unsigned threads = 1;  // 0 = hardware concurrency
};

struct SweepRow {
  double snr_db = 0.0;
  MethodId method = MethodId::M1;
  double mean_energy_j = 0.0;
  double failure_probability = 0.0;
  double mean_ts_s = 0.0;
  std::uint32_t replications = 0;

  bool operator==(const SweepRow&) const = default;
};

inline void validate(const SweepSpec& spec) {
  if (spec.methods.empty()) throw InvalidParameter("sweep: method list is empty");
  if (spec.snr_points_db.empty()) throw InvalidParameter("sweep: SNR list is empty");
  if (spec.replications < 1) throw InvalidParameter("sweep: replications must be >= 1");
  validate(spec.config);
}

namespace detail {

struct CellAccum {
  double energy = 0.0;  // summed over users
  std::uint64_t failed = 0;
  std::uint64_t total = 0;
  double ts_sum = 0.0;
  std::uint64_t ts_count = 0;
};

// One replication: cells indexed [snr][method].
inline std::vector<CellAccum> run_replication(const SweepSpec& spec, std::uint32_t rep) {
  ScenarioConfig cfg = spec.config;
  cfg.seed = mix_seed(spec.seed, {3, rep});
  const Scenario base = generate(cfg, spec.snr_points_db.front());
  const std::size_t nm = spec.methods.size();
  std::vector<CellAccum> cells(spec.snr_points_db.size() * nm);
  for (std::size_t si = 0; si < spec.snr_points_db.size(); ++si) {
    const Scenario sc = with_snr(base, spec.snr_points_db[si]);
    for (std::size_t mi = 0; mi < nm; ++mi) {
      CellAccum& cell = cells[si * nm + mi];
      for (std::uint32_t u = 0; u < sc.users.size(); ++u) {
        MethodResult r = run_method(spec.methods[mi], sc, u);
        cell.energy += r.energy;
        cell.failed += r.failed_tasks;
        cell.total += r.total_tasks;
        if (r.ts > 0.0) {
          cell.ts_sum += r.ts;
          ++cell.ts_count;
        }
      }
    }
  }
  return cells;
}

}  // namespace detail

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  validate(spec);
  std::vector<std::vector<detail::CellAccum>> per_rep(spec.replications);
  unsigned workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, spec.replications);

  if (workers <= 1) {
    for (std::uint32_t r = 0; r < spec.replications; ++r) per_rep[r] = detail::run_replication(spec, r);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::uint32_t r = w; r < spec.replications; r += workers) per_rep[r] = detail::run_replication(spec, r);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  const std::size_t nm = spec.methods.size();
  std::vector<SweepRow> rows;
  for (std::size_t si = 0; si < spec.snr_points_db.size(); ++si) {
    for (std::size_t mi = 0; mi < nm; ++mi) {
      detail::CellAccum sum;
      for (const auto& cells : per_rep) {
        const auto& c = cells[si * nm + mi];
        sum.energy += c.energy;
        sum.failed += c.failed;
        sum.total += c.total;
        sum.ts_sum += c.ts_sum;
        sum.ts_count += c.ts_count;
      }
      SweepRow row;
      row.snr_db = spec.snr_points_db[si];
      row.method = spec.methods[mi];
      row.replications = spec.replications;
      row.mean_energy_j = sum.energy / spec.replications;
      row.failure_probability = sum.total ? static_cast<double>(sum.failed) / static_cast<double>(sum.total) : 0.0;
      row.mean_ts_s = sum.ts_count ? sum.ts_sum / static_cast<double>(sum.ts_count) : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

// ---------------------------------------------------------------- emission

inline constexpr const char* kCsvHeader = "snr_db,method,mean_energy_j,failure_probability,mean_ts_s,replications";

inline void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  using detail::fmt_double;
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << fmt_double(r.snr_db) << ',' << to_string(r.method) << ',' << fmt_double(r.mean_energy_j) << ','
        << fmt_double(r.failure_probability) << ',' << fmt_double(r.mean_ts_s) << ',' << r.replications << '\n';
  }
}

inline std::vector<SweepRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kCsvHeader) {
    throw InvalidParameter("csv: missing or unexpected header");
  }
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(detail::trim(item));
    if (f.size() != 6) throw InvalidParameter("csv line " + std::to_string(lineno) + ": expected 6 fields");
    SweepRow r;
    r.snr_db = detail::parse_double("snr_db", f[0]);
    auto m = parse_method(f[1]);
    if (!m) throw InvalidParameter("csv line " + std::to_string(lineno) + ": unknown method '" + f[1] + "'");
    r.method = *m;
    r.mean_energy_j = detail::parse_double("mean_energy_j", f[2]);
    r.failure_probability = detail::parse_double("failure_probability", f[3]);
    r.mean_ts_s = detail::parse_double("mean_ts_s", f[4]);
    r.replications = detail::parse_int<std::uint32_t>("replications", f[5]);
    rows.push_back(r);
  }
  return rows;
}

inline nlohmann::json to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"snr_db", r.snr_db},
                   {"method", to_string(r.method)},
                   {"mean_energy_j", r.mean_energy_j},
                   {"failure_probability", r.failure_probability},
                   {"mean_ts_s", r.mean_ts_s},
                   {"replications", r.replications}});
  }
  return arr;
}

// Writes the table under `dir` and returns the files written.
//   csv      -> sweep.csv
//   json     -> sweep.json
//   plotdata -> plot_<method>.dat, columns: snr_db mean_energy_j failure_probability mean_ts_s
inline std::vector<std::filesystem::path> emit(const std::vector<SweepRow>& rows, OutputFormat format,
                                               const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (rows.empty()) throw InvalidParameter("emit: empty table");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());

  auto open = [](const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    return out;
  };
  std::vector<fs::path> written;
  switch (format) {
    case OutputFormat::Csv: {
      auto p = dir / "sweep.csv";
      auto out = open(p);
      write_csv(out, rows);
      written.push_back(p);
      break;
    }
    case OutputFormat::Json: {
      auto p = dir / "sweep.json";
      auto out = open(p);
      out << to_json(rows).dump(2) << '\n';
      written.push_back(p);
      break;
    }
    case OutputFormat::PlotData: {
      std::vector<MethodId> seen;
      for (const auto& r : rows)
        if (std::find(seen.begin(), seen.end(), r.method) == seen.end()) seen.push_back(r.method);
      for (MethodId m : seen) {
        auto p = dir / ("plot_" + to_string(m) + ".dat");
        auto out = open(p);
        out << "# snr_db mean_energy_j failure_probability mean_ts_s\n";
        for (const auto& r : rows) {
          if (r.method != m) continue;
          out << detail::fmt_double(r.snr_db) << ' ' << detail::fmt_double(r.mean_energy_j) << ' '
              << detail::fmt_double(r.failure_probability) << ' ' << detail::fmt_double(r.mean_ts_s) << '\n';
        }
        written.push_back(p);
      }
      break;
    }
  }
  for (const auto& p : written) {
    if (!fs::exists(p)) throw std::runtime_error("failed writing '" + p.string() + "'");
  }
  return written;
}

}  // namespace mecoff
