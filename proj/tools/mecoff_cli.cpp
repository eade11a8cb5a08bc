// mecoff: command line front end for sweeps, config checks and inspection.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mecoff/mecoff.hpp"

namespace {

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = mecoff::detail::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<mecoff::MethodId> parse_methods(const std::string& s) {
  std::vector<mecoff::MethodId> out;
  for (const auto& tok : split_commas(s)) {
    auto m = mecoff::parse_method(tok);
    if (!m) throw CLI::ValidationError("--methods", "unknown method '" + tok + "'");
    out.push_back(*m);
  }
  if (out.empty()) throw CLI::ValidationError("--methods", "at least one method is required");
  return out;
}

std::vector<double> parse_snr(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_commas(s)) out.push_back(mecoff::detail::parse_double("--snr", tok));
  if (out.empty()) throw CLI::ValidationError("--snr", "at least one SNR point is required");
  return out;
}

void print_table(const std::vector<mecoff::SweepRow>& rows) {
  std::printf("%8s %6s %16s %10s %12s\n", "snr_db", "method", "mean_energy_j", "p_fail", "mean_ts_s");
  for (const auto& r : rows) {
    std::printf("%8.1f %6s %16.6g %10.4f %12.6g\n", r.snr_db, mecoff::to_string(r.method).c_str(), r.mean_energy_j,
                r.failure_probability, r.mean_ts_s);
  }
}

// Small bundled workload: two users, light tasks, all five methods.
mecoff::ScenarioConfig demo_config() {
  mecoff::ScenarioConfig c;
  c.n_users = 2;
  c.tasks_per_user_min = 2;
  c.tasks_per_user_max = 3;
  c.units_per_task_min = 2;
  c.units_per_task_max = 3;
  c.cycle_density_min = 100;
  c.cycle_density_max = 300;
  c.kappa = 1e-26;
  c.dup_unit_prob = 0.2;
  c.shared_source_prob = 0.2;
  c.seed = 7;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-task offloading simulator: correlation filtering, placement search and resource tuning"};
  app.require_subcommand(1);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over SNR points and methods");
  std::string config_path, methods_arg = "M1,M2,M3,M4,M5", snr_arg = "10,20,30,40,50", out_dir = "out",
                           format_arg = "csv";
  std::uint32_t reps = 100;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  sweep->add_option("--config", config_path, "scenario config file (key = value)")->check(CLI::ExistingFile);
  sweep->add_option("--methods", methods_arg, "comma separated subset of M1..M5");
  sweep->add_option("--snr", snr_arg, "comma separated SNR points in dB");
  sweep->add_option("--reps", reps, "replications per SNR point")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "sweep seed");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--format", format_arg, "csv, json or plotdata")
      ->check(CLI::IsMember({"csv", "json", "plotdata"}));
  sweep->add_option("--threads", threads, "worker threads (0 = all cores)");

  // demo
  auto* demo = app.add_subcommand("demo", "Run all methods on a small bundled scenario");
  std::uint32_t demo_reps = 20;
  demo->add_option("--reps", demo_reps, "replications")->check(CLI::PositiveNumber);

  // validate-config
  auto* vcfg = app.add_subcommand("validate-config", "Parse a config file and print the resolved values");
  std::string vcfg_path;
  vcfg->add_option("config", vcfg_path, "config file")->required()->check(CLI::ExistingFile);

  // dump-scenario
  auto* dumpc = app.add_subcommand("dump-scenario", "Generate one scenario and dump it in columnar form");
  std::string dump_cfg;
  double dump_snr = 20.0;
  dumpc->add_option("--config", dump_cfg, "scenario config file")->check(CLI::ExistingFile);
  dumpc->add_option("--snr", dump_snr, "SNR point in dB");

  // filter
  auto* filt = app.add_subcommand("filter", "Apply the frame filter to a frame file");
  std::string frames_path, scheme = "multi";
  double alpha = 0.9, beta = 0.5;
  filt->add_option("frames", frames_path, "frame file: label epoch samples...")->required()->check(CLI::ExistingFile);
  filt->add_option("--alpha", alpha, "skip threshold");
  filt->add_option("--beta", beta, "full-processing threshold (multi scheme)");
  filt->add_option("--scheme", scheme, "single or multi")->check(CLI::IsMember({"single", "multi"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) {
      mecoff::SweepSpec spec;
      if (!config_path.empty()) spec.config = mecoff::load_config(config_path);
      spec.methods = parse_methods(methods_arg);
      spec.snr_points_db = parse_snr(snr_arg);
      spec.replications = reps;
      spec.seed = seed;
      spec.threads = threads;
      auto rows = mecoff::run_sweep(spec);
      auto files = mecoff::emit(rows, *mecoff::parse_format(format_arg), out_dir);
      print_table(rows);
      for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
    } else if (*demo) {
      mecoff::SweepSpec spec;
      spec.config = demo_config();
      spec.replications = demo_reps;
      spec.seed = 7;
      print_table(mecoff::run_sweep(spec));
    } else if (*vcfg) {
      auto cfg = mecoff::load_config(vcfg_path);
      std::cout << mecoff::to_config_text(cfg);
      std::cerr << "config OK\n";
    } else if (*dumpc) {
      mecoff::ScenarioConfig cfg;
      if (!dump_cfg.empty()) cfg = mecoff::load_config(dump_cfg);
      mecoff::dump(mecoff::generate(cfg, dump_snr), std::cout);
    } else if (*filt) {
      std::ifstream in(frames_path);
      auto frames = mecoff::read_frames(in);
      std::map<std::uint32_t, std::vector<mecoff::Frame>> streams;
      for (auto& f : frames) streams[f.task_label].push_back(std::move(f));
      std::cout << "label epoch action kept_fraction reference_epoch\n";
      for (const auto& [label, fr] : streams) {
        auto dec = scheme == "multi" ? mecoff::filter_multi(fr, alpha, beta) : mecoff::filter_single(fr, alpha);
        for (const auto& d : dec) {
          std::cout << label << ' ' << d.epoch << ' ' << mecoff::to_string(d.action) << ' ' << d.kept_fraction << ' '
                    << d.reference_epoch << '\n';
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
