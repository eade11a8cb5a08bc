#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "mecoff/scenario.hpp"

using namespace mecoff;

namespace {

std::string field_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST(Config, EmptyTextGivesDefaults) {
  auto c = parse_config(std::string("# nothing\n\n"));
  EXPECT_EQ(to_config_text(c), to_config_text(ScenarioConfig{}));
  EXPECT_EQ(c.n_users, 4u);
  EXPECT_DOUBLE_EQ(c.alpha, 0.9);
}

TEST(Config, ParsesValuesListsAndEnums) {
  auto c = parse_config(std::string(
      "n_users = 2   # trailing comment\n"
      "deadlines_s = 0.02, 0.04,0.08\n"
      "workload_reading = per_task\n"
      "filter_scheme = single\n"
      "kappa = 1e-26\n"
      "seed = 18446744073709551615\n"));
  EXPECT_EQ(c.n_users, 2u);
  EXPECT_EQ(c.deadlines_s, (std::vector<double>{0.02, 0.04, 0.08}));
  EXPECT_EQ(c.workload_reading, WorkloadReading::PerTask);
  EXPECT_EQ(c.filter_scheme, FilterScheme::Single);
  EXPECT_DOUBLE_EQ(c.kappa, 1e-26);
  EXPECT_EQ(c.seed, 18446744073709551615ull);
}

TEST(Config, UnknownKeyRejected) { EXPECT_EQ(field_of("n_user = 3\n"), "n_user"); }

TEST(Config, MalformedInputRejected) {
  EXPECT_EQ(field_of("n_users 3\n"), "line 1");
  EXPECT_EQ(field_of("kappa = abc\n"), "kappa");
  EXPECT_EQ(field_of("n_users = -1\n"), "n_users");
  EXPECT_EQ(field_of("n_users = 2.5\n"), "n_users");
  EXPECT_EQ(field_of("deadlines_s = 0.1,,x\n"), "deadlines_s");
  EXPECT_EQ(field_of("filter_scheme = triple\n"), "filter_scheme");
  EXPECT_EQ(field_of("workload_reading = per_byte\n"), "workload_reading");
}

TEST(Config, RangeChecks) {
  EXPECT_EQ(field_of("beta = 0.95\n"), "beta");
  EXPECT_EQ(field_of("alpha = 1\n"), "alpha");
  EXPECT_EQ(field_of("n_users = 0\n"), "n_users");
  EXPECT_EQ(field_of("tasks_per_user_max = 0\n"), "tasks_per_user_max");
  EXPECT_EQ(field_of("deadlines_s = 0.1, -0.1\n"), "deadlines_s");
  EXPECT_EQ(field_of("dup_unit_prob = 0.6\nshared_source_prob = 0.6\n"), "shared_source_prob");
  EXPECT_EQ(field_of("frame_rho_max = 1.2\n"), "frame_rho_max");
  EXPECT_EQ(field_of("frame_length = 1\n"), "frame_length");
  EXPECT_EQ(field_of("kappa = 0\n"), "kappa");
}

TEST(Config, TextRoundTrip) {
  ScenarioConfig c;
  c.n_users = 7;
  c.kappa = 3.3e-27;
  c.deadlines_s = {0.015, 0.125};
  c.filter_scheme = FilterScheme::Single;
  c.seed = 99;
  auto back = parse_config(to_config_text(c));
  EXPECT_EQ(to_config_text(back), to_config_text(c));
  EXPECT_EQ(back.kappa, c.kappa);
}

TEST(Config, ShippedConfigsLoad) {
  const std::filesystem::path dir = std::filesystem::path(MECOFF_SOURCE_DIR) / "configs";
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(load_config(e.path().string())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 2);
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/x.cfg"), std::runtime_error); }

TEST(Channel, RayleighSecondMoment) {
  const int n = 100000;
  double s2 = 0.0;
  int above = 0;
  for (int i = 0; i < n; ++i) {
    auto ch = sample_channel(mix_seed(5, {static_cast<std::uint64_t>(i)}), 20.0, 20e6, 1.0);
    const double g = ch.h * ch.h;
    s2 += g;
    above += g > 1.0;
  }
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
  EXPECT_NEAR(static_cast<double>(above) / n, std::exp(-1.0), 0.02 * std::exp(-1.0));
}

TEST(Channel, MeanSnrAtFullPowerMatchesTarget) {
  for (double target : {10.0, 30.0, 50.0}) {
    const int n = 100000;
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
      auto ch = sample_channel(mix_seed(6, {static_cast<std::uint64_t>(i)}), target, 20e6, 1.0);
      mean += snr(1.0, ch);
    }
    mean /= n;
    EXPECT_NEAR(mean / std::pow(10.0, target / 10.0), 1.0, 0.02);
  }
}

TEST(Channel, FadingIsSharedAcrossSnrPoints) {
  auto a = sample_channel(77, 10.0, 20e6, 1.0);
  auto b = sample_channel(77, 40.0, 20e6, 1.0);
  EXPECT_EQ(a.h, b.h);
  EXPECT_NEAR(a.n0 / b.n0, 1000.0, 1e-9);
}

TEST(Generate, Deterministic) {
  ScenarioConfig c;
  std::ostringstream a, b;
  dump(generate(c, 20.0), a);
  dump(generate(c, 20.0), b);
  EXPECT_EQ(a.str(), b.str());
  c.seed = 43;
  std::ostringstream d;
  dump(generate(c, 20.0), d);
  EXPECT_NE(a.str(), d.str());
}

TEST(Generate, WithSnrMatchesFreshGeneration) {
  ScenarioConfig c;
  auto base = generate(c, 10.0);
  std::ostringstream a, b;
  dump(with_snr(base, 40.0), a);
  dump(generate(c, 40.0), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Generate, StructuralInvariants) {
  ScenarioConfig c;
  c.dup_unit_prob = 0.25;
  c.shared_source_prob = 0.25;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    c.seed = seed;
    auto sc = generate(c, 30.0);
    ASSERT_EQ(sc.users.size(), c.n_users);
    for (const auto& us : sc.users) {
      ASSERT_GE(us.tasks.size(), c.tasks_per_user_min);
      ASSERT_LE(us.tasks.size(), c.tasks_per_user_max);
      UnitId expect_id = 0;
      std::map<std::uint32_t, double> d_of_source;
      std::map<std::pair<std::uint32_t, std::uint32_t>, const Unit*> by_class;
      for (const auto& t : us.tasks) {
        ASSERT_GE(t.units.size(), c.units_per_task_min);
        ASSERT_LE(t.units.size(), c.units_per_task_max);
        ASSERT_TRUE(std::count(c.deadlines_s.begin(), c.deadlines_s.end(), t.deadline));
        double size = 0.0;
        bool injected = false;
        for (UnitId id : t.units) {
          ASSERT_EQ(id, expect_id++);
          const Unit& u = us.units.at(id);
          ASSERT_EQ(u.task_id, t.id);
          ASSERT_EQ(u.user, us.user);
          ASSERT_EQ(u.deadline, t.deadline);
          ASSERT_GT(u.d, 0.0);
          ASSERT_GT(u.w, 0.0);
          ASSERT_GE(u.w / u.d, c.cycle_density_min * (1 - 1e-12));
          ASSERT_LE(u.w / u.d, c.cycle_density_max * (1 + 1e-12));
          size += u.d;
          auto [it, fresh] = d_of_source.emplace(u.source_id, u.d);
          if (!fresh) {
            injected = true;
            ASSERT_EQ(it->second, u.d);  // one source, one input size
          }
          auto [cit, cfresh] = by_class.emplace(std::make_pair(u.type_id, u.source_id), &u);
          if (!cfresh) {
            ASSERT_EQ(cit->second->d, u.d);
            ASSERT_EQ(cit->second->w, u.w);
          }
        }
        ASSERT_DOUBLE_EQ(t.size_bits, size);
        if (!injected) {
          ASSERT_GE(size, c.task_size_min_bits);
          ASSERT_LE(size, c.task_size_max_bits);
        }
      }
      ASSERT_EQ(us.units.size(), expect_id);
      ASSERT_EQ(us.frames.size(), d_of_source.size());
    }
  }
}

TEST(Generate, FramesCarryThePlantedCorrelation) {
  ScenarioConfig c;
  c.frames_per_task = 6;
  auto sc = generate(c, 20.0);
  int checked = 0;
  for (const auto& us : sc.users) {
    for (const auto& [src, frames] : us.frames) {
      ASSERT_EQ(frames.size(), c.frames_per_task);
      const auto& rho = us.planted.at(src);
      ASSERT_EQ(rho.size(), c.frames_per_task - 1);
      for (std::size_t e = 1; e < frames.size(); ++e) {
        ASSERT_EQ(frames[e].epoch, e);
        ASSERT_EQ(frames[e].task_label, src);
        ASSERT_EQ(frames[e].data.size(), c.frame_length);
        ASSERT_GE(rho[e - 1], c.frame_rho_min);
        ASSERT_LE(rho[e - 1], c.frame_rho_max);
        ASSERT_NEAR(pearson(frames[e - 1].data, frames[e].data), rho[e - 1], 1e-9);
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(Generate, PerTaskReadingSplitsTheTaskBudget) {
  ScenarioConfig c;
  c.workload_reading = WorkloadReading::PerTask;
  c.dup_unit_prob = 0.0;
  c.shared_source_prob = 0.0;
  auto sc = generate(c, 20.0);
  for (const auto& us : sc.users) {
    for (const auto& t : us.tasks) {
      double w = 0.0;
      for (UnitId id : t.units) w += us.units[id].w;
      EXPECT_GE(w, c.cycle_density_min * (1 - 1e-12));
      EXPECT_LE(w, c.cycle_density_max * (1 + 1e-12));
    }
  }
}

TEST(Dump, ColumnLayout) {
  ScenarioConfig c;
  c.n_users = 2;
  auto sc = generate(c, 30.0);
  std::ostringstream out;
  dump(sc, out);
  std::istringstream in(out.str());
  std::string line;
  std::size_t channels = 0, units = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    std::vector<std::string> rest;
    for (std::string tok; ls >> tok;) rest.push_back(tok);
    if (kind == "channel") {
      ++channels;
      EXPECT_EQ(rest.size(), 4u);
    } else {
      ASSERT_EQ(kind, "unit");
      ++units;
      EXPECT_EQ(rest.size(), 8u);
    }
  }
  EXPECT_EQ(channels, 2u);
  EXPECT_EQ(units, sc.users[0].units.size() + sc.users[1].units.size());
}
