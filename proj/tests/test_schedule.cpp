#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "mecoff/schedule.hpp"
#include "support/oracle.hpp"

using namespace mecoff;

namespace {

Unit unit(UnitId id, double d, double w, double deadline) {
  Unit u;
  u.id = id;
  u.type_id = id;
  u.source_id = id;
  u.d = d;
  u.w = w;
  u.deadline = deadline;
  return u;
}

}  // namespace

TEST(MecPipeline, Empty) { EXPECT_TRUE(mec_pipeline_times({}, {}).empty()); }

TEST(MecPipeline, HandTrace) {
  std::vector<double> tx{2, 1, 3}, cm{1, 4, 1};
  auto r = mec_pipeline_times(tx, cm);
  ASSERT_EQ(r.size(), 3u);
  const double wt3[] = {2, 3, 6}, wt4[] = {0, 0, 1}, lt[] = {3, 7, 8};
  for (int j = 0; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(r[j].wt3, wt3[j]);
    EXPECT_DOUBLE_EQ(r[j].wt4, wt4[j]);
    EXPECT_DOUBLE_EQ(r[j].lt, lt[j]);
  }
}

TEST(MecPipeline, SingleUnit) {
  std::vector<double> tx{5}, cm{2};
  auto r = mec_pipeline_times(tx, cm);
  EXPECT_DOUBLE_EQ(r[0].wt3, 5);
  EXPECT_DOUBLE_EQ(r[0].wt4, 0);
  EXPECT_DOUBLE_EQ(r[0].lt, 7);
}

TEST(MecPipeline, LengthMismatch) {
  std::vector<double> tx{1, 2}, cm{1};
  EXPECT_THROW(mec_pipeline_times(tx, cm), InvalidParameter);
}

TEST(MecPipeline, FromUnitsUsesRateAndServer) {
  MecCaps mec;
  mec.f_mec = 1e10;
  std::vector<Unit> us{unit(0, 2e6, 1e10, 10), unit(1, 1e6, 4e10, 10)};
  auto r = mec_pipeline(us, 1e6, mec);
  EXPECT_DOUBLE_EQ(r[0].lt, 3.0);
  EXPECT_DOUBLE_EQ(r[1].wt3, 3.0);
  EXPECT_DOUBLE_EQ(r[1].lt, 7.0);
  EXPECT_THROW(mec_pipeline(us, 0.0, mec), InvalidParameter);
}

TEST(LocalSequence, CumulativeSums) {
  std::vector<double> t{1, 2, 3};
  auto r = local_sequence_times(t);
  EXPECT_DOUBLE_EQ(r[0].lt, 1);
  EXPECT_DOUBLE_EQ(r[1].lt, 3);
  EXPECT_DOUBLE_EQ(r[2].lt, 6);
  EXPECT_DOUBLE_EQ(r[2].wt, 3);

  std::vector<double> one{0.1};
  auto s = local_sequence_times(one);
  EXPECT_DOUBLE_EQ(s[0].wt, 0.0);
  EXPECT_DOUBLE_EQ(s[0].lt, 0.1);

  std::vector<double> t2{0.05, 0.05, 0.02};
  auto q = local_sequence_times(t2);
  EXPECT_NEAR(q[0].lt, 0.05, 1e-15);
  EXPECT_NEAR(q[1].lt, 0.10, 1e-15);
  EXPECT_NEAR(q[2].lt, 0.12, 1e-15);
}

class EvaluateFixture : public ::testing::Test {
 protected:
  ChannelState ch;
  MecCaps mec;
  DeviceCaps caps;
  void SetUp() override {
    // rate = 1 bit/s at p = 1: snr = 1
    ch.h = 1.0;
    ch.bw = 1.0;
    ch.n0 = 1.0;
    mec.f_mec = 1.0;
    caps.f_max = 1.0;
    caps.p_max = 1.0;
    caps.kappa = 1.0;
    caps.user_deadline = 100.0;
  }
};

TEST_F(EvaluateFixture, AllLocal) {
  std::vector<Unit> us{unit(0, 1, 0.5, 10), unit(1, 1, 0.25, 10)};
  Assignment a{{0, 1}, {Placement::Local, Placement::Local}};
  auto r = evaluate(a, us, 1.0, 1.0, ch, mec, caps);
  EXPECT_DOUBLE_EQ(r.e_tx_total(), 0.0);
  EXPECT_DOUBLE_EQ(r.ts, 0.75);
  EXPECT_DOUBLE_EQ(r.e_local_total(), 0.75);
}

TEST_F(EvaluateFixture, AllMec) {
  std::vector<Unit> us{unit(0, 2, 1, 10), unit(1, 1, 4, 10)};
  Assignment a{{0, 1}, {Placement::Mec, Placement::Mec}};
  auto r = evaluate(a, us, 1.0, 1.0, ch, mec, caps);
  EXPECT_DOUBLE_EQ(r.e_local_total(), 0.0);
  EXPECT_DOUBLE_EQ(r.ts, 7.0);
  EXPECT_DOUBLE_EQ(r.e_tx_total(), 3.0);
}

TEST_F(EvaluateFixture, MixedComposesBothSides) {
  // MEC side reproduces the [2,1,3] / [1,4,1] trace, one local unit of 1 s.
  std::vector<Unit> us{unit(0, 2, 1, 10), unit(1, 1, 4, 10), unit(2, 1, 1, 10), unit(3, 3, 1, 10)};
  Assignment a{{0, 1, 2, 3}, {Placement::Mec, Placement::Mec, Placement::Local, Placement::Mec}};
  auto r = evaluate(a, us, 1.0, 1.0, ch, mec, caps);
  EXPECT_DOUBLE_EQ(r.ts, 8.0);
  EXPECT_DOUBLE_EQ(r.find(2)->lt, 1.0);
  EXPECT_DOUBLE_EQ(r.find(3)->lt, 8.0);
  EXPECT_DOUBLE_EQ(r.find(3)->wt4, 1.0);
}

TEST_F(EvaluateFixture, AssignmentMustCoverUnits) {
  std::vector<Unit> us{unit(0, 1, 1, 10), unit(1, 1, 1, 10)};
  EXPECT_THROW(evaluate(Assignment{{0}, {Placement::Local}}, us, 1, 1, ch, mec, caps), InvalidParameter);
  EXPECT_THROW(evaluate(Assignment{{0, 0}, {Placement::Local, Placement::Local}}, us, 1, 1, ch, mec, caps),
               InvalidParameter);
  EXPECT_THROW(evaluate(Assignment{{0, 7}, {Placement::Local, Placement::Local}}, us, 1, 1, ch, mec, caps),
               InvalidParameter);
}

TEST_F(EvaluateFixture, CapsAreEnforced) {
  std::vector<Unit> us{unit(0, 1, 1, 10)};
  try {
    evaluate(Assignment{{0}, {Placement::Local}}, us, 2.0, 1.0, ch, mec, caps);
    FAIL();
  } catch (const ConstraintViolation& e) {
    EXPECT_EQ(e.which(), Constraint::C4);
  }
  try {
    evaluate(Assignment{{0}, {Placement::Mec}}, us, 1.0, 2.0, ch, mec, caps);
    FAIL();
  } catch (const ConstraintViolation& e) {
    EXPECT_EQ(e.which(), Constraint::C5);
  }
}

TEST_F(EvaluateFixture, ZeroPowerWithMecUnitsRejected) {
  std::vector<Unit> us{unit(0, 1, 1, 10)};
  EXPECT_THROW(evaluate(Assignment{{0}, {Placement::Mec}}, us, 1.0, 0.0, ch, mec, caps), InvalidParameter);
}

TEST_F(EvaluateFixture, ConstraintBoundaries) {
  // MEC finishes at exactly its deadline: feasible.
  std::vector<Unit> us{unit(0, 2, 1, 3)};
  auto r = evaluate(Assignment{{0}, {Placement::Mec}}, us, 1.0, 1.0, ch, mec, caps);
  EXPECT_TRUE(check_constraints(r, us, caps).empty());

  // Local unit finishes late: C2 on that unit.
  std::vector<Unit> loc{unit(5, 1, 0.12, 0.10)};
  auto r2 = evaluate(Assignment{{5}, {Placement::Local}}, loc, 1.0, 1.0, ch, mec, caps);
  auto v = check_constraints(r2, loc, caps);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].which, Constraint::C2);
  EXPECT_EQ(v[0].unit, UnitId{5});

  // Makespan past the user deadline: C3.
  DeviceCaps tight = caps;
  tight.user_deadline = 7.0;
  std::vector<Unit> us3{unit(0, 2, 1, 100), unit(1, 1, 4, 100), unit(2, 3, 1, 100)};
  auto r3 = evaluate(Assignment{{0, 1, 2}, {Placement::Mec, Placement::Mec, Placement::Mec}}, us3, 1.0, 1.0, ch,
                     mec, tight);
  auto v3 = check_constraints(r3, us3, tight);
  ASSERT_EQ(v3.size(), 1u);
  EXPECT_EQ(v3[0].which, Constraint::C3);
  EXPECT_FALSE(v3[0].unit.has_value());

  // Late MEC unit: C1.
  std::vector<Unit> us4{unit(0, 2, 1, 2.5)};
  auto r4 = evaluate(Assignment{{0}, {Placement::Mec}}, us4, 1.0, 1.0, ch, mec, caps);
  auto v4 = check_constraints(r4, us4, caps);
  ASSERT_EQ(v4.size(), 1u);
  EXPECT_EQ(v4[0].which, Constraint::C1);
}

TEST(Schedule, MatchesEventSimulation) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  std::uniform_int_distribution<int> kk(0, 20);
  for (int inst = 0; inst < 300; ++inst) {
    const int k = kk(rng);
    std::vector<double> tx(k), cm(k);
    std::vector<oracle::Job> jobs(k);
    for (int j = 0; j < k; ++j) {
      tx[j] = t(rng);
      cm[j] = t(rng);
      jobs[j] = {true, tx[j], cm[j], 0.0};
    }
    auto rec = mec_pipeline_times(tx, cm);
    auto sim = oracle::simulate(jobs);
    for (int j = 0; j < k; ++j) {
      ASSERT_NEAR(rec[j].lt, sim.finish[j], 1e-9);
      ASSERT_NEAR(rec[j].wt3, sim.tx_end[j], 1e-9);
      ASSERT_NEAR(rec[j].wt4, sim.mec_start[j] - sim.tx_end[j], 1e-9);
    }
  }
}

TEST(Schedule, IsFeasibleAgreesWithCheckConstraints) {
  std::mt19937_64 rng(77);
  MecCaps mec;
  DeviceCaps caps;
  for (int inst = 0; inst < 300; ++inst) {
    auto ch = oracle::random_channel(rng);
    auto us = oracle::random_units(rng, 1 + inst % 8);
    std::vector<Placement> pl(us.size());
    for (auto& b : pl) b = (rng() & 1) ? Placement::Mec : Placement::Local;
    const double f = caps.f_max * (0.1 + 0.9 * (rng() % 1000) / 1000.0);
    const double p = caps.p_max * (0.01 + 0.99 * (rng() % 1000) / 1000.0);
    auto r = evaluate_ordered(us, pl, f, p, ch, mec, caps);
    const bool ok = check_constraints(r, us, caps).empty();
    ASSERT_EQ(is_feasible(us, pl, f, p, ch, mec, caps), ok);
    ASSERT_EQ(oracle::feasible(us, pl, f, p, ch, mec, caps), ok);
    ASSERT_NEAR(r.e_total, oracle::energy(us, pl, f, p, ch, caps), 1e-12 * std::max(1.0, r.e_total));
  }
}

TEST(Schedule, MakespanNeverDecreasesWhenAUnitIsAppended) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (int inst = 0; inst < 200; ++inst) {
    PipelineState st;
    double prev = 0.0;
    for (int j = 0; j < 15; ++j) {
      if (rng() & 1)
        st.push_mec(t(rng), t(rng), 0.0);
      else
        st.push_local(t(rng), 0.0);
      ASSERT_GE(st.ts(), prev);
      prev = st.ts();
    }
  }
}
