/**
 * Copyright 2026 The Parascope Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "brute_force.hpp"
#include "parascope/plan_optimizer.hpp"

using namespace parascope;

namespace parascope {
inline void PrintTo(Strategy st, std::ostream* os) { *os << strategy_name(st); }
}  // namespace parascope

namespace {

auto plan_key(const ParallelPlan& p) {
  return std::make_tuple(p.strategy, p.state_partitioned, p.offload_state, p.offload_checkpoints,
                         p.overlap_pipeline, p.n_b, p.n_l, p.n_a, p.n_mu, p.b_mu);
}

}  // namespace

TEST(Bubble, PublishedCompositions) {
  const ModelShape s = make_x_model(160);
  const double pipe = bubble_fraction(s, make_plan(Strategy::Baseline, 3, 160, 1, 201, 4));
  EXPECT_NEAR(pipe, 159.0 / 201.0, 1e-12);
  EXPECT_NEAR(1.0 / (1.0 + pipe), 0.56, 0.005);
  const double threed = bubble_fraction(s, make_plan(Strategy::Baseline, 14, 160, 16, 172, 1));
  EXPECT_NEAR(1.0 / (1.0 + threed) / (1.0 + 484.0 / 6826.7), 0.48, 0.01);
  EXPECT_DOUBLE_EQ(bubble_fraction(s, make_plan(Strategy::Improved, 483, 5, 16, 5, 1)), 4.0 * 5 / (5.0 * 160));
  EXPECT_DOUBLE_EQ(bubble_fraction(s, make_plan(Strategy::Baseline, 1, 1, 1, 1, 1)), 0.0);
  ParallelPlan bad = make_plan(Strategy::Baseline, 1, 4, 1, 4, 1);
  bad.n_mu = 2;
  EXPECT_THROW(bubble_fraction(s, bad), std::invalid_argument);
}

TEST(ExtraMicroBatches, Formula) {
  const ModelShape s = make_x_model(160);
  const HardwareProfile hw = default_a100_profile();
  const ParallelPlan p = make_plan(Strategy::Baseline, 3, 160, 1, 201, 4);
  const double r = intensity_threshold(hw, LinkClass::InfiniBand) / 153600.0;
  EXPECT_EQ(extra_microbatches_for_overlap(s, p, hw), static_cast<std::int64_t>(std::ceil(r * 201)));
  EXPECT_EQ(extra_microbatches_for_overlap(s, make_plan(Strategy::Baseline, 1, 1, 1, 1, 1), hw), 0);
}

TEST(Evaluate, TimeAndEfficiencyInvariants) {
  const ModelShape s = make_x_model(160);
  const HardwareProfile hw = default_a100_profile();
  const PlanEvaluation ev = evaluate(s, make_plan(Strategy::Improved, 483, 5, 16, 5, 1), hw);
  EXPECT_TRUE(ev.feasible);
  double eff = 1.0 / (1.0 + ev.bubble);
  for (const auto& t : ev.traffic) eff /= 1.0 + t.overhead;
  EXPECT_DOUBLE_EQ(ev.efficiency, eff);
  const double expected = ev.effective_steps * batch_flops(s, 2415) / (38640 * 312e12 * ev.efficiency);
  EXPECT_DOUBLE_EQ(ev.training_time, expected);
  EXPECT_NEAR(ev.training_time / kDay, 6.8, 0.3);
  EXPECT_NEAR(ev.efficiency, 0.88, 0.01);
}

TEST(Evaluate, ReportsViolations) {
  const ModelShape s = make_x_model(160);
  const HardwareProfile hw = default_a100_profile();
  const PlanEvaluation big = evaluate(s, make_plan(Strategy::Baseline, 1000, 1, 1, 1, 5), hw);
  EXPECT_FALSE(big.feasible);
  EXPECT_TRUE(big.violation_mask & kBatchAboveCritical);
  EXPECT_TRUE(big.violation_mask & kOutOfMemory);
  const PlanEvaluation ten = evaluate(s, make_plan(Strategy::Improved, 1, 1, 64, 1, 1), hw);
  EXPECT_TRUE(ten.violation_mask & kOverheadAboveEpsilon);
  const PlanEvaluation mod = evaluate(s, make_plan(Strategy::Improved, 1, 3, 1, 3, 1), hw);
  EXPECT_TRUE(mod.violation_mask & kModularNeedsDivisor);
  EXPECT_FALSE(describe_violations(big.violation_mask).empty());
}

TEST(Fastest, SpeedTableRows) {
  const ModelShape s = make_x_model(160);
  const HardwareProfile hw = default_a100_profile();
  OptimizerConstraints c;
  const PlanEvaluation impr = fastest_plan(s, hw, Strategy::Improved, c);
  EXPECT_EQ(impr.plan.n_gpu(), 38640);
  EXPECT_EQ(impr.plan.b(), 2415);
  EXPECT_EQ(impr.plan.n_l, 5);
  c.caps = caps_from_name("data-pipe");
  const PlanEvaluation pipe = fastest_plan(s, hw, Strategy::Baseline, c);
  EXPECT_EQ(pipe.plan.n_l, 160);
  EXPECT_NEAR(static_cast<double>(pipe.plan.n_mu), 201, 20);
  EXPECT_NEAR(pipe.efficiency, 0.56, 0.01);
  c.caps = caps_from_name("data-tensor");
  const PlanEvaluation dt = fastest_plan(s, hw, Strategy::Partitioned, c);
  EXPECT_EQ(dt.plan.n_a, 16);
  EXPECT_EQ(dt.plan.n_gpu(), 7728);
  EXPECT_NEAR(dt.efficiency, 1.0 / (1.0 + 484.0 / 6826.7), 0.005);
}

TEST(Fastest, ReturnedPlansRespectLimits) {
  const HardwareProfile hw = default_a100_profile();
  for (std::int64_t x : {8, 32, 64, 160})
    for (Strategy st : {Strategy::Baseline, Strategy::Partitioned, Strategy::Improved}) {
      const ModelShape s = make_x_model(x);
      const PlanEvaluation ev = fastest_plan(s, hw, st);
      ASSERT_TRUE(ev.feasible) << x;
      EXPECT_LE(ev.plan.b(), critical_batch_floor(s));
      EXPECT_LE(ev.memory.gpu_resident, hw.m_gpu);
    }
}

// Improved wins wherever its modular pipeline is compute-bound on the
// inter-node link.
TEST(Fastest, ImprovedNeverSlower) {
  for (const HardwareProfile& hw : {default_a100_profile(), unlimited_node_variant(), ethernet_variant()})
    for (std::int64_t x : {32, 64, 96, 128, 160, 232, 248, 320}) {
      const ModelShape s = make_x_model(x);
      if (static_cast<double>((2 + s.n_I) * s.d_m) < intensity_threshold(hw, hw.inter_node)) continue;
      const PlanEvaluation impr = fastest_plan(s, hw, Strategy::Improved);
      const PlanEvaluation base = fastest_plan(s, hw, Strategy::Baseline);
      if (base.feasible) {
        ASSERT_TRUE(impr.feasible) << hw.name << " x=" << x;
        EXPECT_LE(impr.training_time, base.training_time) << hw.name << " x=" << x;
      }
    }
}

// Below that size the contiguous baseline pipeline, whose intensity grows
// with d_l / n_l, can beat the modular one.
TEST(Fastest, SmallModelsMayPreferContiguousPipelines) {
  const ModelShape s = make_x_model(24);
  const HardwareProfile hw = default_a100_profile();
  ASSERT_LT(static_cast<double>((2 + s.n_I) * s.d_m), intensity_threshold(hw, hw.inter_node));
  const PlanEvaluation impr = fastest_plan(s, hw, Strategy::Improved);
  const PlanEvaluation base = fastest_plan(s, hw, Strategy::Baseline);
  ASSERT_TRUE(impr.feasible && base.feasible);
  EXPECT_EQ(impr.plan.n_l, 1);
  EXPECT_GT(base.plan.n_l, 1);
  EXPECT_GT(impr.training_time, base.training_time);
}

// Depths must divide d_l; a layer count with no divisor near the micro-batch
// count still gets a deep pipeline.
TEST(Fastest, ImprovedDepthUsesNextDivisor) {
  const ModelShape s = make_x_model(232);  // 232 = 8 * 29
  const PlanEvaluation ev = fastest_plan(s, ethernet_variant(), Strategy::Improved);
  ASSERT_TRUE(ev.feasible);
  EXPECT_EQ(s.d_l % ev.plan.n_l, 0);
  EXPECT_GE(ev.plan.n_l, 29);
}

// Larger epsilon, allowing offload or unbounding the node never slows a plan.
TEST(Fastest, RelaxingConstraintsNeverSlower) {
  for (std::int64_t x : {16, 64, 160})
    for (Strategy st : {Strategy::Baseline, Strategy::Partitioned, Strategy::Improved}) {
      const ModelShape s = make_x_model(x);
      auto time = [&](double eps, bool offload, const HardwareProfile& hw) {
        OptimizerConstraints c;
        c.epsilon = eps;
        c.allow_offload = offload;
        return fastest_plan(s, hw, st, c).training_time;
      };
      for (double eps : {0.1, 0.25}) {
        const HardwareProfile node = default_a100_profile();
        const double base = time(eps, false, node);
        EXPECT_LE(time(eps, true, node), base) << x;
        EXPECT_LE(time(eps * 2, false, node), base) << x;
        EXPECT_LE(time(eps, false, unlimited_node_variant()), base) << x;
      }
    }
}

TEST(Fastest, NoPlanWhenOffloadIsNeededButForbidden) {
  OptimizerConstraints c;
  c.caps = caps_from_name("none");
  c.allow_offload = false;
  const PlanEvaluation ev = fastest_plan(make_x_model(160), default_a100_profile(), Strategy::Baseline, c);
  EXPECT_FALSE(ev.feasible);
  EXPECT_FALSE(ev.violations.empty());
}

TEST(Deadline, ImprovedRows) {
  const ModelShape s = make_x_model(160);
  const HardwareProfile hw = default_a100_profile();
  OptimizerConstraints c;
  c.caps.max_na = c.caps.min_na = 1;
  const PlanEvaluation na1 = min_cluster_for_deadline(s, hw, Strategy::Improved, 180.5 * kDay, c);
  EXPECT_EQ(na1.plan.n_gpu(), 1310);
  EXPECT_EQ(na1.plan.b(), 1572);
  c.caps.max_na = c.caps.min_na = 16;
  const PlanEvaluation na16 = min_cluster_for_deadline(s, hw, Strategy::Improved, 186.5 * kDay, c);
  EXPECT_EQ(na16.plan.n_gpu(), 1360);
  EXPECT_EQ(na16.plan.b(), 102);
}

TEST(Deadline, ClusterShrinksAsDeadlineGrows) {
  const ModelShape s = make_x_model(64);
  const HardwareProfile hw = default_a100_profile();
  for (Strategy st : {Strategy::Partitioned, Strategy::Improved}) {
    std::int64_t prev = std::numeric_limits<std::int64_t>::max();
    for (double days : {1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 365.0}) {
      const PlanEvaluation ev = min_cluster_for_deadline(s, hw, st, days * kDay);
      if (!ev.feasible) continue;
      EXPECT_LE(ev.training_time, days * kDay);
      EXPECT_LE(ev.plan.n_gpu(), prev) << strategy_name(st) << " " << days;
      prev = ev.plan.n_gpu();
    }
  }
}

TEST(Deadline, InputErrors) {
  const ModelShape s = make_x_model(8);
  const HardwareProfile hw = default_a100_profile();
  EXPECT_THROW(min_cluster_for_deadline(s, hw, Strategy::Improved, 0.0), std::invalid_argument);
  OptimizerConstraints c;
  c.epsilon = 0.0;
  EXPECT_THROW(fastest_plan(s, hw, Strategy::Improved, c), std::invalid_argument);
  c.epsilon = 0.25;
  c.steps = 0.0;
  EXPECT_THROW(fastest_plan(s, hw, Strategy::Improved, c), std::invalid_argument);
  const PlanEvaluation inf = min_cluster_for_deadline(s, hw, Strategy::Improved, std::numeric_limits<double>::infinity());
  EXPECT_TRUE(inf.feasible);
  EXPECT_EQ(inf.plan.n_gpu(), 1);
}

TEST(Caps, Names) {
  EXPECT_EQ(caps_from_name("none").max_nb, 1);
  EXPECT_EQ(caps_from_name("data").max_nl, 1);
  EXPECT_EQ(caps_from_name("data-pipe").max_na, 1);
  EXPECT_EQ(caps_from_name("data-tensor").max_nl, 1);
  EXPECT_EQ(caps_from_name("pipe-tensor").max_nb, 1);
  EXPECT_EQ(caps_from_name("3d").max_na, kUnbounded);
  EXPECT_THROW(caps_from_name("4d"), std::invalid_argument);
}

TEST(TensorCandidates, WithinEpsilon) {
  const ModelShape s = make_x_model(160);
  const auto node = tensor_candidates(s, default_a100_profile(), {});
  ASSERT_FALSE(node.empty());
  EXPECT_EQ(node.front(), 1);
  EXPECT_EQ(node.back(), 16);
  const auto wide = tensor_candidates(s, unlimited_node_variant(), {});
  EXPECT_GT(wide.back(), 16);
  for (std::int64_t n : wide)
    if (n > 1) EXPECT_LE(484.0 / *tensor_intensity(s, n), 0.25 + 1e-12);
}

TEST(Sweep, DeterministicAndConsistent) {
  const std::vector<std::int64_t> xs = {32, 48, 64, 160};
  const std::vector<Strategy> sts = {Strategy::Baseline, Strategy::Improved};
  const SweepResult a = scaling_sweep(xs, default_a100_profile(), sts);
  const SweepResult b = scaling_sweep(xs, default_a100_profile(), sts);
  ASSERT_EQ(a.points.size(), xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_EQ(a.points[i].x, xs[i]);
    for (std::size_t k = 0; k < sts.size(); ++k) {
      EXPECT_EQ(plan_key(a.points[i].per_strategy[k].plan), plan_key(b.points[i].per_strategy[k].plan));
      EXPECT_EQ(a.points[i].per_strategy[k].training_time, b.points[i].per_strategy[k].training_time);
      const PlanEvaluation single = fastest_plan(make_x_model(xs[i]), default_a100_profile(), sts[k]);
      EXPECT_EQ(plan_key(single.plan), plan_key(a.points[i].per_strategy[k].plan));
    }
  }
  EXPECT_THROW(scaling_sweep({}, default_a100_profile(), sts), std::invalid_argument);
}

// The pruned search must agree with exhaustive enumeration on tiny models.
class BruteForce : public ::testing::TestWithParam<std::tuple<std::int64_t, Strategy, std::string>> {};

TEST_P(BruteForce, SearchMatchesEnumeration) {
  const auto [x, st, caps] = GetParam();
  const ModelShape s = make_x_model(x);
  const HardwareProfile hw = brute::desk_profile();
  OptimizerConstraints c;
  c.caps = caps_from_name(caps);
  const auto all = brute::enumerate(s, hw, st, c);
  const auto fastest = brute::best(all, Objective::Fastest);
  const PlanEvaluation got = fastest_plan(s, hw, st, c);
  ASSERT_EQ(got.feasible, fastest.has_value());
  if (!fastest) return;
  EXPECT_EQ(plan_key(got.plan), plan_key(fastest->plan));
  EXPECT_DOUBLE_EQ(got.training_time, fastest->training_time);
  for (double factor : {1.0, 1.3, 3.0, 50.0}) {
    const double deadline = fastest->training_time * factor;
    const auto smallest = brute::best(all, Objective::MinCluster, deadline);
    const PlanEvaluation m = min_cluster_for_deadline(s, hw, st, deadline, c);
    ASSERT_EQ(m.feasible, smallest.has_value()) << factor;
    if (smallest) EXPECT_EQ(plan_key(m.plan), plan_key(smallest->plan)) << "deadline factor " << factor;
  }
}

INSTANTIATE_TEST_SUITE_P(
    TinyModels, BruteForce,
    ::testing::Combine(::testing::Values<std::int64_t>(2, 4, 6, 8),
                       ::testing::Values(Strategy::Baseline, Strategy::Partitioned, Strategy::Improved),
                       ::testing::Values(std::string("3d"), std::string("data-pipe"))),
    [](const auto& info) {
      std::string caps = std::get<2>(info.param);
      for (char& ch : caps)
        if (ch == '-') ch = '_';
      return "X" + std::to_string(std::get<0>(info.param)) + "_" +
             std::string(strategy_name(std::get<1>(info.param))) + "_" + caps;
    });
