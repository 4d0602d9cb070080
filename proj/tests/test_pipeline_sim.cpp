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

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "oracles.hpp"
#include "parascope/pipeline_sim.hpp"

using namespace parascope;

namespace {

// Forward time of one layer and one micro-batch.
double unit(const ModelShape& s, const ParallelPlan& p, const HardwareProfile& hw) {
  return 2.0 * static_cast<double>(p.b_mu) * static_cast<double>(s.d_s) *
         static_cast<double>(layer_param_count(s)) / (static_cast<double>(p.n_a) * hw.c_gpu);
}

// Inter-node link set to `headroom` times the bandwidth at which pipeline
// transfers exactly balance compute.
HardwareProfile pipe_link(const ModelShape& s, double headroom) {
  HardwareProfile hw = ideal_network_profile();
  hw.bandwidth[static_cast<std::size_t>(hw.inter_node)] =
      headroom * hw.c_gpu / (static_cast<double>(2 + s.n_I) * static_cast<double>(s.d_m));
  return hw;
}

void expect_causal(const ScheduleGraph& g, const Timeline& tl) {
  for (std::size_t i = 0; i < g.tasks.size(); ++i) {
    for (const Dependency& d : g.tasks[i].deps) {
      const auto p = static_cast<std::size_t>(d.task);
      EXPECT_GE(tl.intervals[i].start + 1e-15, tl.intervals[p].end - d.lag * tl.duration[i]);
      if (d.lag == 0.0) EXPECT_GE(tl.intervals[i].start, tl.intervals[p].end);
    }
  }
  for (int dev = 0; dev < g.devices; ++dev)
    for (std::size_t st = 0; st < kStreamCount; ++st) {
      const auto& prog = g.program[static_cast<std::size_t>(dev)][st];
      for (std::size_t k = 1; k < prog.size(); ++k)
        EXPECT_GE(tl.intervals[static_cast<std::size_t>(prog[k])].start,
                  tl.intervals[static_cast<std::size_t>(prog[k - 1])].end);
    }
}

}  // namespace

TEST(Schedule, NamesRoundTrip) {
  for (ScheduleKind k : kAllSchedules) EXPECT_EQ(schedule_from_name(schedule_name(k)), k);
  EXPECT_THROW(schedule_from_name("zigzag"), std::invalid_argument);
}

TEST(Schedule, StdPipeFillDrain) {
  const ModelShape s = make_shape(4, 2, 8, 32);
  const ParallelPlan p = make_plan(Strategy::Improved, 1, 4, 1, 8, 1);
  const HardwareProfile hw = ideal_network_profile();
  const Timeline tl = simulate(build_schedule(s, p, ScheduleKind::StdPipe), hw);
  const double f = unit(s, p, hw);
  const double t_compute = 8 * 4 * f;
  EXPECT_NEAR(tl.makespan / t_compute, 1.0 + 3.0 / 8.0, 1e-12);
  for (double idle : tl.idle_fraction) EXPECT_NEAR(idle, 3.0 / 11.0, 1e-12);
  EXPECT_NEAR(tl.makespan, oracle::gpipe_makespan(4, 8, f), 1e-15);
}

TEST(Schedule, ModularPipeBubble) {
  const ModelShape s = make_shape(8, 2, 8, 32);
  const ParallelPlan p = make_plan(Strategy::Improved, 1, 4, 1, 4, 1);
  const HardwareProfile hw = ideal_network_profile();
  const Timeline tl = simulate(build_schedule(s, p, ScheduleKind::ModularPipe), hw);
  const double t_compute = 4 * 2 * 4 * unit(s, p, hw);
  EXPECT_NEAR(tl.makespan / t_compute, 1.375, 1e-12);
}

TEST(Schedule, StdPipeMatchesGridOracle) {
  const HardwareProfile hw = ideal_network_profile();
  for (int n_l : {1, 2, 4, 8})
    for (int n_mu = n_l; n_mu <= 4 * n_l; ++n_mu) {
      const ModelShape s = make_shape(n_l, 2, 8, 32);
      const ParallelPlan p = make_plan(Strategy::Improved, 1, n_l, 1, n_mu, 1);
      const Timeline tl = simulate(build_schedule(s, p, ScheduleKind::StdPipe), hw);
      EXPECT_NEAR(tl.makespan, oracle::gpipe_makespan(n_l, n_mu, unit(s, p, hw)), 1e-15);
    }
}

TEST(Schedule, SingleStageAllKindsAgree) {
  const ModelShape s = make_x_model(8);
  const ParallelPlan p = make_plan(Strategy::Improved, 1, 1, 1, 5, 2);
  const HardwareProfile hw = ideal_network_profile();
  const double ref = simulate(build_schedule(s, p, ScheduleKind::StdGA), hw).makespan;
  EXPECT_NEAR(ref, batch_flops(s, p.b()) / hw.c_gpu, 1e-12 * ref);
  for (ScheduleKind k : kAllSchedules) {
    const Timeline tl = simulate(build_schedule(s, p, k), hw);
    EXPECT_NEAR(tl.makespan, ref, 1e-12 * ref) << schedule_name(k);
    EXPECT_NEAR(tl.idle_fraction[0], 0.0, 1e-12);
  }
}

TEST(Schedule, RejectsInvalidLayouts) {
  const ModelShape s = make_x_model(6);
  EXPECT_THROW(build_schedule(s, make_plan(Strategy::Improved, 1, 4, 1, 4, 1), ScheduleKind::ModularPipe),
               std::invalid_argument);
  EXPECT_THROW(build_schedule(s, make_plan(Strategy::Improved, 1, 2, 1, 2, 1), ScheduleKind::LayeredGA),
               std::invalid_argument);
  EXPECT_THROW(build_schedule(s, make_plan(Strategy::Improved, 1, 4, 1, 2, 1), ScheduleKind::StdPipe),
               std::invalid_argument);
}

TEST(Simulate, RejectsBadHardware) {
  const ModelShape s = make_x_model(4);
  const ScheduleGraph g = build_schedule(s, make_plan(Strategy::Improved, 2, 1, 1, 2, 1), ScheduleKind::LayeredGA);
  HardwareProfile hw = default_a100_profile();
  hw.bandwidth[static_cast<std::size_t>(LinkClass::InfiniBand)] = 0.0;
  EXPECT_THROW(simulate(g, hw), std::invalid_argument);
  hw = default_a100_profile();
  hw.c_gpu = 0.0;
  EXPECT_THROW(simulate(g, hw), std::invalid_argument);
}

TEST(Simulate, DetectsCycles) {
  const ModelShape s = make_x_model(4);
  ScheduleGraph g = build_schedule(s, make_plan(Strategy::Improved, 1, 1, 1, 2, 1), ScheduleKind::StdGA);
  g.tasks[0].deps.push_back({static_cast<int>(g.tasks.size()) - 1, 0.0});
  EXPECT_THROW(simulate(g, ideal_network_profile()), std::runtime_error);
}

// Causality, stream exclusivity and work conservation over a grid of shapes,
// schedules and networks.
TEST(Properties, CausalityAndWorkConservation) {
  const std::vector<HardwareProfile> profiles = {ideal_network_profile(), default_a100_profile(),
                                                 ethernet_variant()};
  for (std::int64_t x : {4, 8})
    for (const auto& hw : profiles)
      for (ScheduleKind k : kAllSchedules)
        for (std::int64_t n_l : {1, 2, 4})
          for (std::int64_t n_b : {1, 3})
            for (int flags = 0; flags < 4; ++flags) {
              const ModelShape s = make_x_model(x);
              if (s.d_l % n_l != 0) continue;
              if (n_l > 1 && (k == ScheduleKind::StdGA || k == ScheduleKind::LayeredGA)) continue;
              const Strategy st = (flags & 1) ? Strategy::Improved : Strategy::Baseline;
              const ParallelPlan p = make_plan(st, n_b, n_l, 1, 2 * n_l, 1, false, (flags & 2) != 0);
              const ScheduleGraph g = build_schedule(s, p, k);
              const Timeline tl = simulate(g, hw);
              expect_causal(g, tl);
              const double expected = batch_flops(s, p.b()) / (static_cast<double>(p.n_gpu()) * hw.c_gpu);
              for (double busy : tl.compute_busy) EXPECT_NEAR(busy / expected, 1.0, 1e-9);
              EXPECT_GE(tl.makespan, expected * (1 - 1e-12));
            }
}

TEST(Properties, Deterministic) {
  const ModelShape s = make_x_model(8);
  const ParallelPlan p = make_plan(Strategy::Improved, 4, 4, 2, 8, 1, false, true);
  const HardwareProfile hw = default_a100_profile();
  for (ScheduleKind k : {ScheduleKind::StdPipe, ScheduleKind::ModularPipe}) {
    const ScheduleGraph g1 = build_schedule(s, p, k);
    const ScheduleGraph g2 = build_schedule(s, p, k);
    const Timeline a = simulate(g1, hw);
    const Timeline b = simulate(g2, hw);
    ASSERT_EQ(a.intervals.size(), b.intervals.size());
    for (std::size_t i = 0; i < a.intervals.size(); ++i) {
      EXPECT_EQ(a.intervals[i].start, b.intervals[i].start);
      EXPECT_EQ(a.intervals[i].end, b.intervals[i].end);
    }
    EXPECT_EQ(a.peak_bandwidth, b.peak_bandwidth);
  }
}

TEST(Properties, ModularNeverSlowerThanContiguous) {
  const HardwareProfile hw = ideal_network_profile();
  for (std::int64_t x : {4, 8, 16})
    for (std::int64_t n_l : {2, 4, 8}) {
      const ModelShape s = make_x_model(x);
      if (s.d_l % n_l != 0) continue;
      for (std::int64_t n_mu = n_l; n_mu <= 4 * n_l; ++n_mu) {
        const ParallelPlan p = make_plan(Strategy::Improved, 1, n_l, 1, n_mu, 1);
        const double std_ms = simulate(build_schedule(s, p, ScheduleKind::StdPipe), hw).makespan;
        const double mod_ms = simulate(build_schedule(s, p, ScheduleKind::ModularPipe), hw).makespan;
        if (n_l < s.d_l) EXPECT_LT(mod_ms, std_ms);
        else EXPECT_NEAR(mod_ms, std_ms, 1e-12 * std_ms);
      }
    }
}

TEST(Buffering, LayeredWithMixedBuffers) {
  const ModelShape s = make_x_model(8);
  for (const HardwareProfile& hw : {default_a100_profile(), ethernet_variant(), ideal_network_profile()}) {
    const ParallelPlan p = make_plan(Strategy::Improved, 8, 1, 1, 4, 1);
    const Timeline tl = simulate(build_schedule(s, p, ScheduleKind::LayeredGA), hw);
    const BufferingReport r = verify_buffering(tl);
    EXPECT_TRUE(r.ok) << hw.name;
    EXPECT_EQ(r.high_water.parameter_buffers, 2) << hw.name;
    EXPECT_EQ(r.high_water.gradient_buffers, 1) << hw.name;
  }
}

TEST(Buffering, ModularPipeWithMixedBuffers) {
  const ModelShape s = make_x_model(8);
  const ParallelPlan p = make_plan(Strategy::Improved, 4, 4, 1, 8, 1);
  for (const HardwareProfile& hw : {default_a100_profile(), ethernet_variant()}) {
    const Timeline tl = simulate(build_schedule(s, p, ScheduleKind::ModularPipe), hw);
    const BufferingReport r = verify_buffering(tl);
    EXPECT_TRUE(r.ok) << hw.name;
    EXPECT_LE(r.high_water.parameter_buffers, 2);
    EXPECT_LE(r.high_water.gradient_buffers, 1);
  }
}

TEST(Buffering, NoDataTrafficNoBuffers) {
  const ModelShape s = make_x_model(8);
  const Timeline tl = simulate(build_schedule(s, make_plan(Strategy::Baseline, 1, 1, 1, 4, 1), ScheduleKind::StdGA),
                               default_a100_profile());
  EXPECT_EQ(tl.buffer_high_water.parameter_buffers, 0);
  EXPECT_EQ(tl.buffer_high_water.gradient_buffers, 0);
  EXPECT_TRUE(verify_buffering(tl).ok);
}

TEST(Buffering, ReorderedRestoresAreReported) {
  const ModelShape s = make_x_model(8);
  const ParallelPlan p = make_plan(Strategy::Improved, 8, 1, 1, 4, 1);
  ScheduleGraph g = build_schedule(s, p, ScheduleKind::LayeredGA, {false});
  // Issue every restore up front; with free transfers they all land at once.
  auto& data = g.program[0][static_cast<std::size_t>(Stream::DataNet)];
  std::stable_partition(data.begin(), data.end(),
                        [&](int t) { return g.tasks[static_cast<std::size_t>(t)].kind == TaskKind::Restore; });
  const BufferingReport r = verify_buffering(simulate(g, ideal_network_profile()));
  EXPECT_FALSE(r.ok);
  EXPECT_GT(r.high_water.parameter_buffers, 2);
  ASSERT_FALSE(r.violations.empty());
  EXPECT_LT(r.violations.front().start, r.violations.front().end);
}

TEST(Buffering, StandardAccumulationHoldsEveryGradient) {
  const ModelShape s = make_x_model(8);
  const Timeline tl = simulate(build_schedule(s, make_plan(Strategy::Baseline, 8, 1, 1, 4, 1), ScheduleKind::StdGA),
                               default_a100_profile());
  EXPECT_EQ(tl.buffer_high_water.gradient_buffers, s.d_l);
  EXPECT_FALSE(verify_buffering(tl).ok);
}

TEST(Bandwidth, ReductionWaitsForLastMicroBatch) {
  const ModelShape s = make_x_model(8);
  const ParallelPlan p = make_plan(Strategy::Baseline, 8, 1, 1, 6, 1);
  const ScheduleGraph g = build_schedule(s, p, ScheduleKind::StdGA);
  const Timeline tl = simulate(g, default_a100_profile());
  double last_backward_start = tl.makespan;
  for (std::size_t i = 0; i < g.tasks.size(); ++i)
    if (g.tasks[i].kind == TaskKind::BackwardWithRecompute && g.tasks[i].micro_batch == 5)
      last_backward_start = std::min(last_backward_start, tl.intervals[i].start);
  for (std::size_t i = 0; i < g.tasks.size(); ++i)
    if (g.tasks[i].kind == TaskKind::Reduce) EXPECT_GE(tl.intervals[i].start, last_backward_start);
}

TEST(Bandwidth, LayeredSpreadsReduction) {
  for (std::int64_t x : {4, 6, 8, 10}) {
    const ModelShape s = make_x_model(x);
    const ParallelPlan p = make_plan(Strategy::Baseline, 8, 1, 1, s.d_l - 1, 1);
    for (const HardwareProfile& hw : {default_a100_profile(), ethernet_variant()}) {
      const double std_peak = simulate(build_schedule(s, p, ScheduleKind::StdGA), hw).peak_bandwidth[1];
      const double lay_peak = simulate(build_schedule(s, p, ScheduleKind::LayeredGA), hw).peak_bandwidth[1];
      EXPECT_LE(lay_peak, std_peak);
      EXPECT_LE(lay_peak, std_peak / static_cast<double>(s.d_l - 1) * 1.2) << "x=" << x;
    }
  }
}

TEST(Bandwidth, LayeredNeverAboveStandard) {
  for (std::int64_t x : {4, 8})
    for (std::int64_t n_mu : {1, 2, 5, 9})
      for (Strategy st : {Strategy::Baseline, Strategy::Improved}) {
        const ModelShape s = make_x_model(x);
        const ParallelPlan p = make_plan(st, 4, 1, 1, n_mu, 1);
        const HardwareProfile hw = default_a100_profile();
        const double a = simulate(build_schedule(s, p, ScheduleKind::StdGA), hw).peak_bandwidth[1];
        const double b = simulate(build_schedule(s, p, ScheduleKind::LayeredGA), hw).peak_bandwidth[1];
        EXPECT_LE(b, a * (1 + 1e-12));
      }
}

TEST(ClosedForm, ExactWithoutNetworkCost) {
  for (std::int64_t n_l : {1, 2, 4, 8}) {
    const ModelShape s = make_x_model(8);
    for (std::int64_t n_mu = n_l; n_mu <= 4 * n_l; ++n_mu)
      for (ScheduleKind k : {ScheduleKind::StdPipe, ScheduleKind::ModularPipe}) {
        const DeviationReport r =
            compare_to_closed_form(s, make_plan(Strategy::Improved, 1, n_l, 1, n_mu, 1), k, ideal_network_profile());
        EXPECT_LE(r.deviation, 1e-9);
        EXPECT_TRUE(r.within_tolerance);
      }
  }
}

TEST(ClosedForm, ComputeBoundPipelines) {
  for (std::int64_t x : {4, 8, 16}) {
    const ModelShape s = make_x_model(x);
    const HardwareProfile hw = pipe_link(s, 4.0);
    for (std::int64_t n_l : {2, 4, 8}) {
      if (s.d_l % n_l != 0) continue;
      for (std::int64_t n_mu = 2 * n_l; n_mu <= 4 * n_l; ++n_mu)
        for (ScheduleKind k : {ScheduleKind::StdPipe, ScheduleKind::ModularPipe})
          EXPECT_LE(compare_to_closed_form(s, make_plan(Strategy::Improved, 1, n_l, 1, n_mu, 1), k, hw).deviation,
                    0.05)
              << "x=" << x << " n_l=" << n_l << " n_mu=" << n_mu;
    }
  }
}

TEST(ClosedForm, ExtraMicroBatchesHideTransfersAtThreshold) {
  const ModelShape s = make_x_model(16);
  const HardwareProfile hw = pipe_link(s, 1.0);
  double prev = 1e9;
  for (std::int64_t n_mu : {4, 5, 8, 16, 32}) {
    const DeviationReport r =
        compare_to_closed_form(s, make_plan(Strategy::Improved, 1, 4, 1, n_mu, 1), ScheduleKind::ModularPipe, hw);
    EXPECT_LT(r.deviation, prev);
    prev = r.deviation;
  }
  EXPECT_LE(prev, 0.05);
}

TEST(ClosedForm, FlagsNetworkBoundRuns) {
  const ModelShape s = make_x_model(8);
  const DeviationReport r = compare_to_closed_form(s, make_plan(Strategy::Improved, 1, 4, 1, 4, 1),
                                                   ScheduleKind::ModularPipe, pipe_link(s, 0.1));
  EXPECT_FALSE(r.within_tolerance);
  EXPECT_EQ(r.dominating, Stream::PipeNet);
}

TEST(Trace, OneRecordPerTask) {
  const ModelShape s = make_x_model(4);
  const ScheduleGraph g = build_schedule(s, make_plan(Strategy::Improved, 2, 2, 1, 2, 1), ScheduleKind::ModularPipe);
  const Timeline tl = simulate(g, default_a100_profile());
  std::ostringstream os;
  write_trace_csv(os, g, tl);
  const std::string out = os.str();
  EXPECT_EQ(out.rfind("device,stream,kind,layer,micro_batch,start_s,end_s\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(out.begin(), out.end(), '\n')), g.tasks.size() + 1);
  EXPECT_NE(out.find("pipe-send"), std::string::npos);
  EXPECT_NE(out.find("restore"), std::string::npos);
}
