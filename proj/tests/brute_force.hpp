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

// Exhaustive plan enumeration for tiny models, used to check the pruned search.

#ifndef PARASCOPE_TESTS_BRUTE_FORCE_HPP
#define PARASCOPE_TESTS_BRUTE_FORCE_HPP

#include <optional>
#include <vector>

#include "parascope/plan_optimizer.hpp"

namespace brute {

using namespace parascope;

// Scaled-down device: thresholds about 30x below an A100, a few MiB of
// memory and four GPUs per node, so tiny models face real trade-offs.
inline HardwareProfile desk_profile() {
  HardwareProfile hw = default_a100_profile();
  hw.name = "desk";
  hw.c_gpu = 312e12 / 30.0;
  hw.m_gpu = 3.0 * 1048576.0;
  hw.max_node_size = 4;
  hw.gpus_per_node = 4;
  return hw;
}

// Every admissible, feasible plan of one strategy.
inline std::vector<PlanEvaluation> enumerate(const ModelShape& s, const HardwareProfile& hw, Strategy st,
                                             const OptimizerConstraints& c) {
  std::vector<PlanEvaluation> out;
  const std::int64_t B = critical_batch_floor(s);
  for (std::int64_t n_a = 1; n_a <= s.d_m; ++n_a) {
    if (n_a > 1) {
      // Non-overlapped tensor traffic above epsilon is never feasible.
      const double ov = intensity_threshold(hw, tensor_link(hw, n_a)) / *tensor_intensity(s, n_a);
      if (ov > c.epsilon) continue;
    }
    for (std::int64_t n_l = 1; n_l <= s.d_l; ++n_l)
      for (std::int64_t n_mu = n_l; n_mu <= B; ++n_mu)
        for (std::int64_t b_mu = 1; n_mu * b_mu <= B; ++b_mu) {
          if (st == Strategy::Improved && b_mu != 1) continue;
          if (st == Strategy::Partitioned && n_l != 1) continue;
          for (std::int64_t n_b = 1; n_b * n_mu * b_mu <= B; ++n_b)
            for (int flags = 0; flags < 8; ++flags) {
              ParallelPlan p = make_plan(st, n_b, n_l, n_a, n_mu, b_mu, flags & 1, flags & 2);
              p.overlap_pipeline = (flags & 4) != 0;
              const PlanEvaluation ev = evaluate(s, p, hw, c);
              if (!ev.feasible) continue;
              if (!admissible(s, p, hw, c)) continue;
              out.push_back(ev);
            }
        }
  }
  return out;
}

inline std::optional<PlanEvaluation> best(const std::vector<PlanEvaluation>& all, Objective obj,
                                          std::optional<double> deadline = {}) {
  std::optional<PlanEvaluation> b;
  for (const auto& ev : all) {
    if (deadline && ev.training_time > *deadline) continue;
    if (!b || better(ev, *b, obj)) b = ev;
  }
  return b;
}

}  // namespace brute

#endif  // PARASCOPE_TESTS_BRUTE_FORCE_HPP
