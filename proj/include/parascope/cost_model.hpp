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

#ifndef PARASCOPE_COST_MODEL_HPP
#define PARASCOPE_COST_MODEL_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "parascope/hardware_model.hpp"
#include "parascope/model_config.hpp"

namespace parascope {

enum class Strategy : int { Baseline = 0, Partitioned, Improved };

inline std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Baseline: return "baseline";
    case Strategy::Partitioned: return "partitioned";
    case Strategy::Improved: return "improved";
  }
  throw std::invalid_argument("unknown strategy");
}

inline Strategy strategy_from_name(std::string_view n) {
  if (n == "baseline") return Strategy::Baseline;
  if (n == "partitioned") return Strategy::Partitioned;
  if (n == "improved") return Strategy::Improved;
  throw std::invalid_argument("unknown strategy: " + std::string(n));
}

struct ParallelPlan {
  Strategy strategy = Strategy::Baseline;
  bool state_partitioned = false;
  bool offload_state = false;
  bool offload_checkpoints = false;
  // Pipeline transfers hidden behind extra micro-batches instead of charged.
  bool overlap_pipeline = true;
  std::int64_t n_b = 1;
  std::int64_t n_l = 1;
  std::int64_t n_a = 1;
  std::int64_t n_mu = 1;
  std::int64_t b_mu = 1;

  std::int64_t b() const { return n_b * n_mu * b_mu; }
  std::int64_t n_gpu() const { return n_b * n_l * n_a; }

  void validate(const ModelShape& s) const {
    if (n_b < 1 || n_l < 1 || n_a < 1 || n_mu < 1 || b_mu < 1)
      throw std::invalid_argument("plan degrees must be >= 1");
    if (n_l > s.d_l) throw std::invalid_argument("plan needs n_l <= d_l");
    if (n_mu < n_l) throw std::invalid_argument("plan needs n_mu >= n_l");
    if (strategy == Strategy::Partitioned && !state_partitioned)
      throw std::invalid_argument("partitioned strategy needs a partitioned state");
    if (strategy == Strategy::Baseline && state_partitioned)
      throw std::invalid_argument("baseline strategy keeps the state unpartitioned");
  }
};

inline ParallelPlan make_plan(Strategy st, std::int64_t n_b, std::int64_t n_l,
                              std::int64_t n_a, std::int64_t n_mu,
                              std::int64_t b_mu, bool offload_state = false,
                              bool offload_checkpoints = false) {
  ParallelPlan p;
  p.strategy = st;
  p.state_partitioned = st != Strategy::Baseline;
  p.offload_state = offload_state;
  p.offload_checkpoints = offload_checkpoints;
  p.overlap_pipeline = st != Strategy::Improved;
  p.n_b = n_b;
  p.n_l = n_l;
  p.n_a = n_a;
  p.n_mu = n_mu;
  p.b_mu = b_mu;
  return p;
}

inline double batch_flops(const ModelShape& s, std::int64_t b) {
  return 8.0 * static_cast<double>(b) * static_cast<double>(s.d_s) *
         static_cast<double>(param_count(s));
}

// Live activations between two checkpoints, per token per layer.
struct ActivationCoefficients {
  double k1 = 35.0;
  double k2 = 2.0;
};

inline double activation_bytes_per_token(const ModelShape& s,
                                         ActivationCoefficients k = {}) {
  return 2.0 * (k.k1 * static_cast<double>(s.d_m) +
                k.k2 * static_cast<double>(s.d_a) * static_cast<double>(s.d_s));
}

struct MemoryBreakdown {
  double state = 0.0;
  double checkpoints = 0.0;
  double buffers = 0.0;
  double layer_activations = 0.0;
  double offloadable = 0.0;
  double non_offloadable = 0.0;
  // What stays on the device once the offload flags are applied.
  double gpu_resident = 0.0;
};

inline MemoryBreakdown memory_breakdown(const ModelShape& s, const ParallelPlan& plan,
                                        ActivationCoefficients k = {}) {
  s.validate();
  plan.validate(s);
  const double p = static_cast<double>(param_count(s));
  const double p_l = static_cast<double>(layer_param_count(s));
  const double n_a = static_cast<double>(plan.n_a);
  const double n_gpu = static_cast<double>(plan.n_gpu());
  const double b = static_cast<double>(plan.b());
  MemoryBreakdown m;
  m.state = plan.state_partitioned ? 12.0 * p / n_gpu
                                   : 12.0 * p / (static_cast<double>(plan.n_l) * n_a);
  m.buffers = 6.0 * p_l / n_a;
  m.checkpoints = 2.0 * b * static_cast<double>(s.d_s) * static_cast<double>(s.d_m) *
                  static_cast<double>(s.d_l) / n_gpu;
  m.layer_activations = static_cast<double>(plan.b_mu) * static_cast<double>(s.d_s) *
                        activation_bytes_per_token(s, k) / n_a;
  m.offloadable = m.state + m.checkpoints;
  m.non_offloadable = m.buffers + m.layer_activations;
  m.gpu_resident = m.non_offloadable + (plan.offload_state ? 0.0 : m.state) +
                   (plan.offload_checkpoints ? 0.0 : m.checkpoints);
  return m;
}

// Absent values mean the traffic type is unused by the plan.
struct IntensityReport {
  std::optional<double> nu_b;
  std::optional<double> nu_l;
  std::optional<double> nu_a;
  std::optional<double> nu_s;
  std::optional<double> nu_c;
};

// Baseline data parallelism stops overlapping once the pipeline is deep.
inline bool baseline_uses_pipe_reduction(const ModelShape& s, const ParallelPlan& plan) {
  return plan.strategy == Strategy::Baseline && plan.n_l > 1 && 4 * plan.n_l > s.d_l;
}

inline std::optional<double> data_parallel_intensity(const ModelShape& s,
                                                     const ParallelPlan& plan) {
  if (plan.n_b < 2) return std::nullopt;
  const double bds = static_cast<double>(plan.b()) * static_cast<double>(s.d_s);
  const double n_b = static_cast<double>(plan.n_b);
  const double n_mu = static_cast<double>(plan.n_mu);
  if (plan.strategy == Strategy::Improved)
    return plan.state_partitioned ? bds / (2.0 * n_b) : 3.0 * bds / (4.0 * n_b);
  if (plan.state_partitioned) return bds / (2.0 * n_b * n_mu);
  if (baseline_uses_pipe_reduction(s, plan)) return bds / n_b;
  return 3.0 * bds / (4.0 * n_b * n_mu);
}

inline std::optional<double> pipeline_intensity(const ModelShape& s,
                                                const ParallelPlan& plan) {
  if (plan.n_l < 2) return std::nullopt;
  const double base = static_cast<double>(2 + s.n_I) * static_cast<double>(s.d_m);
  if (plan.strategy == Strategy::Improved) return base;
  return base * static_cast<double>(s.d_l) / static_cast<double>(plan.n_l);
}

inline std::optional<double> tensor_intensity(const ModelShape& s, std::int64_t n_a) {
  if (n_a < 2) return std::nullopt;
  return static_cast<double>(4 + 2 * s.n_I) * static_cast<double>(s.d_m) /
         (3.0 * static_cast<double>(n_a - 1));
}

inline std::optional<double> state_offload_intensity(const ModelShape& s,
                                                     const ParallelPlan& plan) {
  if (!plan.offload_state) return std::nullopt;
  double nu = static_cast<double>(plan.b()) * static_cast<double>(s.d_s);
  if (plan.strategy != Strategy::Improved) nu /= static_cast<double>(plan.n_mu);
  if (!plan.state_partitioned) nu /= static_cast<double>(plan.n_b);
  return nu;
}

inline std::optional<double> checkpoint_offload_intensity(const ModelShape& s,
                                                          const ParallelPlan& plan) {
  if (!plan.offload_checkpoints) return std::nullopt;
  return static_cast<double>(4 + 2 * s.n_I) * static_cast<double>(s.d_m);
}

struct OffloadIntensities {
  std::optional<double> nu_s;
  std::optional<double> nu_c;
};

inline OffloadIntensities offload_intensities(const ModelShape& s, const ParallelPlan& plan) {
  return {state_offload_intensity(s, plan), checkpoint_offload_intensity(s, plan)};
}

inline IntensityReport intensities(const ModelShape& s, const ParallelPlan& plan) {
  IntensityReport r;
  r.nu_b = data_parallel_intensity(s, plan);
  r.nu_l = pipeline_intensity(s, plan);
  r.nu_a = tensor_intensity(s, plan.n_a);
  r.nu_s = state_offload_intensity(s, plan);
  r.nu_c = checkpoint_offload_intensity(s, plan);
  return r;
}

// Overlapped traffic is free until it becomes the bottleneck.
inline double overlap_overhead(double nu_op, double nu_net, bool overlapped) {
  if (!(nu_op > 0.0) || !(nu_net >= 0.0))
    throw std::invalid_argument("intensities must be positive");
  if (!overlapped) return nu_net / nu_op;
  return nu_op >= nu_net ? 0.0 : nu_net / nu_op - 1.0;
}

}  // namespace parascope

#endif  // PARASCOPE_COST_MODEL_HPP
