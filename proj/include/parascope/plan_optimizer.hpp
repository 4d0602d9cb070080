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

#ifndef PARASCOPE_PLAN_OPTIMIZER_HPP
#define PARASCOPE_PLAN_OPTIMIZER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "parascope/cost_model.hpp"
#include "parascope/hardware_model.hpp"
#include "parascope/model_config.hpp"

namespace parascope {

inline constexpr double kDay = 86400.0;
inline constexpr double kMonth = 30.0 * kDay;
inline constexpr double kYear = 365.0 * kDay;

// Upper bounds per parallelism dimension; 1 disables the dimension.
struct ParallelismCaps {
  std::int64_t max_nb = kUnbounded;
  std::int64_t max_nl = kUnbounded;
  std::int64_t max_na = kUnbounded;
  std::int64_t min_na = 1;
};

inline ParallelismCaps caps_from_name(std::string_view n) {
  ParallelismCaps c;
  if (n == "none") {
    c.max_nb = c.max_nl = c.max_na = 1;
  } else if (n == "data") {
    c.max_nl = c.max_na = 1;
  } else if (n == "data-pipe") {
    c.max_na = 1;
  } else if (n == "data-tensor") {
    c.max_nl = 1;
  } else if (n == "pipe-tensor") {
    c.max_nb = 1;
  } else if (n != "3d") {
    throw std::invalid_argument("unknown parallelism: " + std::string(n));
  }
  return c;
}

struct OptimizerConstraints {
  double epsilon = 0.25;
  double steps = 1e5;
  std::optional<std::int64_t> max_gpus;
  std::optional<double> deadline;  // seconds
  bool allow_offload = true;
  ParallelismCaps caps;
  ActivationCoefficients activations;

  void validate() const {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
    if (!(steps >= 1.0)) throw std::invalid_argument("steps must be >= 1");
    if (deadline && !(*deadline > 0.0)) throw std::invalid_argument("deadline must be positive");
  }
};

enum class Traffic : int { Tensor = 0, Data, Pipeline, State, Checkpoint, HostShared, PcieShared };

inline std::string_view traffic_name(Traffic t) {
  switch (t) {
    case Traffic::Tensor: return "tensor";
    case Traffic::Data: return "data";
    case Traffic::Pipeline: return "pipeline";
    case Traffic::State: return "state-offload";
    case Traffic::Checkpoint: return "checkpoint-offload";
    case Traffic::HostShared: return "host-link-shared";
    case Traffic::PcieShared: return "pcie-shared";
  }
  return "?";
}

struct TrafficCharge {
  Traffic kind = Traffic::Tensor;
  LinkClass link = LinkClass::NvLink;
  double nu_op = 0.0;
  double nu_net = 0.0;
  bool overlapped = false;
  double overhead = 0.0;
  bool ok = true;
};

enum Violation : unsigned {
  kBatchAboveCritical = 1u << 0,
  kOutOfMemory = 1u << 1,
  kOverheadAboveEpsilon = 1u << 2,
  kDataBound = 1u << 3,
  kPipelineUnderfilled = 1u << 4,
  kModularNeedsDivisor = 1u << 5,
  kTooManyGpus = 1u << 6,
  kOffloadDisabled = 1u << 7,
};

inline std::vector<std::string> describe_violations(unsigned mask) {
  static const std::array<const char*, 8> text = {
      "batch above critical batch",
      "device memory exceeded",
      "non-overlapped overhead above epsilon",
      "overlapped traffic is data-bound",
      "too few micro-batches to hide pipeline transfers",
      "modular pipeline needs n_l to divide d_l",
      "more GPUs than allowed",
      "offload disabled by constraints"};
  std::vector<std::string> out;
  for (unsigned i = 0; i < text.size(); ++i)
    if (mask & (1u << i)) out.emplace_back(text[i]);
  return out;
}

struct PlanEvaluation {
  ParallelPlan plan;
  double efficiency = 0.0;
  double training_time = std::numeric_limits<double>::infinity();
  double effective_steps = 0.0;
  double bubble = 0.0;
  std::int64_t extra_microbatches = 0;
  MemoryBreakdown memory;
  IntensityReport intensities;
  std::vector<TrafficCharge> traffic;
  bool feasible = false;
  unsigned violation_mask = 0;
  std::vector<std::string> violations;
};

inline double bubble_fraction(const ModelShape& s, const ParallelPlan& plan) {
  if (plan.n_mu < plan.n_l) throw std::invalid_argument("bubble needs n_mu >= n_l");
  const double nl = static_cast<double>(plan.n_l);
  const double nmu = static_cast<double>(plan.n_mu);
  if (plan.strategy == Strategy::Improved)
    return (nl - 1.0) * nl / (nmu * static_cast<double>(s.d_l));
  return (nl - 1.0) / nmu;
}

inline LinkClass tensor_link(const HardwareProfile& hw, std::int64_t n_a) {
  return (hw.node_unbounded() || n_a <= hw.max_node_size) ? LinkClass::NvLink : hw.inter_node;
}

// ceil(nu_net / nu_l * n_mu); saturates at n_mu + 1 when transfers cannot hide.
inline std::int64_t extra_microbatches_for_overlap(const ModelShape& s, const ParallelPlan& plan,
                                                   const HardwareProfile& hw) {
  const auto nu_l = pipeline_intensity(s, plan);
  if (!nu_l) return 0;
  const double r = intensity_threshold(hw, hw.inter_node) / *nu_l;
  if (r >= 1.0) return plan.n_mu + 1;
  return static_cast<std::int64_t>(std::ceil(r * static_cast<double>(plan.n_mu) - 1e-12));
}

namespace detail {

inline TrafficCharge charge(Traffic kind, LinkClass link, double nu_op, double nu_net,
                            bool overlapped, double epsilon) {
  TrafficCharge c{kind, link, nu_op, nu_net, overlapped, 0.0, true};
  c.overhead = overlap_overhead(nu_op, nu_net, overlapped);
  c.ok = overlapped ? nu_op >= nu_net : c.overhead <= epsilon;
  return c;
}

inline double inv(std::optional<double> v) { return v ? 1.0 / *v : 0.0; }

// Every traffic type of the plan, including shared-link budgets.
inline std::vector<TrafficCharge> traffic_charges(const ModelShape& s, const ParallelPlan& plan,
                                                  const HardwareProfile& hw, double epsilon,
                                                  std::int64_t* extra = nullptr) {
  std::vector<TrafficCharge> out;
  const double thr_inter = intensity_threshold(hw, hw.inter_node);
  const double thr_host = intensity_threshold(hw, hw.host_link);
  double inter_inv = 0.0;
  if (auto nu = tensor_intensity(s, plan.n_a)) {
    const LinkClass l = tensor_link(hw, plan.n_a);
    out.push_back(charge(Traffic::Tensor, l, *nu, intensity_threshold(hw, l), false, epsilon));
    if (l == hw.inter_node) inter_inv += 1.0 / *nu;
  }
  if (auto nu = data_parallel_intensity(s, plan)) {
    out.push_back(charge(Traffic::Data, hw.inter_node, *nu, thr_inter,
                         !baseline_uses_pipe_reduction(s, plan), epsilon));
    inter_inv += 1.0 / *nu;
  }
  if (auto nu = pipeline_intensity(s, plan)) {
    TrafficCharge c{Traffic::Pipeline, hw.inter_node, *nu, thr_inter, plan.overlap_pipeline, 0.0, true};
    if (plan.overlap_pipeline) {
      const std::int64_t e = extra_microbatches_for_overlap(s, plan, hw);
      if (extra) *extra = e;
      c.ok = plan.n_mu - e >= plan.n_l;
      // An underfilled pipeline pays for the transfers it cannot hide.
      if (!c.ok) c.overhead = thr_inter / *nu;
    } else {
      c.overhead = thr_inter / *nu;
      c.ok = c.overhead <= epsilon;
    }
    out.push_back(c);
    inter_inv += 1.0 / *nu;
  }
  const auto nu_s = state_offload_intensity(s, plan);
  const auto nu_c = checkpoint_offload_intensity(s, plan);
  if (nu_s) out.push_back(charge(Traffic::State, hw.host_link, *nu_s, thr_host, true, epsilon));
  if (nu_c) out.push_back(charge(Traffic::Checkpoint, hw.host_link, *nu_c, thr_host, true, epsilon));
  if (nu_s && nu_c)
    out.push_back(charge(Traffic::HostShared, hw.host_link, 1.0 / (inv(nu_s) + inv(nu_c)),
                         thr_host, true, epsilon));
  if (nu_s || nu_c) {
    // Host traffic and inter-node traffic cross the same PCIe switch.
    const double total = inv(nu_s) + inv(nu_c) + inter_inv;
    out.push_back(charge(Traffic::PcieShared, LinkClass::PciExpress, 1.0 / total,
                         intensity_threshold(hw, LinkClass::PciExpress), true, epsilon));
  }
  return out;
}

}  // namespace detail

inline PlanEvaluation evaluate(const ModelShape& s, const ParallelPlan& plan,
                               const HardwareProfile& hw, const OptimizerConstraints& c = {}) {
  plan.validate(s);
  PlanEvaluation ev;
  ev.plan = plan;
  unsigned mask = 0;
  const std::int64_t B = critical_batch_floor(s);
  if (plan.b() > B) mask |= kBatchAboveCritical;
  ev.memory = memory_breakdown(s, plan, c.activations);
  if (ev.memory.gpu_resident > hw.m_gpu) mask |= kOutOfMemory;
  if (plan.strategy == Strategy::Improved && plan.n_l > 1 && s.d_l % plan.n_l != 0)
    mask |= kModularNeedsDivisor;
  if (c.max_gpus && plan.n_gpu() > *c.max_gpus) mask |= kTooManyGpus;
  if (!c.allow_offload && (plan.offload_state || plan.offload_checkpoints)) mask |= kOffloadDisabled;
  ev.intensities = intensities(s, plan);
  ev.traffic = detail::traffic_charges(s, plan, hw, c.epsilon, &ev.extra_microbatches);
  ev.bubble = bubble_fraction(s, plan);
  double eff = 1.0 / (1.0 + ev.bubble);
  for (const TrafficCharge& t : ev.traffic) {
    eff /= 1.0 + t.overhead;
    if (t.ok) continue;
    if (t.kind == Traffic::Pipeline && t.overlapped) mask |= kPipelineUnderfilled;
    else if (t.overlapped) mask |= kDataBound;
    else mask |= kOverheadAboveEpsilon;
  }
  ev.efficiency = eff;
  // Total samples are fixed, so a smaller batch costs more steps.
  ev.effective_steps = c.steps * static_cast<double>(B) / static_cast<double>(plan.b());
  ev.training_time = ev.effective_steps * batch_flops(s, plan.b()) /
                     (static_cast<double>(plan.n_gpu()) * hw.c_gpu * eff);
  ev.violation_mask = mask;
  ev.violations = describe_violations(mask);
  ev.feasible = mask == 0;
  return ev;
}

// ---------------------------------------------------------------------------
// Strategy rules shared by the search and by any exhaustive check.

namespace detail {

inline bool overlapped_traffic_ok(const ModelShape& s, const ParallelPlan& plan,
                                  const HardwareProfile& hw) {
  for (const TrafficCharge& t : traffic_charges(s, plan, hw, 1.0))
    if (t.overlapped && t.kind != Traffic::Pipeline && !t.ok) return false;
  return true;
}

inline std::int64_t largest_divisor_at_most(std::int64_t n, std::int64_t cap) {
  for (std::int64_t d = std::min(n, cap); d > 1; --d)
    if (n % d == 0) return d;
  return 1;
}

}  // namespace detail

// Improved plans: b_mu = 1, the fewest micro-batches that keep every
// overlapped transfer compute-bound, and a modular pipeline as deep as that
// count can feed. Depths must divide d_l, so the divisor just below the count
// and the one just above it (with the count raised to match) are both offered.
inline std::vector<ParallelPlan> improved_structures(const ModelShape& s, const HardwareProfile& hw,
                                                     const OptimizerConstraints& c, std::int64_t n_b,
                                                     std::int64_t n_a, bool offload_state,
                                                     bool offload_checkpoints, bool overlap_pipeline) {
  const std::int64_t B = critical_batch_floor(s);
  ParallelPlan p = make_plan(Strategy::Improved, n_b, 1, n_a, 1, 1, offload_state, offload_checkpoints);
  p.overlap_pipeline = false;
  std::int64_t n_mu0 = 0;
  std::int64_t m_lo = 1;
  if (n_b > 1) {
    // Below this count the data-parallel transfer alone is data-bound.
    const double thr = intensity_threshold(hw, hw.inter_node);
    m_lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(2.0 * thr / static_cast<double>(s.d_s))));
  }
  for (std::int64_t m = m_lo; n_b * m <= B; ++m) {
    p.n_mu = m;
    if (detail::overlapped_traffic_ok(s, p, hw)) {
      n_mu0 = m;
      break;
    }
  }
  if (n_mu0 == 0) return {};
  std::vector<std::int64_t> depths = {detail::largest_divisor_at_most(s.d_l, std::min(n_mu0, c.caps.max_nl))};
  for (std::int64_t d = n_mu0 + 1; d <= std::min(s.d_l, c.caps.max_nl) && n_b * d <= B; ++d)
    if (s.d_l % d == 0) {
      if (depths[0] != n_mu0) depths.push_back(d);
      break;
    }
  // The modular pipeline intensity does not depend on its depth, so a
  // pipeline that is too slow to charge is dropped altogether.
  const double pipe_ov = intensity_threshold(hw, hw.inter_node) /
                         static_cast<double>((2 + s.n_I) * s.d_m);
  if (!overlap_pipeline && pipe_ov > c.epsilon) depths = {1};
  std::vector<ParallelPlan> out;
  for (std::int64_t n_l : depths) {
    ParallelPlan q = p;
    q.n_l = n_l;
    q.n_mu = std::max(n_mu0, n_l);
    if (overlap_pipeline) {
      if (n_l < 2) continue;
      q.overlap_pipeline = true;
      bool fits = true;
      while (fits && q.n_mu - extra_microbatches_for_overlap(s, q, hw) < q.n_l) {
        ++q.n_mu;
        fits = n_b * q.n_mu <= B;
      }
      if (!fits) continue;
    }
    out.push_back(q);
  }
  return out;
}

inline bool within_caps(const ParallelPlan& p, const OptimizerConstraints& c) {
  return p.n_b <= c.caps.max_nb && p.n_l <= c.caps.max_nl && p.n_a <= c.caps.max_na &&
         p.n_a >= c.caps.min_na && (c.allow_offload || !(p.offload_state || p.offload_checkpoints));
}

// Whether a plan follows the selection rules of its strategy.
inline bool admissible(const ModelShape& s, const ParallelPlan& p, const HardwareProfile& hw,
                       const OptimizerConstraints& c) {
  if (!within_caps(p, c)) return false;
  switch (p.strategy) {
    case Strategy::Baseline:
      return !p.state_partitioned && p.overlap_pipeline;
    case Strategy::Partitioned:
      return p.state_partitioned && p.n_l == 1 && p.overlap_pipeline;
    case Strategy::Improved: {
      if (!p.state_partitioned || p.b_mu != 1) return false;
      for (const ParallelPlan& q : improved_structures(s, hw, c, p.n_b, p.n_a, p.offload_state,
                                                       p.offload_checkpoints, p.overlap_pipeline))
        if (q.n_l == p.n_l && q.n_mu == p.n_mu) return true;
      return false;
    }
  }
  return false;
}

// Deterministic ordering of otherwise equal candidates.
inline auto plan_tiebreak_key(const ParallelPlan& p) {
  return std::make_tuple(p.offload_state, p.offload_checkpoints, p.overlap_pipeline, p.n_a, p.n_l,
                         p.b_mu, p.n_mu, p.n_b);
}

enum class Objective { Fastest, MinCluster };

// True when a is preferred over b. Baseline always maximizes pipeline depth first.
inline bool better(const PlanEvaluation& a, const PlanEvaluation& b, Objective obj) {
  if (a.feasible != b.feasible) return a.feasible;
  const ParallelPlan& x = a.plan;
  const ParallelPlan& y = b.plan;
  if (x.strategy == Strategy::Baseline && x.n_l != y.n_l) return x.n_l > y.n_l;
  if (obj == Objective::Fastest) {
    if (a.training_time != b.training_time) return a.training_time < b.training_time;
    if (x.n_gpu() != y.n_gpu()) return x.n_gpu() < y.n_gpu();
    if (x.b() != y.b()) return x.b() > y.b();
  } else {
    if (x.n_gpu() != y.n_gpu()) return x.n_gpu() < y.n_gpu();
    if (x.b() != y.b()) return x.b() < y.b();
    if (a.training_time != b.training_time) return a.training_time < b.training_time;
  }
  return plan_tiebreak_key(x) < plan_tiebreak_key(y);
}

// Tensor degrees whose overhead stays within epsilon.
inline std::vector<std::int64_t> tensor_candidates(const ModelShape& s, const HardwareProfile& hw,
                                                   const OptimizerConstraints& c) {
  std::vector<std::int64_t> out;
  const std::int64_t hi = std::min<std::int64_t>(c.caps.max_na, s.d_m);
  for (std::int64_t n = std::max<std::int64_t>(1, c.caps.min_na); n <= hi; ++n) {
    if (n == 1) {
      out.push_back(1);
      continue;
    }
    const LinkClass l = tensor_link(hw, n);
    const double ov = intensity_threshold(hw, l) / *tensor_intensity(s, n);
    if (ov <= c.epsilon) {
      out.push_back(n);
    } else if (l != LinkClass::NvLink || hw.node_unbounded()) {
      break;  // overhead only grows from here
    } else {
      n = hw.max_node_size;  // skip to the inter-node range
    }
  }
  return out;
}

namespace detail {

inline double tensor_factor(const ModelShape& s, const HardwareProfile& hw, std::int64_t n_a) {
  if (n_a < 2) return 1.0;
  return 1.0 + intensity_threshold(hw, tensor_link(hw, n_a)) / *tensor_intensity(s, n_a);
}

// Lower bound on the time of any plan with at most this many effective GPUs.
inline double time_floor(const ModelShape& s, const HardwareProfile& hw, const OptimizerConstraints& c,
                         double effective_gpus) {
  const std::int64_t B = critical_batch_floor(s);
  return c.steps * batch_flops(s, B) / (effective_gpus * hw.c_gpu);
}

// Buffers and one micro-batch of activations never leave the device.
inline bool fits_resident_floor(const ModelShape& s, const HardwareProfile& hw,
                                const OptimizerConstraints& c, std::int64_t n_a) {
  const double floor_bytes =
      (6.0 * static_cast<double>(layer_param_count(s)) +
       static_cast<double>(s.d_s) * activation_bytes_per_token(s, c.activations)) /
      static_cast<double>(n_a);
  return floor_bytes <= hw.m_gpu;
}

struct Search {
  const ModelShape& s;
  const HardwareProfile& hw;
  const OptimizerConstraints& c;
  Objective obj;
  std::optional<PlanEvaluation> best;

  bool meets_goal(const PlanEvaluation& ev) const {
    if (!ev.feasible) return false;
    if (c.deadline && ev.training_time > *c.deadline * (1.0 + 1e-12)) return false;
    return true;
  }

  void offer(const ParallelPlan& p) {
    PlanEvaluation ev = evaluate(s, p, hw, c);
    if (!meets_goal(ev)) return;
    if (!best || better(ev, *best, obj)) best = std::move(ev);
  }

  double best_time() const {
    return best ? best->training_time : std::numeric_limits<double>::infinity();
  }
};

inline std::int64_t gpu_cap_nb(const OptimizerConstraints& c, std::int64_t n_l, std::int64_t n_a) {
  std::int64_t cap = c.caps.max_nb;
  if (c.max_gpus) cap = std::min(cap, *c.max_gpus / (n_l * n_a));
  return cap;
}

// Smallest data-parallel degree in [lo, hi] that is feasible; feasibility
// only improves with n_b once data parallelism is active.
inline void offer_min_nb(Search& S, ParallelPlan p, std::int64_t lo, std::int64_t hi) {
  lo = std::max<std::int64_t>(lo, 2);
  std::int64_t a = lo, z = hi, found = -1;
  while (a <= z) {
    const std::int64_t mid = a + (z - a) / 2;
    p.n_b = mid;
    const PlanEvaluation ev = evaluate(S.s, p, S.hw, S.c);
    if (S.meets_goal(ev)) {
      found = mid;
      z = mid - 1;
    } else {
      a = mid + 1;
    }
  }
  if (found < 0) return;
  p.n_b = found;
  S.offer(p);
}

inline void search_generic(Search& S, Strategy st, std::int64_t n_l) {
  const ModelShape& s = S.s;
  const OptimizerConstraints& c = S.c;
  const std::int64_t B = critical_batch_floor(s);
  const double total = c.steps * batch_flops(s, B);
  std::vector<std::int64_t> nas = tensor_candidates(s, S.hw, c);
  // Most productive tensor degree first so pruning bites early.
  std::stable_sort(nas.begin(), nas.end(), [&](std::int64_t a, std::int64_t b) {
    return static_cast<double>(a) / tensor_factor(s, S.hw, a) >
           static_cast<double>(b) / tensor_factor(s, S.hw, b);
  });
  const bool flags_off[] = {false, true};
  for (std::int64_t n_a : nas) {
    if (!fits_resident_floor(s, S.hw, c, n_a)) continue;
    const double tf = tensor_factor(s, S.hw, n_a);
    const std::int64_t nb_cap = gpu_cap_nb(c, n_l, n_a);
    if (nb_cap < 1) continue;
    // Fewest data-parallel replicas that could meet the deadline at all.
    std::int64_t nb_floor = 1;
    if (S.obj == Objective::MinCluster) {
      const double need = total * tf / (*c.deadline * S.hw.c_gpu * static_cast<double>(n_l * n_a));
      nb_floor = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(need * (1.0 - 1e-9))));
      if (S.best && nb_floor * n_l * n_a > S.best->plan.n_gpu()) continue;
    }
    for (std::int64_t b_mu = 1; b_mu * n_l <= B; ++b_mu) {
      if (S.obj == Objective::MinCluster && B / (b_mu * n_l) < nb_floor) break;
      if (S.obj == Objective::Fastest) {
        const double gpus = static_cast<double>(n_a * n_l) *
                            static_cast<double>(std::min(nb_cap, std::max<std::int64_t>(1, B / (b_mu * n_l)))) / tf;
        if (time_floor(s, S.hw, c, gpus) > S.best_time() * (1.0 + 1e-9)) break;
      }
      for (std::int64_t n_mu = n_l; n_mu * b_mu <= B; ++n_mu) {
        const std::int64_t nb_max = std::min(nb_cap, B / (n_mu * b_mu));
        if (S.obj == Objective::MinCluster && nb_max < nb_floor) break;
        if (S.obj == Objective::Fastest) {
          const double gpus = static_cast<double>(n_a * n_l * nb_max) / tf;
          if (time_floor(s, S.hw, c, gpus) > S.best_time() * (1.0 + 1e-9)) break;
        }
        for (bool os : flags_off) {
          for (bool oc : flags_off) {
            if ((os || oc) && !c.allow_offload) continue;
            ParallelPlan p = make_plan(st, 1, n_l, n_a, n_mu, b_mu, os, oc);
            p.overlap_pipeline = true;
            S.offer(p);
            if (nb_max < 2) continue;
            if (S.obj == Objective::Fastest) {
              p.n_b = nb_max;
              S.offer(p);
            } else {
              // Efficiency does not depend on n_b once it is at least 2.
              p.n_b = 2;
              const PlanEvaluation probe = evaluate(s, p, S.hw, c);
              const double need = total / (*c.deadline * S.hw.c_gpu * probe.efficiency *
                                           static_cast<double>(n_l * n_a));
              const std::int64_t lo = static_cast<std::int64_t>(std::ceil(need * (1.0 - 1e-12)));
              if (lo > nb_max) continue;
              offer_min_nb(S, p, lo, nb_max);
            }
          }
        }
      }
    }
  }
}

inline void search_improved(Search& S) {
  const ModelShape& s = S.s;
  const OptimizerConstraints& c = S.c;
  const std::int64_t B = critical_batch_floor(s);
  std::vector<std::int64_t> nas = tensor_candidates(s, S.hw, c);
  std::stable_sort(nas.begin(), nas.end(), [&](std::int64_t a, std::int64_t b) {
    return static_cast<double>(a) / tensor_factor(s, S.hw, a) >
           static_cast<double>(b) / tensor_factor(s, S.hw, b);
  });
  const std::int64_t nl_cap = std::min(c.caps.max_nl, s.d_l);
  for (std::int64_t n_a : nas) {
    if (!fits_resident_floor(s, S.hw, c, n_a)) continue;
    const double tf = tensor_factor(s, S.hw, n_a);
    const std::int64_t nb_hi = std::min(B, gpu_cap_nb(c, 1, n_a));
    if (S.obj == Objective::Fastest) {
      const double gpus = static_cast<double>(n_a * std::min(nb_hi * nl_cap, B)) / tf;
      if (time_floor(s, S.hw, c, gpus) > S.best_time() * (1.0 + 1e-9)) continue;
    }
    for (int f = 0; f < 8; ++f) {
      const bool os = f & 1, oc = f & 2, ov = f & 4;
      if ((os || oc) && !c.allow_offload) continue;
      if (S.obj == Objective::Fastest) {
        // Same shape at a smaller n_b is strictly slower, so only the
        // largest n_b of each run of equal shapes is scored.
        std::vector<std::pair<std::int64_t, std::int64_t>> last;
        for (std::int64_t n_b = nb_hi; n_b >= 1; --n_b) {
          const double gpus = static_cast<double>(n_a * std::min(n_b * nl_cap, B)) / tf;
          if (time_floor(s, S.hw, c, gpus) > S.best_time() * (1.0 + 1e-9)) break;
          std::vector<std::pair<std::int64_t, std::int64_t>> shapes;
          for (const ParallelPlan& p : improved_structures(s, S.hw, c, n_b, n_a, os, oc, ov)) {
            shapes.emplace_back(p.n_l, p.n_mu);
            if (std::find(last.begin(), last.end(), shapes.back()) != last.end()) continue;
            if (within_caps(p, c)) S.offer(p);
          }
          last = std::move(shapes);
        }
      } else {
        for (std::int64_t n_b = 1; n_b <= nb_hi; ++n_b) {
          if (S.best && n_b * n_a > S.best->plan.n_gpu()) break;
          for (const ParallelPlan& p : improved_structures(s, S.hw, c, n_b, n_a, os, oc, ov))
            if (within_caps(p, c)) S.offer(p);
        }
      }
    }
  }
}

inline PlanEvaluation run_search(const ModelShape& s, const HardwareProfile& hw, Strategy st,
                                 const OptimizerConstraints& c, Objective obj) {
  s.validate();
  hw.validate();
  c.validate();
  Search S{s, hw, c, obj, std::nullopt};
  if (st == Strategy::Improved) {
    search_improved(S);
  } else if (st == Strategy::Partitioned) {
    search_generic(S, st, 1);
  } else {
    for (std::int64_t n_l = std::min(c.caps.max_nl, s.d_l); n_l >= 1; --n_l) {
      search_generic(S, st, n_l);
      if (S.best) break;
    }
  }
  if (S.best) return *S.best;
  PlanEvaluation none;
  none.plan.strategy = st;
  none.violations = {"no plan satisfies the constraints"};
  return none;
}

}  // namespace detail

inline PlanEvaluation fastest_plan(const ModelShape& s, const HardwareProfile& hw, Strategy st,
                                   OptimizerConstraints c = {}) {
  c.deadline.reset();
  return detail::run_search(s, hw, st, c, Objective::Fastest);
}

// Smallest cluster meeting the deadline; an infinite deadline is allowed.
inline PlanEvaluation min_cluster_for_deadline(const ModelShape& s, const HardwareProfile& hw,
                                               Strategy st, double deadline,
                                               OptimizerConstraints c = {}) {
  if (!(deadline > 0.0)) throw std::invalid_argument("deadline must be positive");
  c.deadline = deadline;
  if (std::isinf(deadline)) c.deadline = std::numeric_limits<double>::max();
  return detail::run_search(s, hw, st, c, Objective::MinCluster);
}

struct SweepPoint {
  std::int64_t x = 0;
  std::vector<PlanEvaluation> per_strategy;
  // Bytes of device memory per flop/s when only tensor parallelism grows
  // to hit a one-month run; taken from the last strategy in the list.
  double memory_to_compute = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<Strategy> strategies;
  // Largest x per strategy whose fastest plan fits the period.
  std::vector<std::optional<std::int64_t>> month_limit_x;
  std::vector<std::optional<std::int64_t>> year_limit_x;
};

inline double memory_to_compute_ratio(const ModelShape& s, const HardwareProfile& hw,
                                      const PlanEvaluation& ev, const OptimizerConstraints& c,
                                      double period = kMonth) {
  if (!ev.feasible) return 0.0;
  // Every memory term divides by n_a, so total memory is fixed; spread it
  // over the GPU count that meets the period.
  const double gpus_needed = static_cast<double>(ev.plan.n_gpu()) * ev.training_time / period;
  const MemoryBreakdown m = memory_breakdown(s, ev.plan, c.activations);
  const double total = m.gpu_resident * static_cast<double>(ev.plan.n_gpu());
  return total / (gpus_needed * hw.c_gpu);
}

inline SweepResult scaling_sweep(const std::vector<std::int64_t>& xs, const HardwareProfile& hw,
                                 const std::vector<Strategy>& strategies,
                                 const OptimizerConstraints& c = {}) {
  if (xs.empty()) throw std::invalid_argument("sweep range is empty");
  if (strategies.empty()) throw std::invalid_argument("sweep needs at least one strategy");
  SweepResult r;
  r.strategies = strategies;
  r.points.resize(xs.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(xs.size(), std::thread::hardware_concurrency()));
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < xs.size(); i += workers) {
        const ModelShape s = make_x_model(xs[i]);
        SweepPoint pt;
        pt.x = xs[i];
        for (Strategy st : strategies) pt.per_strategy.push_back(fastest_plan(s, hw, st, c));
        pt.memory_to_compute = memory_to_compute_ratio(s, hw, pt.per_strategy.back(), c);
        r.points[i] = std::move(pt);
      }
    }));
  }
  for (auto& j : jobs) j.get();
  r.month_limit_x.assign(strategies.size(), std::nullopt);
  r.year_limit_x.assign(strategies.size(), std::nullopt);
  for (const SweepPoint& pt : r.points) {
    for (std::size_t k = 0; k < strategies.size(); ++k) {
      const PlanEvaluation& ev = pt.per_strategy[k];
      if (!ev.feasible) continue;
      if (ev.training_time <= kMonth && (!r.month_limit_x[k] || pt.x > *r.month_limit_x[k]))
        r.month_limit_x[k] = pt.x;
      if (ev.training_time <= kYear && (!r.year_limit_x[k] || pt.x > *r.year_limit_x[k]))
        r.year_limit_x[k] = pt.x;
    }
  }
  return r;
}

}  // namespace parascope

#endif  // PARASCOPE_PLAN_OPTIMIZER_HPP
