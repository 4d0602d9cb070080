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

#ifndef PARASCOPE_PIPELINE_SIM_HPP
#define PARASCOPE_PIPELINE_SIM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parascope/cost_model.hpp"
#include "parascope/hardware_model.hpp"
#include "parascope/model_config.hpp"

namespace parascope {

enum class ScheduleKind : int { StdGA = 0, LayeredGA, StdPipe, ModularPipe };

inline constexpr std::array<ScheduleKind, 4> kAllSchedules = {
    ScheduleKind::StdGA, ScheduleKind::LayeredGA, ScheduleKind::StdPipe, ScheduleKind::ModularPipe};

inline std::string_view schedule_name(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::StdGA: return "std-ga";
    case ScheduleKind::LayeredGA: return "layered-ga";
    case ScheduleKind::StdPipe: return "std-pipe";
    case ScheduleKind::ModularPipe: return "modular-pipe";
  }
  throw std::invalid_argument("unknown schedule kind");
}

inline ScheduleKind schedule_from_name(std::string_view n) {
  for (ScheduleKind k : kAllSchedules)
    if (schedule_name(k) == n) return k;
  throw std::invalid_argument("unknown schedule kind: " + std::string(n));
}

enum class TaskKind : int { Forward = 0, BackwardWithRecompute, Restore, Reduce, PipeSend, OffloadWrite };

inline std::string_view task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::Forward: return "forward";
    case TaskKind::BackwardWithRecompute: return "backward";
    case TaskKind::Restore: return "restore";
    case TaskKind::Reduce: return "reduce";
    case TaskKind::PipeSend: return "pipe-send";
    case TaskKind::OffloadWrite: return "offload-write";
  }
  return "?";
}

enum class Stream : int { Compute = 0, DataNet, PipeNet, HostLink };
inline constexpr std::size_t kStreamCount = 4;

inline std::string_view stream_name(Stream s) {
  switch (s) {
    case Stream::Compute: return "compute";
    case Stream::DataNet: return "data-net";
    case Stream::PipeNet: return "pipe-net";
    case Stream::HostLink: return "host-link";
  }
  return "?";
}

// start(task) >= end(dep) - lag * duration(task)
struct Dependency {
  int task = 0;
  double lag = 0.0;
};

struct Task {
  TaskKind kind = TaskKind::Forward;
  Stream stream = Stream::Compute;
  int device = 0;
  int layer = 0;
  int micro_batch = 0;  // -1 for tasks covering every micro-batch
  double flops = 0.0;   // compute tasks
  double bytes = 0.0;   // network tasks
  std::vector<Dependency> deps;
};

// Share of a backward task spent recomputing activations before gradients exist.
inline constexpr double kRecomputeShare = 1.0 / 3.0;

struct BufferLifetime {
  bool gradient = false;
  int device = 0;
  int layer = 0;
  int acquire_task = 0;
  double acquire_offset = 0.0;  // fraction of the acquiring task's duration
  int release_task = 0;
};

struct ScheduleGraph {
  ScheduleKind kind = ScheduleKind::StdGA;
  int devices = 1;
  int layers = 1;
  int micro_batches = 1;
  std::vector<Task> tasks;
  // Issue order per device and stream.
  std::vector<std::array<std::vector<int>, kStreamCount>> program;
  std::vector<BufferLifetime> buffers;
};

struct Interval {
  double start = 0.0;
  double end = 0.0;
};

struct ScheduleOptions {
  // Two parameter buffers and one gradient buffer per device.
  bool mixed_buffering = true;
};

namespace detail {

struct Group {
  int device = 0;
  int layer = 0;
  bool backward = false;
  std::vector<int> tasks;
  int position = 0;  // index among the device's groups
};

inline int add_task(ScheduleGraph& g, Task t) {
  g.tasks.push_back(std::move(t));
  return static_cast<int>(g.tasks.size()) - 1;
}

}  // namespace detail

inline ScheduleGraph build_schedule(const ModelShape& s, const ParallelPlan& plan, ScheduleKind kind,
                                    ScheduleOptions opt = {}) {
  s.validate();
  plan.validate(s);
  const int L = static_cast<int>(s.d_l);
  const int n_l = static_cast<int>(plan.n_l);
  const int M = static_cast<int>(plan.n_mu);
  const bool ga = kind == ScheduleKind::StdGA || kind == ScheduleKind::LayeredGA;
  if (ga && n_l != 1) throw std::invalid_argument("gradient accumulation schedules need n_l = 1");
  if (L % n_l != 0) throw std::invalid_argument("schedule needs n_l to divide d_l");
  const bool layered = kind == ScheduleKind::LayeredGA || kind == ScheduleKind::ModularPipe;
  const int per_dev = L / n_l;
  auto owner = [&](int layer) {
    return kind == ScheduleKind::ModularPipe ? layer % n_l : layer / per_dev;
  };

  ScheduleGraph g;
  g.kind = kind;
  g.devices = n_l;
  g.layers = L;
  g.micro_batches = M;
  g.program.resize(static_cast<std::size_t>(n_l));

  const double na = static_cast<double>(plan.n_a);
  const double fwd_flops = 2.0 * static_cast<double>(plan.b_mu) * static_cast<double>(s.d_s) *
                           static_cast<double>(layer_param_count(s)) / na;
  const double act_bytes = static_cast<double>(plan.b_mu) * static_cast<double>(s.d_s) *
                           static_cast<double>(s.d_m) / na;
  const double nb = static_cast<double>(plan.n_b);
  const double dp_share = (nb - 1.0) / nb;
  const double pl_bytes = static_cast<double>(layer_param_count(s)) / na;
  const bool data_traffic = plan.n_b > 1;
  const bool partitioned = data_traffic && plan.state_partitioned;

  std::vector<int> F(static_cast<std::size_t>(L * M)), Bk(static_cast<std::size_t>(L * M));
  auto idx = [&](int l, int m) { return static_cast<std::size_t>(l * M + m); };
  for (int l = 0; l < L; ++l)
    for (int m = 0; m < M; ++m) {
      Task f{TaskKind::Forward, Stream::Compute, owner(l), l, m, fwd_flops, 0.0, {}};
      F[idx(l, m)] = detail::add_task(g, f);
      Task b{TaskKind::BackwardWithRecompute, Stream::Compute, owner(l), l, m, 3.0 * fwd_flops, 0.0, {}};
      Bk[idx(l, m)] = detail::add_task(g, b);
    }

  // Compute issue order, grouped by weight reuse.
  std::vector<std::vector<detail::Group>> groups(static_cast<std::size_t>(n_l));
  auto push_group = [&](int dev, int l, bool bw, std::vector<int> ts) {
    auto& gs = groups[static_cast<std::size_t>(dev)];
    detail::Group gr{dev, l, bw, std::move(ts), static_cast<int>(gs.size())};
    for (int t : gr.tasks) g.program[static_cast<std::size_t>(dev)][0].push_back(t);
    gs.push_back(std::move(gr));
  };
  for (int dev = 0; dev < n_l; ++dev) {
    std::vector<int> own;
    for (int l = 0; l < L; ++l)
      if (owner(l) == dev) own.push_back(l);
    if (kind == ScheduleKind::StdGA) {
      for (int m = 0; m < M; ++m) {
        for (int l : own) push_group(dev, l, false, {F[idx(l, m)]});
        for (auto it = own.rbegin(); it != own.rend(); ++it) push_group(dev, *it, true, {Bk[idx(*it, m)]});
      }
    } else if (kind == ScheduleKind::StdPipe) {
      for (int m = 0; m < M; ++m)
        for (int l : own) push_group(dev, l, false, {F[idx(l, m)]});
      for (int m = 0; m < M; ++m)
        for (auto it = own.rbegin(); it != own.rend(); ++it) push_group(dev, *it, true, {Bk[idx(*it, m)]});
    } else {
      for (int l : own) {
        std::vector<int> ts;
        for (int m = 0; m < M; ++m) ts.push_back(F[idx(l, m)]);
        push_group(dev, l, false, ts);
      }
      for (auto it = own.rbegin(); it != own.rend(); ++it) {
        std::vector<int> ts;
        for (int m = 0; m < M; ++m) ts.push_back(Bk[idx(*it, m)]);
        push_group(dev, *it, true, ts);
      }
    }
  }

  // Activation flow, pipeline transfers and checkpoint offload.
  std::vector<double> pos(g.tasks.size(), 0.0);
  for (int dev = 0; dev < n_l; ++dev) {
    const auto& prog = g.program[static_cast<std::size_t>(dev)][0];
    for (std::size_t i = 0; i < prog.size(); ++i) pos[static_cast<std::size_t>(prog[i])] = static_cast<double>(i);
  }
  struct Keyed {
    double key;
    int task;
  };
  std::vector<std::array<std::vector<Keyed>, kStreamCount>> queued(static_cast<std::size_t>(n_l));
  auto enqueue = [&](int t, double key) {
    const Task& tk = g.tasks[static_cast<std::size_t>(t)];
    queued[static_cast<std::size_t>(tk.device)][static_cast<std::size_t>(tk.stream)].push_back({key, t});
  };
  auto send = [&](int from_task, int l, int m) {
    Task ps{TaskKind::PipeSend, Stream::PipeNet, g.tasks[static_cast<std::size_t>(from_task)].device, l, m,
            0.0, 4.0 * act_bytes, {{from_task, 0.0}}};
    const int t = detail::add_task(g, ps);
    enqueue(t, pos[static_cast<std::size_t>(from_task)]);
    return t;
  };
  for (int m = 0; m < M; ++m) {
    for (int l = 0; l < L; ++l) {
      const int f = F[idx(l, m)];
      if (l > 0) {
        const int prev = F[idx(l - 1, m)];
        const int src = owner(l - 1) == owner(l) ? prev : send(prev, l - 1, m);
        g.tasks[static_cast<std::size_t>(f)].deps.push_back({src, 0.0});
      }
      const int b = Bk[idx(l, m)];
      g.tasks[static_cast<std::size_t>(b)].deps.push_back({f, 0.0});
      if (plan.offload_checkpoints) {
        Task w{TaskKind::OffloadWrite, Stream::HostLink, owner(l), l, m, 0.0, 2.0 * act_bytes, {{f, 0.0}}};
        const int t = detail::add_task(g, w);
        enqueue(t, pos[static_cast<std::size_t>(f)]);
        g.tasks[static_cast<std::size_t>(b)].deps.push_back({t, 0.0});
      }
    }
    for (int l = L - 2; l >= 0; --l) {
      const int next = Bk[idx(l + 1, m)];
      const int src = owner(l + 1) == owner(l) ? next : send(next, l + 1, m);
      g.tasks[static_cast<std::size_t>(Bk[idx(l, m)])].deps.push_back({src, 0.0});
    }
  }

  // Data-parallel restores and reductions.
  if (data_traffic) {
    for (int dev = 0; dev < n_l; ++dev) {
      auto& gs = groups[static_cast<std::size_t>(dev)];
      std::vector<int> restores;       // in issue order
      std::vector<int> restore_group;  // group index of each restore
      std::vector<int> reduces;
      std::vector<int> reduce_first;   // first backward task of each reduction
      std::vector<double> set_end_pos_task;
      if (partitioned) {
        for (const auto& gr : gs) {
          Task r{TaskKind::Restore, Stream::DataNet, dev, gr.layer, layered ? -1 : g.tasks[static_cast<std::size_t>(gr.tasks[0])].micro_batch,
                 0.0, 4.0 * pl_bytes * dp_share, {}};
          const int t = detail::add_task(g, r);
          for (int c : gr.tasks) g.tasks[static_cast<std::size_t>(c)].deps.push_back({t, 0.0});
          enqueue(t, gr.position - 1 + 0.25);
          restores.push_back(t);
          restore_group.push_back(gr.position);
          g.buffers.push_back({false, dev, gr.layer, t, 0.0, gr.tasks.back()});
        }
      }
      // Gradients accumulate per layer, except partitioned standard
      // accumulation which reduces every micro-batch.
      const bool per_micro_batch = partitioned && !layered;
      std::vector<std::vector<int>> sets;
      std::vector<int> set_end_pos;
      std::vector<int> set_layer;
      if (per_micro_batch) {
        for (const auto& gr : gs)
          if (gr.backward) {
            sets.push_back(gr.tasks);
            set_end_pos.push_back(gr.position);
            set_layer.push_back(gr.layer);
          }
      } else {
        std::vector<int> last_pos(static_cast<std::size_t>(L), -1);
        std::vector<std::vector<int>> by_layer(static_cast<std::size_t>(L));
        for (const auto& gr : gs)
          if (gr.backward) {
            auto& v = by_layer[static_cast<std::size_t>(gr.layer)];
            v.insert(v.end(), gr.tasks.begin(), gr.tasks.end());
            last_pos[static_cast<std::size_t>(gr.layer)] = gr.position;
          }
        std::vector<int> order;
        for (int l = 0; l < L; ++l)
          if (last_pos[static_cast<std::size_t>(l)] >= 0) order.push_back(l);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
          return last_pos[static_cast<std::size_t>(a)] < last_pos[static_cast<std::size_t>(b)];
        });
        for (int l : order) {
          sets.push_back(by_layer[static_cast<std::size_t>(l)]);
          set_end_pos.push_back(last_pos[static_cast<std::size_t>(l)]);
          set_layer.push_back(l);
        }
      }
      const double red_bytes = (partitioned ? 4.0 : 8.0) * pl_bytes * dp_share;
      for (std::size_t k = 0; k < sets.size(); ++k) {
        Task r{TaskKind::Reduce, Stream::DataNet, dev, set_layer[k], per_micro_batch ? g.tasks[static_cast<std::size_t>(sets[k][0])].micro_batch : -1,
               0.0, red_bytes, {}};
        for (int c : sets[k]) r.deps.push_back({c, 0.0});
        const int t = detail::add_task(g, r);
        enqueue(t, set_end_pos[k] + 0.75);
        reduces.push_back(t);
        const int first = *std::min_element(sets[k].begin(), sets[k].end(), [&](int a, int b) {
          return pos[static_cast<std::size_t>(a)] < pos[static_cast<std::size_t>(b)];
        });
        reduce_first.push_back(first);
        double last = 0.0;
        for (int c : sets[k]) last = std::max(last, pos[static_cast<std::size_t>(c)]);
        set_end_pos_task.push_back(last);
        g.buffers.push_back({true, dev, set_layer[k], first, kRecomputeShare, t});
      }
      if (opt.mixed_buffering) {
        // A restore may only start once the buffer two restores back is free.
        for (std::size_t k = 2; k < restores.size(); ++k) {
          const auto& old = gs[static_cast<std::size_t>(restore_group[k - 2])];
          g.tasks[static_cast<std::size_t>(restores[k])].deps.push_back({old.tasks.back(), 0.0});
        }
        // Gradients of the next set wait for the previous reduction, which
        // may still run while activations are recomputed. Interleaved sets
        // (unpartitioned standard accumulation) cannot share one buffer.
        for (std::size_t k = 1; k < reduces.size(); ++k) {
          if (pos[static_cast<std::size_t>(reduce_first[k])] < set_end_pos_task[k - 1]) continue;
          g.tasks[static_cast<std::size_t>(reduce_first[k])].deps.push_back({reduces[k - 1], kRecomputeShare});
        }
      }
    }
  }

  for (int dev = 0; dev < n_l; ++dev)
    for (std::size_t st = 1; st < kStreamCount; ++st) {
      auto& q = queued[static_cast<std::size_t>(dev)][st];
      std::stable_sort(q.begin(), q.end(), [](const Keyed& a, const Keyed& b) { return a.key < b.key; });
      for (const Keyed& k : q) g.program[static_cast<std::size_t>(dev)][st].push_back(k.task);
    }
  return g;
}

struct BufferHighWater {
  int parameter_buffers = 0;
  int gradient_buffers = 0;
};

struct Timeline {
  std::vector<Interval> intervals;  // by task id
  std::vector<double> duration;     // by task id
  double makespan = 0.0;
  std::vector<double> idle_fraction;       // by device
  std::vector<double> compute_busy;        // by device
  std::array<double, kStreamCount> peak_bandwidth{};  // bytes/s demanded
  std::array<double, kStreamCount> busy_time{};       // summed over devices
  BufferHighWater buffer_high_water;
  const ScheduleGraph* graph = nullptr;
};

inline LinkClass stream_link(const HardwareProfile& hw, Stream s) {
  switch (s) {
    case Stream::DataNet:
    case Stream::PipeNet: return hw.inter_node;
    case Stream::HostLink: return hw.host_link;
    case Stream::Compute: break;
  }
  return LinkClass::GpuMemory;
}

namespace detail {

// Earliest start for every task under in-order issue per device and stream.
inline std::vector<Interval> place(const ScheduleGraph& g, const std::vector<double>& dur) {
  const std::size_t n = g.tasks.size();
  std::vector<Interval> iv(n);
  std::vector<char> done(n, 0);
  std::vector<std::array<std::size_t, kStreamCount>> head(static_cast<std::size_t>(g.devices));
  std::vector<std::array<double, kStreamCount>> free_at(static_cast<std::size_t>(g.devices));
  for (auto& h : head) h.fill(0);
  for (auto& f : free_at) f.fill(0.0);
  std::size_t scheduled = 0;
  bool progress = true;
  while (progress) {
    progress = false;
    for (int dev = 0; dev < g.devices; ++dev) {
      for (std::size_t st = 0; st < kStreamCount; ++st) {
        const auto& prog = g.program[static_cast<std::size_t>(dev)][st];
        auto& h = head[static_cast<std::size_t>(dev)][st];
        while (h < prog.size()) {
          const auto t = static_cast<std::size_t>(prog[h]);
          double start = free_at[static_cast<std::size_t>(dev)][st];
          bool ready = true;
          for (const Dependency& d : g.tasks[t].deps) {
            const auto p = static_cast<std::size_t>(d.task);
            if (!done[p]) {
              ready = false;
              break;
            }
            start = std::max(start, iv[p].end - d.lag * dur[t]);
          }
          if (!ready) break;
          iv[t] = {start, start + dur[t]};
          free_at[static_cast<std::size_t>(dev)][st] = iv[t].end;
          done[t] = 1;
          ++h;
          ++scheduled;
          progress = true;
        }
      }
    }
  }
  if (scheduled != n) throw std::runtime_error("schedule graph has a cycle or an unissued task");
  return iv;
}

inline double task_duration(const Task& t, const HardwareProfile& hw) {
  if (t.stream == Stream::Compute) return t.flops / hw.c_gpu;
  if (t.bytes <= 0.0) return 0.0;
  const double bw = hw.bw(stream_link(hw, t.stream));
  if (std::isinf(bw)) return 0.0;
  return t.bytes / bw;
}

// Peak concurrent buffers per device, as (parameter, gradient).
inline BufferHighWater high_water(const ScheduleGraph& g, const std::vector<Interval>& iv,
                                  const std::vector<double>& dur, int device_filter = -1) {
  BufferHighWater hw;
  for (int dev = 0; dev < g.devices; ++dev) {
    if (device_filter >= 0 && dev != device_filter) continue;
    for (int grad = 0; grad < 2; ++grad) {
      std::vector<std::pair<double, int>> ev;
      for (const BufferLifetime& b : g.buffers) {
        if (b.device != dev || b.gradient != (grad == 1)) continue;
        const auto a = static_cast<std::size_t>(b.acquire_task);
        const double s = iv[a].start + b.acquire_offset * dur[a];
        const double e = iv[static_cast<std::size_t>(b.release_task)].end;
        ev.push_back({s, +1});
        ev.push_back({e, -1});
      }
      // Releases at an instant come before acquisitions.
      std::sort(ev.begin(), ev.end());
      int cur = 0, peak = 0;
      for (const auto& e : ev) {
        cur += e.second;
        peak = std::max(peak, cur);
      }
      if (grad) hw.gradient_buffers = std::max(hw.gradient_buffers, peak);
      else hw.parameter_buffers = std::max(hw.parameter_buffers, peak);
    }
  }
  return hw;
}

}  // namespace detail

inline Timeline simulate(const ScheduleGraph& g, const HardwareProfile& hw) {
  if (!(hw.c_gpu > 0.0)) throw std::invalid_argument("c_gpu must be positive");
  for (double b : hw.bandwidth)
    if (!(b > 0.0)) throw std::invalid_argument("link bandwidths must be positive");
  const std::size_t n = g.tasks.size();
  Timeline tl;
  tl.graph = &g;
  tl.intervals.assign(n, {});
  tl.duration.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Task& t = g.tasks[i];
    tl.duration[i] = detail::task_duration(t, hw);
    if (t.stream == Stream::Compute && !(tl.duration[i] > 0.0))
      throw std::invalid_argument("compute tasks need a positive duration");
  }
  tl.intervals = detail::place(g, tl.duration);

  tl.compute_busy.assign(static_cast<std::size_t>(g.devices), 0.0);
  std::vector<double> compute_end(static_cast<std::size_t>(g.devices), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Task& t = g.tasks[i];
    tl.makespan = std::max(tl.makespan, tl.intervals[i].end);
    tl.busy_time[static_cast<std::size_t>(t.stream)] += tl.duration[i];
    if (t.stream == Stream::Compute) {
      tl.compute_busy[static_cast<std::size_t>(t.device)] += tl.duration[i];
      compute_end[static_cast<std::size_t>(t.device)] =
          std::max(compute_end[static_cast<std::size_t>(t.device)], tl.intervals[i].end);
    }
  }
  tl.idle_fraction.resize(static_cast<std::size_t>(g.devices));
  for (int dev = 0; dev < g.devices; ++dev)
    tl.idle_fraction[static_cast<std::size_t>(dev)] =
        tl.makespan > 0.0 ? 1.0 - tl.compute_busy[static_cast<std::size_t>(dev)] / tl.makespan : 0.0;

  // Bandwidth a stream needs to drain each transfer before the next one
  // becomes ready, measured on a run where transfers are free so that a
  // slow link cannot stretch its own deadlines. The final transfer has
  // until compute ends.
  std::vector<double> free_dur = tl.duration;
  for (std::size_t i = 0; i < n; ++i)
    if (g.tasks[i].stream != Stream::Compute) free_dur[i] = 0.0;
  const std::vector<Interval> ideal = detail::place(g, free_dur);
  std::fill(compute_end.begin(), compute_end.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (g.tasks[i].stream == Stream::Compute) {
      auto& e = compute_end[static_cast<std::size_t>(g.tasks[i].device)];
      e = std::max(e, ideal[i].end);
    }
  auto ready_time = [&](std::size_t t) {
    double r = 0.0;
    for (const Dependency& d : g.tasks[t].deps)
      r = std::max(r, ideal[static_cast<std::size_t>(d.task)].end - d.lag * free_dur[t]);
    return r;
  };
  for (int dev = 0; dev < g.devices; ++dev)
    for (std::size_t st = 1; st < kStreamCount; ++st) {
      const auto& prog = g.program[static_cast<std::size_t>(dev)][st];
      for (std::size_t k = 0; k < prog.size(); ++k) {
        const auto t = static_cast<std::size_t>(prog[k]);
        if (g.tasks[t].bytes <= 0.0) continue;
        const double r0 = ready_time(t);
        const double r1 = k + 1 < prog.size() ? ready_time(static_cast<std::size_t>(prog[k + 1]))
                                              : compute_end[static_cast<std::size_t>(dev)];
        if (r1 - r0 <= 0.0) continue;
        tl.peak_bandwidth[st] = std::max(tl.peak_bandwidth[st], g.tasks[t].bytes / (r1 - r0));
      }
    }
  tl.buffer_high_water = detail::high_water(g, tl.intervals, tl.duration);
  return tl;
}

struct BufferViolation {
  int device = 0;
  bool gradient = false;
  double start = 0.0;
  double end = 0.0;
  int count = 0;
};

struct BufferingReport {
  BufferHighWater high_water;
  bool ok = true;
  std::vector<BufferViolation> violations;
};

inline BufferingReport verify_buffering(const Timeline& tl, int max_parameter = 2, int max_gradient = 1) {
  if (!tl.graph) throw std::invalid_argument("timeline has no schedule graph");
  const ScheduleGraph& g = *tl.graph;
  BufferingReport rep;
  rep.high_water = tl.buffer_high_water;
  for (int dev = 0; dev < g.devices; ++dev)
    for (int grad = 0; grad < 2; ++grad) {
      const int cap = grad ? max_gradient : max_parameter;
      std::vector<std::pair<double, int>> ev;
      for (const BufferLifetime& b : g.buffers) {
        if (b.device != dev || b.gradient != (grad == 1)) continue;
        const auto a = static_cast<std::size_t>(b.acquire_task);
        ev.push_back({tl.intervals[a].start + b.acquire_offset * tl.duration[a], +1});
        ev.push_back({tl.intervals[static_cast<std::size_t>(b.release_task)].end, -1});
      }
      std::sort(ev.begin(), ev.end());
      int cur = 0;
      for (std::size_t i = 0; i < ev.size(); ++i) {
        cur += ev[i].second;
        if (cur > cap && i + 1 < ev.size() && ev[i + 1].first > ev[i].first)
          rep.violations.push_back({dev, grad == 1, ev[i].first, ev[i + 1].first, cur});
      }
    }
  rep.ok = rep.violations.empty();
  return rep;
}

struct DeviationReport {
  double simulated = 0.0;
  double analytical = 0.0;
  double deviation = 0.0;
  double bubble = 0.0;
  bool within_tolerance = true;
  Stream dominating = Stream::Compute;
};

inline double schedule_bubble(const ModelShape& s, const ParallelPlan& plan, ScheduleKind k) {
  const double nl = static_cast<double>(plan.n_l);
  const double nmu = static_cast<double>(plan.n_mu);
  switch (k) {
    case ScheduleKind::StdPipe: return (nl - 1.0) / nmu;
    case ScheduleKind::ModularPipe: return (nl - 1.0) * nl / (nmu * static_cast<double>(s.d_l));
    default: return 0.0;
  }
}

inline DeviationReport compare_to_closed_form(const ModelShape& s, const ParallelPlan& plan, ScheduleKind k,
                                              const HardwareProfile& hw, double tolerance = 0.05) {
  const ScheduleGraph g = build_schedule(s, plan, k);
  const Timeline tl = simulate(g, hw);
  DeviationReport r;
  const double t_compute = batch_flops(s, plan.b()) / (static_cast<double>(plan.n_gpu()) * hw.c_gpu);
  r.bubble = schedule_bubble(s, plan, k);
  r.analytical = t_compute * (1.0 + r.bubble);
  r.simulated = tl.makespan;
  r.deviation = std::abs(r.simulated - r.analytical) / r.analytical;
  r.within_tolerance = r.deviation <= tolerance;
  double worst = tl.busy_time[0];
  for (std::size_t st = 1; st < kStreamCount; ++st)
    if (tl.busy_time[st] > worst) {
      worst = tl.busy_time[st];
      r.dominating = static_cast<Stream>(st);
    }
  return r;
}

// One record per task, ordered by device, stream and start time.
inline void write_trace_csv(std::ostream& os, const ScheduleGraph& g, const Timeline& tl) {
  os << "device,stream,kind,layer,micro_batch,start_s,end_s\n";
  std::vector<std::size_t> order(g.tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Task& x = g.tasks[a];
    const Task& y = g.tasks[b];
    if (x.device != y.device) return x.device < y.device;
    if (x.stream != y.stream) return x.stream < y.stream;
    return tl.intervals[a].start < tl.intervals[b].start;
  });
  os << std::setprecision(9);
  for (std::size_t i : order) {
    const Task& t = g.tasks[i];
    os << t.device << ',' << stream_name(t.stream) << ',' << task_kind_name(t.kind) << ',' << t.layer << ','
       << t.micro_batch << ',' << tl.intervals[i].start << ',' << tl.intervals[i].end << '\n';
  }
}

}  // namespace parascope

#endif  // PARASCOPE_PIPELINE_SIM_HPP
