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

#ifndef PARASCOPE_REPORT_HPP
#define PARASCOPE_REPORT_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parascope/cost_model.hpp"
#include "parascope/hardware_model.hpp"
#include "parascope/model_config.hpp"
#include "parascope/pipeline_sim.hpp"
#include "parascope/plan_optimizer.hpp"

namespace parascope {

enum class TableFormat { Markdown, Csv };

struct Table {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::string csv_escape(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void render(std::ostream& os, const Table& t, TableFormat f) {
  if (f == TableFormat::Csv) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_escape(t.columns[i]);
    os << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_escape(r[i]);
      os << '\n';
    }
    return;
  }
  if (!t.title.empty()) os << "### " << t.title << "\n\n";
  os << '|';
  for (const auto& c : t.columns) os << ' ' << c << " |";
  os << "\n|";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << "---|";
  os << '\n';
  for (const auto& r : t.rows) {
    os << '|';
    for (const auto& v : r) os << ' ' << v << " |";
    os << '\n';
  }
  os << '\n';
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Three significant figures, as in the published tables.
inline std::string sig3(double v) {
  if (v == 0.0) return "0";
  if (!std::isfinite(v)) return "inf";
  const int mag = static_cast<int>(std::floor(std::log10(std::abs(v))));
  return fixed(v, std::max(0, 2 - mag));
}

inline std::string format_gib(double bytes) {
  const double g = bytes / kGiB;
  if (g >= 1000.0) return sig3(g / 1000.0) + " K";
  return sig3(g);
}

// Days below a year, years above; one decimal below ten. Runs shorter
// than a tenth of a day are shown in seconds.
inline std::string format_duration(double seconds) {
  if (!std::isfinite(seconds)) return "inf";
  if (seconds < 0.1 * kDay) return sig3(seconds) + " s";
  if (seconds < kYear) {
    const double d = seconds / kDay;
    return (d < 10.0 ? fixed(d, 1) : fixed(d, 0)) + " d";
  }
  const double y = seconds / kYear;
  return (y < 10.0 ? fixed(y, 1) : fixed(y, 0)) + " y";
}

inline std::string format_count(double v) {
  if (v >= 1e12) return sig3(v / 1e12) + " T";
  if (v >= 1e9) return sig3(v / 1e9) + " B";
  if (v >= 1e6) return sig3(v / 1e6) + " M";
  return fixed(v, 0);
}

inline std::string format_intensity(double v) {
  if (v >= 1e6) return sig3(v / 1e6) + " M";
  if (v >= 1e3) return sig3(v / 1e3) + " k";
  return sig3(v);
}

// One reproduced cell set against its published value.
struct CellCheck {
  std::string row;
  std::string column;
  double computed = 0.0;
  double published = 0.0;
  double tolerance = 0.0;  // negative: informational only
  bool absolute = false;

  double deviation() const {
    if (absolute) return computed - published;
    return published != 0.0 ? (computed - published) / published : 0.0;
  }
  bool gated() const { return tolerance >= 0.0; }
  bool ok() const { return !gated() || std::abs(deviation()) <= tolerance + 1e-12; }
};

struct Reproduction {
  Table table;
  std::vector<CellCheck> checks;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.ok()) return false;
    return true;
  }
};

inline std::string deviation_text(const CellCheck& c) {
  const double d = c.deviation();
  std::string s = c.absolute ? (d >= 0 ? "+" : "") + fixed(d, 3) : (d >= 0 ? "+" : "") + fixed(100.0 * d, 1) + "%";
  if (!c.ok()) s += " !";
  return s;
}

inline Table checks_table(const std::string& title, const std::vector<CellCheck>& checks) {
  Table t{title, {"Row", "Column", "Computed", "Published", "Deviation", "Tolerance"}, {}};
  for (const auto& c : checks)
    t.rows.push_back({c.row, c.column, sig3(c.computed), sig3(c.published), deviation_text(c),
                      c.gated() ? (c.absolute ? "±" + fixed(c.tolerance, 2) : "±" + fixed(100 * c.tolerance, 0) + "%")
                                : "-"});
  return t;
}

// ---------------------------------------------------------------------------
// Model table

struct PublishedModel {
  std::string name;
  std::int64_t d_l, d_a, d_h, d_s;
  double p;
  double b_c;
};

inline const std::vector<PublishedModel>& published_models() {
  static const std::vector<PublishedModel> v = {
      {"X_2", 2, 1, 4, 32, 488, 130},
      {"BERT", 24, 16, 64, 512, 301e6, 751},
      {"X_32", 32, 16, 64, 512, 403e6, 826},
      {"Megatron-LM", 72, 32, 96, 1024, 8.15e9, 1130},
      {"X_64", 64, 32, 128, 1024, 12.9e9, 1310},
      {"T-NLG", 78, 28, 152, 1024, 17.0e9, 1440},
      {"GPT-3", 96, 96, 128, 2048, 174e9, 1560},
      {"X_108", 108, 54, 216, 1728, 176e9, 1860},
      {"X_160", 160, 80, 320, 2560, 1.26e12, 2420},
  };
  return v;
}

inline Reproduction reproduce_models() {
  Reproduction r;
  r.table = {"Model configurations", {"Model", "p", "b_c", "d_s", "d_a", "d_h", "d_m", "d_l"}, {}};
  for (const auto& m : published_models()) {
    const ModelShape s = make_shape(m.d_l, m.d_a, m.d_h, m.d_s, 4, m.name);
    const double p = static_cast<double>(param_count(s));
    const double bc = critical_batch(s);
    r.table.rows.push_back({m.name, format_count(p), fixed(bc, 0), std::to_string(s.d_s), std::to_string(s.d_a),
                            std::to_string(s.d_h), std::to_string(s.d_m), std::to_string(s.d_l)});
    // Published figures carry three significant digits.
    r.checks.push_back({m.name, "p", p, m.p, 0.01, false});
    r.checks.push_back({m.name, "b_c", bc, m.b_c, 0.01, false});
    if (m.name.rfind("X_", 0) == 0) {
      const ModelShape x = make_x_model(m.d_l);
      r.checks.push_back({m.name, "shape", x == s ? 1.0 : 0.0, 1.0, 0.0, true});
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Hardware table

inline Reproduction reproduce_hardware(const HardwareProfile& hw = default_a100_profile()) {
  static const std::array<double, kLinkCount> published = {143, 484, 4.61e3, 5.81e3, 9.22e3, 46.5e3, 90.8e3, 2.91e6};
  Reproduction r;
  r.table = {"Bandwidth and intensity thresholds", {"Link", "Bandwidth (GB/s)", "Threshold (flops/B)"}, {}};
  for (LinkClass l : kAllLinks) {
    const double thr = intensity_threshold(hw, l);
    r.table.rows.push_back({std::string(link_name(l)), sig3(hw.bw(l) / kGiB), format_intensity(thr)});
    r.checks.push_back({std::string(link_name(l)), "threshold", thr, published[static_cast<std::size_t>(l)], 0.01,
                        false});
  }
  return r;
}

// ---------------------------------------------------------------------------
// X_160 configurations

struct ConfigurationRow {
  std::string parallelism;  // display label
  std::string caps;         // caps_from_name key
  Strategy strategy;
  // Published values.
  std::int64_t b;
  std::int64_t n_gpu;
  std::int64_t n_a;
  double efficiency;
  double time_days;
  double offloadable_gib;
  double non_offloadable_gib;
};

struct MemoryRowPublished {
  double state, checkpoint, buffers, activations, offloadable, non_offloadable;  // GiB
};

inline const std::vector<ConfigurationRow>& published_speed_rows() {
  static const std::vector<ConfigurationRow> v = {
      {"None", "none", Strategy::Baseline, 2416, 1, 1, 1.00, 630 * 365.0, 61.2e3, 68.8},
      {"Data", "data", Strategy::Baseline, 2415, 483, 1, 1.00, 1.3 * 365.0, 14.2e3, 75.1},
      {"Data", "data", Strategy::Partitioned, 2415, 483, 1, 1.00, 1.3 * 365.0, 127, 75.1},
      {"Data + pipe", "data-pipe", Strategy::Baseline, 2412, 480, 1, 0.56, 2.4 * 365.0, 186, 68.8},
      {"Data + pipe", "data-pipe", Strategy::Improved, 2415, 2415, 1, 0.94, 100, 25.4, 50.2},
      {"Data + tensor", "data-tensor", Strategy::Baseline, 2415, 7728, 16, 0.93, 32, 885, 4.69},
      {"Data + tensor", "data-tensor", Strategy::Partitioned, 2415, 7728, 16, 0.93, 32, 7.92, 4.69},
      {"3d", "3d", Strategy::Baseline, 2408, 35840, 16, 0.48, 13, 6.81, 3.14},
      {"3d", "3d", Strategy::Improved, 2415, 38640, 16, 0.88, 6.8, 1.58, 3.14},
  };
  return v;
}

inline const std::vector<MemoryRowPublished>& published_memory_rows() {
  static const std::vector<MemoryRowPublished> v = {
      {14.1e3, 47.2e3, 43.9, 24.9, 61.2e3, 68.8}, {14.1e3, 97.7, 43.9, 31.1, 14.2e3, 75.1},
      {29.1, 97.7, 43.9, 31.1, 127, 75.1},         {87.9, 98.1, 43.9, 24.9, 186, 68.8},
      {5.82, 19.5, 43.9, 6.23, 25.4, 50.2},        {879, 6.10, 2.75, 1.95, 885, 4.69},
      {1.82, 6.10, 2.75, 1.95, 7.92, 4.69},        {5.49, 1.31, 2.75, 0.389, 6.81, 3.14},
      {0.364, 1.22, 2.75, 0.389, 1.58, 3.14},
  };
  return v;
}

struct DeadlineRow {
  ConfigurationRow published;
  double deadline_days;
  std::optional<std::int64_t> fixed_na;
};

// The last three rows pin the tensor degree they illustrate.
inline const std::vector<DeadlineRow>& published_deadline_rows() {
  static const std::vector<DeadlineRow> v = {
      {{"Data + tensor", "data-tensor", Strategy::Partitioned, 2415, 7728, 16, 0.93, 32, 7.92, 4.69}, 32, {}},
      {{"3d", "3d", Strategy::Baseline, 2416, 10240, 16, 0.73, 31, 10.1, 3.14}, 31, {}},
      {{"3d", "3d", Strategy::Improved, 2220, 7400, 4, 0.97, 32, 7.76, 12.5}, 32, {}},
      {{"Data + tensor", "data-tensor", Strategy::Partitioned, 1660, 1328, 8, 0.97, 180, 35.0, 9.38}, 180, {}},
      {{"Pipe + tensor", "pipe-tensor", Strategy::Baseline, 2416, 1280, 8, 0.91, 199, 47.9, 6.27}, 199, {}},
      {{"3d", "3d", Strategy::Improved, 792, 1320, 2, 0.97, 180, 22.4, 25.1}, 180, 2},
      {{"Data + pipe", "data-pipe", Strategy::Improved, 1572, 1310, 1, 0.98, 180, 34.2, 50.2}, 180, 1},
      {{"3d", "3d", Strategy::Improved, 102, 1360, 16, 0.91, 186, 11.8, 3.14}, 186, 16},
  };
  return v;
}

// Published times are rounded to whole days; deadlines get half a day.
inline constexpr double kDeadlineSlackDays = 0.5;

inline OptimizerConstraints row_constraints(const std::string& caps, std::optional<std::int64_t> fixed_na = {},
                                            OptimizerConstraints base = {}) {
  base.caps = caps_from_name(caps);
  if (fixed_na) {
    base.caps.max_na = *fixed_na;
    base.caps.min_na = *fixed_na;
  }
  return base;
}

inline Table plan_table(const std::string& title) {
  return {title,
          {"Parallelism", "Method", "Offload", "b", "b_mu", "n_mu", "n_gpu", "n_b", "n_l", "n_a", "Efficiency",
           "Time"},
          {}};
}

inline std::vector<std::string> plan_row(const std::string& parallelism, const PlanEvaluation& ev) {
  const ParallelPlan& p = ev.plan;
  if (!ev.feasible)
    return {parallelism, std::string(strategy_name(p.strategy)), "-", "-", "-", "-", "-", "-", "-", "-", "-",
            "infeasible"};
  std::string off = "no";
  if (p.offload_state && p.offload_checkpoints) off = "state+ckpt";
  else if (p.offload_state) off = "state";
  else if (p.offload_checkpoints) off = "ckpt";
  return {parallelism,
          std::string(strategy_name(p.strategy)),
          off,
          std::to_string(p.b()),
          std::to_string(p.b_mu),
          std::to_string(p.n_mu),
          std::to_string(p.n_gpu()),
          std::to_string(p.n_b),
          std::to_string(p.n_l),
          std::to_string(p.n_a),
          fixed(ev.efficiency, 2),
          format_duration(ev.training_time)};
}

inline Table memory_table(const std::string& title) {
  return {title,
          {"Parallelism", "Method", "State", "Checkpoint", "Buffers", "Activations", "Offloadable",
           "Non-offloadable"},
          {}};
}

inline std::vector<std::string> memory_row(const std::string& parallelism, const PlanEvaluation& ev) {
  const MemoryBreakdown& m = ev.memory;
  return {parallelism,         std::string(strategy_name(ev.plan.strategy)), format_gib(m.state),
          format_gib(m.checkpoints), format_gib(m.buffers), format_gib(m.layer_activations),
          format_gib(m.offloadable), format_gib(m.non_offloadable)};
}

inline std::string row_label(const ConfigurationRow& r) {
  return r.parallelism + " / " + std::string(strategy_name(r.strategy));
}

inline std::vector<PlanEvaluation> speed_plans(const HardwareProfile& hw = default_a100_profile()) {
  const ModelShape s = make_x_model(160);
  std::vector<PlanEvaluation> out;
  for (const auto& r : published_speed_rows())
    out.push_back(fastest_plan(s, hw, r.strategy, row_constraints(r.caps)));
  return out;
}

inline Reproduction reproduce_speed(const HardwareProfile& hw = default_a100_profile()) {
  Reproduction r;
  r.table = plan_table("Fastest configuration for X_160");
  const auto plans = speed_plans(hw);
  const auto& rows = published_speed_rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& pub = rows[i];
    const auto& ev = plans[i];
    r.table.rows.push_back(plan_row(pub.parallelism, ev));
    const std::string label = row_label(pub);
    r.checks.push_back({label, "feasible", ev.feasible ? 1.0 : 0.0, 1.0, 0.0, true});
    r.checks.push_back({label, "efficiency", ev.efficiency, pub.efficiency, 0.05, true});
    r.checks.push_back({label, "n_gpu", static_cast<double>(ev.plan.n_gpu()), static_cast<double>(pub.n_gpu), 0.05,
                        false});
    r.checks.push_back({label, "time_days", ev.training_time / kDay, pub.time_days, 0.15, false});
  }
  return r;
}

inline Reproduction reproduce_memory(const HardwareProfile& hw = default_a100_profile()) {
  Reproduction r;
  r.table = memory_table("Memory per GPU (GiB) for the fastest X_160 configurations");
  const auto plans = speed_plans(hw);
  const auto& rows = published_speed_rows();
  const auto& mem = published_memory_rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& m = plans[i].memory;
    const auto& pub = mem[i];
    const std::string label = row_label(rows[i]);
    r.table.rows.push_back(memory_row(rows[i].parallelism, plans[i]));
    r.checks.push_back({label, "state", m.state / kGiB, pub.state, 0.05, false});
    r.checks.push_back({label, "checkpoint", m.checkpoints / kGiB, pub.checkpoint, 0.05, false});
    r.checks.push_back({label, "buffers", m.buffers / kGiB, pub.buffers, 0.05, false});
    r.checks.push_back({label, "activations", m.layer_activations / kGiB, pub.activations, 0.10, false});
    r.checks.push_back({label, "offloadable", m.offloadable / kGiB, pub.offloadable, 0.05, false});
    r.checks.push_back({label, "non_offloadable", m.non_offloadable / kGiB, pub.non_offloadable, 0.05, false});
  }
  return r;
}

inline std::vector<PlanEvaluation> deadline_plans(const HardwareProfile& hw = default_a100_profile()) {
  const ModelShape s = make_x_model(160);
  std::vector<PlanEvaluation> out;
  for (const auto& d : published_deadline_rows())
    out.push_back(min_cluster_for_deadline(s, hw, d.published.strategy,
                                           (d.deadline_days + kDeadlineSlackDays) * kDay,
                                           row_constraints(d.published.caps, d.fixed_na)));
  return out;
}

inline Reproduction reproduce_clusters(const HardwareProfile& hw = default_a100_profile()) {
  Reproduction r;
  r.table = {"Smallest X_160 cluster per deadline",
             {"Parallelism", "Method", "Deadline", "b", "n_a", "n_gpu", "Offloadable", "Non-offloadable",
              "Efficiency", "Time"},
             {}};
  const auto plans = deadline_plans(hw);
  const auto& rows = published_deadline_rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& d = rows[i];
    const auto& ev = plans[i];
    const std::string label = row_label(d.published) + " / " + fixed(d.deadline_days, 0) + " d";
    if (ev.feasible) {
      r.table.rows.push_back({d.published.parallelism, std::string(strategy_name(d.published.strategy)),
                              fixed(d.deadline_days, 0) + " d", std::to_string(ev.plan.b()),
                              std::to_string(ev.plan.n_a), std::to_string(ev.plan.n_gpu()),
                              format_gib(ev.memory.offloadable), format_gib(ev.memory.non_offloadable),
                              fixed(ev.efficiency, 2), format_duration(ev.training_time)});
    } else {
      r.table.rows.push_back({d.published.parallelism, std::string(strategy_name(d.published.strategy)),
                              fixed(d.deadline_days, 0) + " d", "-", "-", "-", "-", "-", "-", "infeasible"});
    }
    const bool improved = d.published.strategy == Strategy::Improved;
    r.checks.push_back({label, "feasible", ev.feasible ? 1.0 : 0.0, 1.0, 0.0, true});
    r.checks.push_back({label, "n_gpu", static_cast<double>(ev.plan.n_gpu()), static_cast<double>(d.published.n_gpu),
                        0.10, false});
    r.checks.push_back({label, "b", static_cast<double>(ev.plan.b()), static_cast<double>(d.published.b),
                        improved ? 0.10 : -1.0, false});
    r.checks.push_back({label, "efficiency", ev.efficiency, d.published.efficiency, -1.0, true});
  }
  return r;
}

inline const std::vector<std::string>& reproduce_ids() {
  static const std::vector<std::string> ids = {"models", "hardware", "speed", "memory", "clusters"};
  return ids;
}

inline Reproduction reproduce(std::string_view id, const HardwareProfile& hw = default_a100_profile()) {
  if (id == "models") return reproduce_models();
  if (id == "hardware") return reproduce_hardware(hw);
  if (id == "speed") return reproduce_speed(hw);
  if (id == "memory") return reproduce_memory(hw);
  if (id == "clusters") return reproduce_clusters(hw);
  throw std::invalid_argument("unknown table id: " + std::string(id));
}

// ---------------------------------------------------------------------------
// Single plan and sweep output

inline Table resource_table(const ModelShape& s, const HardwareProfile& hw, const PlanEvaluation& ev) {
  Table t{"Resources for " + (s.name.empty() ? std::string("model") : s.name) + " on " + hw.name, {"Field", "Value"},
          {}};
  const ParallelPlan& p = ev.plan;
  auto add = [&](std::string k, std::string v) { t.rows.push_back({std::move(k), std::move(v)}); };
  add("strategy", std::string(strategy_name(p.strategy)));
  add("plan", "n_b=" + std::to_string(p.n_b) + " n_l=" + std::to_string(p.n_l) + " n_a=" + std::to_string(p.n_a) +
                  " n_mu=" + std::to_string(p.n_mu) + " b_mu=" + std::to_string(p.b_mu));
  add("b", std::to_string(p.b()));
  add("n_gpu", std::to_string(p.n_gpu()));
  add("offload_state", p.offload_state ? "yes" : "no");
  add("offload_checkpoints", p.offload_checkpoints ? "yes" : "no");
  add("state", format_gib(ev.memory.state));
  add("checkpoint", format_gib(ev.memory.checkpoints));
  add("buffers", format_gib(ev.memory.buffers));
  add("activations", format_gib(ev.memory.layer_activations));
  add("offloadable", format_gib(ev.memory.offloadable));
  add("non_offloadable", format_gib(ev.memory.non_offloadable));
  add("gpu_resident", format_gib(ev.memory.gpu_resident));
  auto opt = [&](const char* k, const std::optional<double>& v) { add(k, v ? format_intensity(*v) : "-"); };
  opt("nu_b", ev.intensities.nu_b);
  opt("nu_l", ev.intensities.nu_l);
  opt("nu_a", ev.intensities.nu_a);
  opt("nu_s", ev.intensities.nu_s);
  opt("nu_c", ev.intensities.nu_c);
  for (const auto& tc : ev.traffic)
    add("overhead_" + std::string(traffic_name(tc.kind)),
        fixed(tc.overhead, 4) + " via " + std::string(link_name(tc.link)) + (tc.ok ? "" : " (violation)"));
  add("bubble", fixed(ev.bubble, 4));
  add("efficiency", fixed(ev.efficiency, 3));
  add("time", format_duration(ev.training_time));
  add("feasible", ev.feasible ? "yes" : "no");
  for (const auto& v : ev.violations) add("violation", v);
  return t;
}

inline Table sweep_table(const SweepResult& r, const HardwareProfile& hw) {
  Table t{"Scaling sweep on " + hw.name,
          {"x", "p", "strategy", "feasible", "n_gpu", "time_days", "mem_offloadable_gib", "mem_nonoffloadable_gib",
           "nu_s", "nu_c", "mem_to_compute_ratio"},
          {}};
  for (const auto& pt : r.points) {
    const double p = static_cast<double>(param_count(make_x_model(pt.x)));
    for (std::size_t k = 0; k < r.strategies.size(); ++k) {
      const auto& ev = pt.per_strategy[k];
      const bool last = k + 1 == r.strategies.size();
      auto num = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
      };
      if (!ev.feasible) {
        t.rows.push_back({std::to_string(pt.x), num(p), std::string(strategy_name(r.strategies[k])), "0", "", "", "",
                          "", "", "", ""});
        continue;
      }
      t.rows.push_back({std::to_string(pt.x), num(p), std::string(strategy_name(r.strategies[k])), "1",
                        std::to_string(ev.plan.n_gpu()), num(ev.training_time / kDay),
                        num(ev.memory.offloadable / kGiB), num(ev.memory.non_offloadable / kGiB),
                        ev.intensities.nu_s ? num(*ev.intensities.nu_s) : "",
                        ev.intensities.nu_c ? num(*ev.intensities.nu_c) : "", last ? num(pt.memory_to_compute) : ""});
    }
  }
  return t;
}

inline Table sweep_limits_table(const SweepResult& r) {
  Table t{"Largest trainable model per period", {"strategy", "month_x", "month_p", "year_x", "year_p"}, {}};
  for (std::size_t k = 0; k < r.strategies.size(); ++k) {
    auto cell = [](const std::optional<std::int64_t>& x, bool params) {
      if (!x) return std::string("-");
      return params ? format_count(static_cast<double>(param_count(make_x_model(*x)))) : std::to_string(*x);
    };
    t.rows.push_back({std::string(strategy_name(r.strategies[k])), cell(r.month_limit_x[k], false),
                      cell(r.month_limit_x[k], true), cell(r.year_limit_x[k], false), cell(r.year_limit_x[k], true)});
  }
  return t;
}

inline Table simulation_summary(const std::vector<std::pair<ScheduleKind, Timeline>>& runs,
                                const std::vector<DeviationReport>& dev) {
  Table t{"Schedule simulation",
          {"schedule", "makespan_s", "idle_fraction", "closed_form_s", "deviation", "peak_bw_data_net",
           "peak_bw_pipe_net", "peak_bw_host_link", "param_buffers", "grad_buffers"},
          {}};
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Timeline& tl = runs[i].second;
    double idle = 0.0;
    for (double f : tl.idle_fraction) idle = std::max(idle, f);
    std::string d = num(dev[i].deviation);
    if (!dev[i].within_tolerance) d += " (" + std::string(stream_name(dev[i].dominating)) + "-bound)";
    t.rows.push_back({std::string(schedule_name(runs[i].first)), num(tl.makespan), num(idle), num(dev[i].analytical),
                      d, num(tl.peak_bandwidth[1]), num(tl.peak_bandwidth[2]), num(tl.peak_bandwidth[3]),
                      std::to_string(tl.buffer_high_water.parameter_buffers),
                      std::to_string(tl.buffer_high_water.gradient_buffers)});
  }
  return t;
}

}  // namespace parascope

#endif  // PARASCOPE_REPORT_HPP
