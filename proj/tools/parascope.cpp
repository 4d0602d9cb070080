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

// parascope: training-plan analysis from the command line.
//
// Exit codes: 0 success, 1 invalid input, 2 infeasible result with --strict.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "parascope/parascope.hpp"

namespace ps = parascope;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kInfeasible = 2;

struct Common {
  std::string config;
  std::optional<std::int64_t> x;
  std::string profile;
  std::vector<std::string> strategies;
  std::string parallelism;
  std::optional<double> epsilon;
  std::optional<double> steps;
  std::optional<std::int64_t> max_gpus;
  std::optional<std::int64_t> max_na;
  std::optional<std::int64_t> min_na;
  std::optional<double> deadline_days;
  bool no_offload = false;
  std::string format = "md";
  bool strict = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_x = true) {
  cmd->add_option("--config", c.config, "Scenario JSON file")->check(CLI::ExistingFile);
  if (with_x) cmd->add_option("--x", c.x, "X-family model index (even, >= 2)");
  cmd->add_option("--profile", c.profile, "Hardware profile: a100-80g-ib, a100-80g-ethernet, a100-80g-unlimited-node, ideal");
  cmd->add_option("--strategy", c.strategies, "baseline, partitioned or improved (repeatable)");
  cmd->add_option("--parallelism", c.parallelism, "none, data, data-pipe, data-tensor, pipe-tensor or 3d");
  cmd->add_option("--epsilon", c.epsilon, "Largest accepted overhead per traffic type");
  cmd->add_option("--steps", c.steps, "Training steps");
  cmd->add_option("--max-gpus", c.max_gpus, "Cluster size cap");
  cmd->add_option("--max-na", c.max_na, "Tensor-parallel degree cap");
  cmd->add_option("--min-na", c.min_na, "Tensor-parallel degree floor");
  cmd->add_option("--deadline-days", c.deadline_days, "Find the smallest cluster meeting this deadline");
  cmd->add_flag("--no-offload", c.no_offload, "Forbid state and checkpoint offload");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"md", "csv"}));
  cmd->add_flag("--strict", c.strict, "Exit with code 2 when a result is infeasible");
}

ps::Scenario resolve(const Common& c) {
  ps::Scenario sc = c.config.empty() ? ps::Scenario{} : ps::load_scenario(c.config);
  if (c.x) sc.model = ps::make_x_model(*c.x);
  if (!c.profile.empty()) sc.profile = ps::builtin_profile(c.profile);
  if (!c.strategies.empty()) {
    sc.strategies.clear();
    for (const auto& s : c.strategies) sc.strategies.push_back(ps::strategy_from_name(s));
  }
  if (!c.parallelism.empty()) {
    ps::caps_from_name(c.parallelism);
    sc.parallelism = c.parallelism;
  }
  if (c.epsilon) sc.constraints.epsilon = *c.epsilon;
  if (c.steps) sc.constraints.steps = *c.steps;
  if (c.max_gpus) sc.constraints.max_gpus = *c.max_gpus;
  if (c.max_na) sc.max_na = *c.max_na;
  if (c.min_na) sc.min_na = *c.min_na;
  if (c.deadline_days) sc.deadline_days = *c.deadline_days;
  if (c.no_offload) sc.constraints.allow_offload = false;
  sc.constraints.validate();
  return sc;
}

ps::TableFormat format_of(const Common& c) { return c.format == "csv" ? ps::TableFormat::Csv : ps::TableFormat::Markdown; }

// Named rows of the fastest-configuration table, e.g. "3d-improved".
std::optional<ps::ConfigurationRow> preset(const std::string& name) {
  for (const auto& r : ps::published_speed_rows()) {
    const std::string key = r.caps + "-" + std::string(ps::strategy_name(r.strategy));
    if (key == name || (name == "none" && r.caps == "none")) return r;
  }
  return std::nullopt;
}

std::string preset_names() {
  std::string out;
  for (const auto& r : ps::published_speed_rows())
    out += (out.empty() ? "" : ", ") + r.caps + "-" + std::string(ps::strategy_name(r.strategy));
  return out;
}

struct PlanArgs {
  std::string preset;
  std::optional<std::int64_t> n_b, n_l, n_a, n_mu, b_mu;
  bool offload_state = false, offload_ckpt = false, no_overlap = false;
};

int cmd_analyze(const Common& c, const PlanArgs& a) {
  const ps::Scenario sc = resolve(c);
  ps::PlanEvaluation ev;
  if (!a.preset.empty()) {
    const auto row = preset(a.preset);
    if (!row) throw std::invalid_argument("unknown plan preset '" + a.preset + "'; known: " + preset_names());
    ps::OptimizerConstraints k = ps::row_constraints(row->caps, std::nullopt, sc.constraints);
    ev = ps::fastest_plan(sc.model, sc.profile, row->strategy, k);
  } else {
    if (!a.n_b && !a.n_l && !a.n_a && !a.n_mu && !a.b_mu)
      throw std::invalid_argument("analyze needs --plan or explicit plan degrees (--nb --nl --na --nmu --bmu)");
    ps::ParallelPlan p = ps::make_plan(sc.strategies.front(), a.n_b.value_or(1), a.n_l.value_or(1), a.n_a.value_or(1),
                                       a.n_mu.value_or(1), a.b_mu.value_or(1), a.offload_state, a.offload_ckpt);
    if (a.no_overlap) p.overlap_pipeline = false;
    ev = ps::evaluate(sc.model, p, sc.profile, sc.constraints);
  }
  ps::render(std::cout, ps::resource_table(sc.model, sc.profile, ev), format_of(c));
  return c.strict && !ev.feasible ? kInfeasible : kOk;
}

int cmd_optimize(const Common& c) {
  const ps::Scenario sc = resolve(c);
  const ps::OptimizerConstraints k = ps::effective_constraints(sc);
  const std::string label = sc.parallelism;
  std::vector<ps::PlanEvaluation> evs;
  for (ps::Strategy st : sc.strategies) {
    if (sc.deadline_days)
      evs.push_back(ps::min_cluster_for_deadline(sc.model, sc.profile, st, *sc.deadline_days * ps::kDay, k));
    else
      evs.push_back(ps::fastest_plan(sc.model, sc.profile, st, k));
  }
  const std::string what = sc.deadline_days ? "Smallest cluster" : "Fastest configuration";
  ps::Table plans = ps::plan_table(what + " for " + sc.model.name + " on " + sc.profile.name);
  ps::Table mem = ps::memory_table("Memory per GPU (GiB)");
  bool infeasible = false;
  for (const auto& ev : evs) {
    plans.rows.push_back(ps::plan_row(label, ev));
    if (ev.feasible) mem.rows.push_back(ps::memory_row(label, ev));
    infeasible = infeasible || !ev.feasible;
  }
  ps::render(std::cout, plans, format_of(c));
  if (format_of(c) == ps::TableFormat::Markdown) ps::render(std::cout, mem, format_of(c));
  return c.strict && infeasible ? kInfeasible : kOk;
}

// "a..b", "a..b:step" or a single index.
std::vector<std::int64_t> parse_range(const std::string& text, std::int64_t default_step) {
  std::int64_t lo = 0, hi = 0, step = default_step;
  const auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoll(text);
    } else {
      lo = std::stoll(text.substr(0, dots));
      std::string rest = text.substr(dots + 2);
      const auto colon = rest.find(':');
      if (colon != std::string::npos) {
        step = std::stoll(rest.substr(colon + 1));
        rest = rest.substr(0, colon);
      }
      hi = std::stoll(rest);
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("invalid range '" + text + "'");
  }
  if (step < 2 || step % 2 != 0) throw std::invalid_argument("range step must be a positive even integer");
  std::vector<std::int64_t> xs;
  for (std::int64_t x = lo; x <= hi; x += step) xs.push_back(x);
  if (xs.empty()) throw std::invalid_argument("sweep range is empty");
  for (std::int64_t x : xs) ps::make_x_model(x);
  return xs;
}

int cmd_sweep(const Common& c, const std::string& range) {
  ps::Scenario sc = resolve(c);
  const std::vector<std::int64_t> xs =
      range.empty() ? parse_range(std::to_string(sc.x_min) + ".." + std::to_string(sc.x_max), sc.x_step)
                    : parse_range(range, sc.x_step);
  const ps::SweepResult r = ps::scaling_sweep(xs, sc.profile, sc.strategies, ps::effective_constraints(sc));
  ps::render(std::cout, ps::sweep_table(r, sc.profile), format_of(c));
  if (format_of(c) == ps::TableFormat::Markdown) ps::render(std::cout, ps::sweep_limits_table(r), format_of(c));
  bool infeasible = false;
  for (const auto& pt : r.points)
    for (const auto& ev : pt.per_strategy) infeasible = infeasible || !ev.feasible;
  return c.strict && infeasible ? kInfeasible : kOk;
}

struct SimArgs {
  std::int64_t n_b = 1, n_l = 1, n_a = 1, n_mu = 1, b_mu = 1;
  std::vector<std::string> schedules;
  std::string trace;
  bool offload_ckpt = false;
};

int cmd_simulate(const Common& c, const SimArgs& a) {
  Common cc = c;
  if (!cc.x && cc.config.empty()) cc.x = 8;
  if (cc.profile.empty() && cc.config.empty()) cc.profile = "ideal";
  const ps::Scenario sc = resolve(cc);
  std::vector<ps::ScheduleKind> kinds;
  for (const auto& s : a.schedules) kinds.push_back(ps::schedule_from_name(s));
  if (kinds.empty())
    for (ps::ScheduleKind k : ps::kAllSchedules)
      if (a.n_l == 1 || (k != ps::ScheduleKind::StdGA && k != ps::ScheduleKind::LayeredGA)) kinds.push_back(k);
  ps::ParallelPlan p = ps::make_plan(sc.strategies.front(), a.n_b, a.n_l, a.n_a, std::max(a.n_mu, a.n_l), a.b_mu,
                                     false, a.offload_ckpt);
  std::vector<ps::ScheduleGraph> graphs;
  graphs.reserve(kinds.size());
  std::vector<std::pair<ps::ScheduleKind, ps::Timeline>> runs;
  std::vector<ps::DeviationReport> devs;
  for (ps::ScheduleKind k : kinds) {
    graphs.push_back(ps::build_schedule(sc.model, p, k));
    runs.emplace_back(k, ps::simulate(graphs.back(), sc.profile));
    devs.push_back(ps::compare_to_closed_form(sc.model, p, k, sc.profile));
  }
  ps::render(std::cout, ps::simulation_summary(runs, devs), format_of(c));
  if (!a.trace.empty()) {
    std::ofstream out(a.trace);
    if (!out) throw std::invalid_argument("cannot write trace file: " + a.trace);
    for (std::size_t i = 0; i < runs.size(); ++i) {
      out << "# schedule " << ps::schedule_name(runs[i].first) << '\n';
      ps::write_trace_csv(out, graphs[i], runs[i].second);
    }
  }
  return kOk;
}

int cmd_reproduce(const Common& c, const std::string& id) {
  const ps::Scenario sc = resolve(c);
  std::vector<std::string> ids = id == "all" ? ps::reproduce_ids() : std::vector<std::string>{id};
  bool ok = true;
  for (const auto& one : ids) {
    const ps::Reproduction r = ps::reproduce(one, sc.profile);
    ps::render(std::cout, r.table, format_of(c));
    if (format_of(c) == ps::TableFormat::Markdown)
      ps::render(std::cout, ps::checks_table("Comparison with published values", r.checks), format_of(c));
    ok = ok && r.ok();
  }
  return c.strict && !ok ? kInfeasible : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parascope: memory, time and cluster-size estimates for large transformer training"};
  app.require_subcommand(1);

  Common common;
  PlanArgs plan;
  auto* analyze = app.add_subcommand("analyze", "Resource report for one plan");
  add_common(analyze, common);
  analyze->add_option("--plan", plan.preset, "Preset such as 3d-improved or none");
  analyze->add_option("--nb", plan.n_b, "Data-parallel degree");
  analyze->add_option("--nl", plan.n_l, "Pipeline degree");
  analyze->add_option("--na", plan.n_a, "Tensor-parallel degree");
  analyze->add_option("--nmu", plan.n_mu, "Micro-batches per step");
  analyze->add_option("--bmu", plan.b_mu, "Micro-batch size");
  analyze->add_flag("--offload-state", plan.offload_state, "Offload the training state");
  analyze->add_flag("--offload-checkpoints", plan.offload_ckpt, "Offload activation checkpoints");
  analyze->add_flag("--no-overlap-pipeline", plan.no_overlap, "Charge pipeline transfers instead of hiding them");

  auto* optimize = app.add_subcommand("optimize", "Fastest plan, or smallest cluster for a deadline");
  add_common(optimize, common);

  std::string range;
  auto* sweep = app.add_subcommand("sweep", "Fastest plans across the X family");
  add_common(sweep, common, false);
  sweep->add_option("--x", range, "Index range a..b[:step] or a single index");

  SimArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Event simulation of the four schedules");
  add_common(simulate, common);
  simulate->add_option("--nb", sim.n_b, "Data-parallel degree");
  simulate->add_option("--nl", sim.n_l, "Pipeline degree");
  simulate->add_option("--na", sim.n_a, "Tensor-parallel degree");
  simulate->add_option("--nmu", sim.n_mu, "Micro-batches per step");
  simulate->add_option("--bmu", sim.b_mu, "Micro-batch size");
  simulate->add_option("--schedule", sim.schedules, "std-ga, layered-ga, std-pipe or modular-pipe (repeatable)");
  simulate->add_option("--trace", sim.trace, "Write a per-task CSV trace");
  simulate->add_flag("--offload-checkpoints", sim.offload_ckpt, "Stream checkpoints to the host");

  std::string table_id;
  auto* reproduce = app.add_subcommand("reproduce", "Regenerate a reference table next to the published values");
  add_common(reproduce, common, false);
  reproduce->add_option("table", table_id, "models, hardware, speed, memory, clusters or all")
      ->required()
      ->check(CLI::IsMember({"models", "hardware", "speed", "memory", "clusters", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }

  try {
    if (*analyze) return cmd_analyze(common, plan);
    if (*optimize) return cmd_optimize(common);
    if (*sweep) return cmd_sweep(common, range);
    if (*simulate) return cmd_simulate(common, sim);
    if (*reproduce) return cmd_reproduce(common, table_id);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
