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

#ifndef PARASCOPE_CONFIG_HPP
#define PARASCOPE_CONFIG_HPP

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "parascope/cost_model.hpp"
#include "parascope/hardware_model.hpp"
#include "parascope/model_config.hpp"
#include "parascope/plan_optimizer.hpp"

namespace parascope {

// Scenario file contents. Absent fields keep their defaults.
struct Scenario {
  ModelShape model = make_x_model(160);
  HardwareProfile profile = default_a100_profile();
  std::vector<Strategy> strategies = {Strategy::Improved};
  std::string parallelism = "3d";
  OptimizerConstraints constraints;
  std::optional<double> deadline_days;
  std::optional<std::int64_t> max_na;
  std::optional<std::int64_t> min_na;
  // Sweep range over the X family.
  std::int64_t x_min = 8, x_max = 512, x_step = 8;
};

using json = nlohmann::json;

inline ModelShape shape_from_json(const json& j) {
  if (j.is_number_integer()) return make_x_model(j.get<std::int64_t>());
  if (!j.is_object()) throw std::invalid_argument("model must be an object or an X index");
  if (j.contains("x")) return make_x_model(j.at("x").get<std::int64_t>());
  return make_shape(j.at("d_l").get<std::int64_t>(), j.at("d_a").get<std::int64_t>(), j.at("d_h").get<std::int64_t>(),
                    j.at("d_s").get<std::int64_t>(), j.value("n_I", std::int64_t{4}), j.value("name", std::string{}));
}

// Either a builtin name or an object with an optional "base" and overrides.
inline HardwareProfile profile_from_json(const json& j) {
  if (j.is_string()) return builtin_profile(j.get<std::string>());
  if (!j.is_object()) throw std::invalid_argument("profile must be a name or an object");
  HardwareProfile hw = builtin_profile(j.value("base", std::string("a100-80g-ib")));
  if (j.contains("name")) hw.name = j.at("name").get<std::string>();
  if (j.contains("c_gpu_tflops")) hw.c_gpu = j.at("c_gpu_tflops").get<double>() * 1e12;
  if (j.contains("m_gpu_gib")) hw.m_gpu = j.at("m_gpu_gib").get<double>() * kGiB;
  if (j.contains("bandwidth_gbs"))
    for (const auto& [k, v] : j.at("bandwidth_gbs").items()) hw.bandwidth[static_cast<std::size_t>(link_from_name(k))] = v.get<double>() * kGiB;
  if (j.contains("max_node_size")) {
    const json& m = j.at("max_node_size");
    hw.max_node_size = m.is_null() ? kUnbounded : m.get<std::int64_t>();
    hw.gpus_per_node = hw.max_node_size;
  }
  if (j.contains("inter_node")) hw.inter_node = link_from_name(j.at("inter_node").get<std::string>());
  if (j.contains("host_link")) hw.host_link = link_from_name(j.at("host_link").get<std::string>());
  hw.validate();
  return hw;
}

inline Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("scenario must be a JSON object");
  Scenario sc;
  if (j.contains("model")) sc.model = shape_from_json(j.at("model"));
  if (j.contains("profile")) sc.profile = profile_from_json(j.at("profile"));
  if (j.contains("strategies")) {
    sc.strategies.clear();
    for (const auto& s : j.at("strategies")) sc.strategies.push_back(strategy_from_name(s.get<std::string>()));
    if (sc.strategies.empty()) throw std::invalid_argument("strategies must not be empty");
  }
  if (j.contains("parallelism")) {
    sc.parallelism = j.at("parallelism").get<std::string>();
    caps_from_name(sc.parallelism);
  }
  if (j.contains("constraints")) {
    const json& c = j.at("constraints");
    auto& k = sc.constraints;
    k.epsilon = c.value("epsilon", k.epsilon);
    k.steps = c.value("steps", k.steps);
    k.allow_offload = c.value("allow_offload", k.allow_offload);
    if (c.contains("max_gpus")) k.max_gpus = c.at("max_gpus").get<std::int64_t>();
    if (c.contains("deadline_days")) sc.deadline_days = c.at("deadline_days").get<double>();
    if (c.contains("max_na")) sc.max_na = c.at("max_na").get<std::int64_t>();
    if (c.contains("min_na")) sc.min_na = c.at("min_na").get<std::int64_t>();
    if (c.contains("activation_k1")) k.activations.k1 = c.at("activation_k1").get<double>();
    if (c.contains("activation_k2")) k.activations.k2 = c.at("activation_k2").get<double>();
    k.validate();
  }
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    sc.x_min = s.value("x_min", sc.x_min);
    sc.x_max = s.value("x_max", sc.x_max);
    sc.x_step = s.value("x_step", sc.x_step);
  }
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("invalid scenario file " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

// Constraints with the scenario's parallelism caps applied.
inline OptimizerConstraints effective_constraints(const Scenario& sc) {
  OptimizerConstraints c = sc.constraints;
  c.caps = caps_from_name(sc.parallelism);
  if (sc.max_na) c.caps.max_na = std::min(c.caps.max_na, *sc.max_na);
  if (sc.min_na) c.caps.min_na = *sc.min_na;
  return c;
}

}  // namespace parascope

#endif  // PARASCOPE_CONFIG_HPP
