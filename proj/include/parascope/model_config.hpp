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

#ifndef PARASCOPE_MODEL_CONFIG_HPP
#define PARASCOPE_MODEL_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace parascope {

// Transformer hyperparameters. Only the repeated layers are modeled.
struct ModelShape {
  std::int64_t d_l = 1;  // layers
  std::int64_t d_a = 1;  // heads
  std::int64_t d_h = 1;  // head size
  std::int64_t d_m = 1;  // hidden width, d_a * d_h
  std::int64_t d_s = 1;  // sequence length
  std::int64_t n_I = 4;  // intermediate size factor
  std::string name;

  void validate() const {
    if (d_l < 1 || d_a < 1 || d_h < 1 || d_m < 1 || d_s < 1 || n_I < 1)
      throw std::invalid_argument("model shape fields must be positive");
    if (d_m != d_a * d_h)
      throw std::invalid_argument("model shape requires d_m = d_a * d_h");
  }

  bool operator==(const ModelShape& o) const {
    return d_l == o.d_l && d_a == o.d_a && d_h == o.d_h && d_m == o.d_m &&
           d_s == o.d_s && n_I == o.n_I;
  }
};

inline ModelShape make_shape(std::int64_t d_l, std::int64_t d_a,
                             std::int64_t d_h, std::int64_t d_s,
                             std::int64_t n_I = 4, std::string name = {}) {
  ModelShape s{d_l, d_a, d_h, d_a * d_h, d_s, n_I, std::move(name)};
  s.validate();
  return s;
}

inline ModelShape make_x_model(std::int64_t x) {
  if (x < 2 || x % 2 != 0)
    throw std::invalid_argument("X family index must be a positive even integer");
  return make_shape(x, x / 2, 2 * x, 16 * x, 4, "X_" + std::to_string(x));
}

// Weights, biases and layer norms of one layer.
inline std::int64_t layer_param_count(const ModelShape& s) {
  return (4 + 2 * s.n_I) * s.d_m * s.d_m + 13 * s.d_m;
}

inline std::int64_t param_count(const ModelShape& s) {
  return s.d_l * layer_param_count(s);
}

// Dense weights only; the scaling law was fit on this count.
inline double weight_param_count(const ModelShape& s) {
  return static_cast<double>(s.d_l) * static_cast<double>(4 + 2 * s.n_I) *
         static_cast<double>(s.d_m) * static_cast<double>(s.d_m);
}

inline double critical_batch(double p, double d_s) {
  if (p < 1.0 || d_s < 1.0)
    throw std::invalid_argument("critical batch needs p >= 1 and d_s >= 1");
  return 573.0 * std::cbrt(p) / d_s;
}

inline double critical_batch(const ModelShape& s) {
  return critical_batch(weight_param_count(s), static_cast<double>(s.d_s));
}

// Largest integral batch at or below the critical batch.
inline std::int64_t critical_batch_floor(const ModelShape& s) {
  return static_cast<std::int64_t>(std::floor(critical_batch(s) + 1e-9));
}

}  // namespace parascope

#endif  // PARASCOPE_MODEL_CONFIG_HPP
