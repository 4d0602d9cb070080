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

#ifndef PARASCOPE_PARASCOPE_HPP
#define PARASCOPE_PARASCOPE_HPP

#include "parascope/config.hpp"
#include "parascope/cost_model.hpp"
#include "parascope/hardware_model.hpp"
#include "parascope/model_config.hpp"
#include "parascope/pipeline_sim.hpp"
#include "parascope/plan_optimizer.hpp"
#include "parascope/report.hpp"

#endif  // PARASCOPE_PARASCOPE_HPP
