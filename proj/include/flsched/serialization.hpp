/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The flsched Authors
 * SPDX-License-Identifier: Apache-2.0
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

#pragma once

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "flsched/outcome.hpp"
#include "flsched/rigid.hpp"
#include "flsched/scenario.hpp"
#include "flsched/session.hpp"
#include "flsched/simulator.hpp"

// JSON documents and CSV tables. JSON fields use SI units and mirror the
// in-memory structs; see docs in README.md for the scenario schema.
namespace flsched::io {

struct LoadedScenario {
    Scenario scenario;
    /// Set when the FL UEs were not in descending channel order and got sorted.
    bool reordered = false;
    std::vector<std::string> warnings;
};

nlohmann::json scenario_to_json(const Scenario& sc);
/// Throws ScenarioError naming the offending field.
LoadedScenario scenario_from_json(const nlohmann::json& doc);

void save_scenario(const Scenario& sc, const std::string& path);
LoadedScenario load_scenario(const std::string& path);

nlohmann::json to_json(const SessionSchedule& x);
nlohmann::json to_json(const RigidSolution& x);
nlohmann::json to_json(const RoundOutcome& o);
nlohmann::json to_json(const sim::AuditReport& r);

/// iteration,objective,latency_s,energy_j
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);
/// first_slot,last_slot,flow,kind,ue,rbs,power_w,bits
void write_timeline_csv(std::ostream& os, const sim::PolicyResult& r);

/// Fixed 9-significant-digit rendering used by every CSV writer.
std::string fmt(double v);

}  // namespace flsched::io
