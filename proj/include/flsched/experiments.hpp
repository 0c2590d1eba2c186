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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flsched/rigid.hpp"
#include "flsched/scenario.hpp"
#include "flsched/session.hpp"
#include "flsched/simulator.hpp"

// Experiment drivers behind the command-line tool. Every driver returns rows
// in a fixed order so that identical inputs produce identical CSV bytes.
namespace flsched::exp {

enum class Method { Session, Rigid, Msr, Mmr };

const char* to_string(Method m);
std::optional<Method> parse_method(const std::string& name);

enum class SweepParameter { Lambda, NumRbs, Theta, Seed };

const char* to_string(SweepParameter p);
std::optional<SweepParameter> parse_parameter(const std::string& name);

struct RunConfig {
    Algorithm1Options session;
    RigidOptions rigid;
    sim::SimOptions sim;
    double replay_tti_s = 0.0;  // 0 uses the scenario's TTI
    int threads = 0;            // sweep points in flight, 0 = hardware concurrency
};

struct MethodRun {
    Method method = Method::Session;
    RoundOutcome outcome;
    bool feasible = false;
    int iterations = 0;
    std::string error;  // set when the method failed
    std::vector<TraceRow> trace;
    std::optional<SessionSchedule> schedule;  // session and rigid only
    std::optional<sim::AuditReport> audit;    // replay of the schedule
};

/// Runs one method end to end. Session uses the rigid-derived ordering.
/// Failures are reported in MethodRun::error rather than thrown.
MethodRun run_method(const Scenario& sc, Method m, const RunConfig& cfg);

struct ResultRow {
    std::string label;  // sweep value or lambda, empty for plain solves
    Method method = Method::Session;
    std::uint64_t seed = 0;
    double latency_s = 0.0;
    double energy_j = 0.0;
    double objective = 0.0;
    bool feasible = false;
    int iterations = 0;
};

ResultRow make_row(const MethodRun& run, std::uint64_t seed, std::string label = {});

/// method,seed,T_s,E_total_J,objective,feasible,iterations
void write_solve_csv(std::ostream& os, const std::vector<ResultRow>& rows);
/// <name>,method,seed,T_s,E_total_J,objective,feasible,iterations
void write_sweep_csv(std::ostream& os, const std::string& name, const std::vector<ResultRow>& rows);

/// Scenario with one parameter replaced. Seed sweeps regenerate from
/// gen_overrides; theta is given in kByte/s.
Scenario with_parameter(const Scenario& base, SweepParameter p, double value, const ParameterMap& gen_overrides);

/// Runs every (value, method) pair, points in parallel, rows ordered by value then method.
std::vector<ResultRow> sweep(const Scenario& base, SweepParameter p, const std::vector<double>& values,
                             const std::vector<Method>& methods, const RunConfig& cfg,
                             const ParameterMap& gen_overrides = {});

/// True when every feasible point of dominated has a feasible point of
/// front with no larger latency and no larger energy.
bool weakly_dominates(const std::vector<ResultRow>& front, const std::vector<ResultRow>& dominated);

struct OrderingRow {
    int rank = 0;  // 1-based position by objective
    Ordering ordering;
    double objective = 0.0;
    bool feasible = false;
    bool rigid_based = false;
};

/// Exhaustive ordering ranking with the rigid-derived ordering marked.
std::vector<OrderingRow> rank_orderings(const Scenario& sc, const RunConfig& cfg, int cap = 7);

/// rank,ordering,objective,feasible,rigid_based
void write_orderings_csv(std::ostream& os, const std::vector<OrderingRow>& rows);

}  // namespace flsched::exp
