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

#include <map>
#include <string>
#include <vector>

#include "flsched/outcome.hpp"
#include "flsched/scenario.hpp"
#include "flsched/session.hpp"

// Slotted timeline of one round. Every slot lasts one TTI and holds a fixed
// allocation of continuous RB counts.
namespace flsched::sim {

enum class Policy { MaxSumRate, MaxMinRate };

const char* to_string(Policy p);

enum class FlowKind { HbDl, FlDl, FlUl };

const char* to_string(FlowKind k);

struct FlowState {
    int id = 0;
    FlowKind kind = FlowKind::HbDl;
    int ue = 0;                   // index into fl_ues or hb_ues
    double bits_remaining = 0.0;  // infinite for HB flows
    long active_from = 0;         // first slot the flow may be served
    long completed_at = -1;       // last slot it was served, -1 while pending
    double cumulative_bits = 0.0;
    double energy_spent = 0.0;    // J, uplink flows only
};

/// Run of consecutive slots with an unchanged allocation of one flow.
struct TimelineSegment {
    long first_slot = 0;
    long last_slot = 0;
    int flow = 0;
    double rbs = 0.0;
    double power_w = 0.0;
    double bits = 0.0;  // delivered over the whole run
};

struct SimOptions {
    double tti_s = 0.0;  // 0 uses the scenario's TTI
    long max_slots = 10'000'000;
    bool integer_rbs = false;  // floor every FL allocation to whole RBs
    bool record_timeline = false;
};

struct PolicyResult {
    RoundOutcome outcome;
    std::vector<FlowState> flows;
    std::vector<TimelineSegment> timeline;
    long slots = 0;
    double tti_s = 0.0;
    double max_slot_rbs = 0.0;  // largest per-slot RB total, HB included
};

/// Simulates the round with FL traffic scheduled like ordinary downlink and
/// uplink flows. HB UEs first receive their per-slot reservation; the residual
/// goes to pending FL flows by the chosen policy, and to HB when no FL flow
/// is pending. Uplinks transmit at full power and training runs at f_max.
/// Throws std::runtime_error when the round does not end within max_slots.
PolicyResult run_policy(const Scenario& sc, Policy policy, const SimOptions& opts = {});

struct Violation {
    std::string check;
    int index = 0;
    double slack = 0.0;  // relative, negative
};

struct AuditReport {
    double tti_s = 0.0;
    long slots = 0;
    double latency_s = 0.0;
    double worst_slack = 0.0;
    std::map<std::string, double> family_slack;  // worst relative slack per check
    std::vector<Violation> violations;           // entries below -tolerance
    std::vector<double> hb_avg_rates;
    double tolerance = 1e-9;

    bool passed(double min_slack) const { return worst_slack >= min_slack; }
};

/// Expands a session schedule onto a grid of ceil(T / TTI) slots and audits
/// it against the per-slot model. Each slot holds one allocation, that of the
/// session containing the slot midpoint, so session boundaries move by up to
/// half a slot. The idle period hands the band to HB, and an uplink may only
/// start once the UE's copy arrived and it trained at f_max or slower.
/// Never throws on infeasible input; the report lists violations.
AuditReport replay_schedule(const SessionSchedule& x, const Scenario& sc, double tti_s = 0.0,
                            double tolerance = 1e-9);

}  // namespace flsched::sim
