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

#include <Eigen/Dense>

#include <vector>

#include "flsched/convex.hpp"
#include "flsched/outcome.hpp"
#include "flsched/scenario.hpp"
#include "flsched/session.hpp"

namespace flsched {

/// How the downlink/uplink separation of the rigid baseline is written.
enum class SeparationRule {
    /// Every training time covers the slowest broadcast: tau_s >= max_s' D / r_s',dl.
    ComputeCoversBroadcast,
    /// Only readiness is constrained: D / r_s,dl + tau_s >= max_s' D / r_s',dl.
    ReadyAfterBroadcast,
};

/// Allocation held constant over the whole round.
struct RigidSolution {
    double k_dl = 0.0;      // FL broadcast RBs
    Eigen::VectorXd k_ul;   // [S] RBs per FL UE (scenario order)
    Eigen::VectorXd p_ul;   // [S] W
    Eigen::VectorXd tau_cp; // [S] s
    Eigen::VectorXd t_ul;   // [S] s, uplink time budget
    double t_epi = 0.0;     // s, epigraph of the round latency
    double k_hb = 0.0;      // RBs held by HB traffic throughout
};

struct RigidOptions {
    double eps = 1e-4;
    int n_max = 50;
    SeparationRule separation = SeparationRule::ComputeCoversBroadcast;
    convex::SolveOptions solver{.tol = 1e-10, .max_newton = 3000};
};

struct RigidResult {
    RigidSolution solution;
    RoundOutcome outcome;
    std::vector<TraceRow> trace;
    int iterations = 0;
    bool converged = false;
};

/// Total per-slot HB reservation sum_e k_e.
double hb_total_reservation(const Scenario& sc);

/// Iterates transform updates and convex solves on the rigid problem.
/// Throws InfeasibleError when HB needs the whole band.
RigidResult solve_rigid(const Scenario& sc, const RigidOptions& opts = {});

/// Exact objective and residuals of a rigid allocation.
RoundOutcome evaluate_rigid(const RigidSolution& sol, const Scenario& sc,
                            SeparationRule separation = SeparationRule::ComputeCoversBroadcast);

/// Strictly feasible starting allocation of solve_rigid.
RigidSolution rigid_init_feasible(const Scenario& sc,
                                  SeparationRule separation = SeparationRule::ComputeCoversBroadcast);

/// Convex surrogate solved in one rigid iteration, with transform and
/// majorizer expanded at `at`. Variables follow pack_rigid.
convex::ConvexProgram build_rigid_subproblem(const Scenario& sc, const RigidSolution& at,
                                             SeparationRule separation = SeparationRule::ComputeCoversBroadcast);

/// Solver vector [K_dl, T_epi, K_ul, p_ul, tau_cp, t_ul].
Eigen::VectorXd pack_rigid(const RigidSolution& sol);

/// Uplink-ready time D / r_dl(K_dl) + tau_cp of every FL UE.
std::vector<double> rigid_ready_times(const RigidSolution& sol, const Scenario& sc);

/// FL UEs sorted by ascending ready time; near-ties go to the stronger
/// channel, then to the lower UE id.
Ordering ordering_from_rigid(const RigidSolution& sol, const Scenario& sc);

/// The same allocation written as a session schedule with the rigid-derived
/// ordering. A UE that finishes inside a session keeps its power-to-RB ratio
/// and scales both down to its airtime share, so bits and energy are preserved.
SessionSchedule rigid_to_session(const RigidSolution& sol, const Scenario& sc);

}  // namespace flsched
