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

#include <string>
#include <vector>

#include "flsched/convex.hpp"
#include "flsched/outcome.hpp"
#include "flsched/scenario.hpp"

// Session-based scheduling of one FL round.
//
// The round is cut into S downlink sessions (session l ends when FL UE l,
// in channel order, has the model), an idle period during which HB traffic
// owns the band, and S uplink sessions (session l starts when the UE of
// uplink rank l has finished training). Allocations are constant within a
// session. All indices are 0-based: FL UEs by scenario order, uplink ranks
// by the ordering.
namespace flsched {

/// sigma[rank] = FL UE index whose uplink starts at that rank.
struct Ordering {
    std::vector<int> sigma;

    static Ordering identity(int num_fl);
    bool valid(int num_fl) const;
    /// Inverse permutation: rank of each FL UE.
    std::vector<int> ranks() const;
    std::string to_string() const;  // e.g. "2-0-1"

    bool operator==(const Ordering&) const = default;
};

/// Decision variables of the session problem.
struct SessionSchedule {
    Ordering ordering;
    Eigen::VectorXd t_dl;     // [S] s
    Eigen::VectorXd t_ul;     // [S] s
    double t_idle = 0.0;      // s
    Eigen::VectorXd k_dl;     // [S] FL broadcast RBs per downlink session
    Eigen::MatrixXd k_hb_dl;  // [E x S]
    Eigen::MatrixXd k_ul;     // [rank x session], meaningful for session >= rank
    Eigen::MatrixXd p_ul;     // [rank x session], W
    Eigen::MatrixXd k_hb_ul;  // [E x S]

    static SessionSchedule zeros(int num_fl, int num_hb, Ordering ordering);
    int num_fl() const { return static_cast<int>(t_dl.size()); }
    int num_hb() const { return static_cast<int>(k_hb_dl.rows()); }
    double latency() const { return t_dl.sum() + t_idle + t_ul.sum(); }

    bool operator==(const SessionSchedule& o) const;
};

/// Auxiliary variables of the quadratic transform and the energy majorizer.
struct AuxVars {
    Eigen::VectorXd y_fl_dl;  // [S]
    Eigen::MatrixXd y_hb_dl;  // [E x S]
    Eigen::MatrixXd y_hb_ul;  // [E x S]
    Eigen::MatrixXd y_fl_ul;  // [rank x session]
    Eigen::MatrixXd y_e;      // [rank x session]
};

/// Position of every schedule variable inside the solver vector.
class SessionLayout {
public:
    SessionLayout(int num_fl, int num_hb);

    int t_dl(int l) const { return l; }
    int t_ul(int l) const { return s_ + l; }
    int t_idle() const { return 2 * s_; }
    int k_dl(int l) const { return 2 * s_ + 1 + l; }
    int k_hb_dl(int e, int l) const { return 3 * s_ + 1 + e * s_ + l; }
    int k_ul(int rank, int l) const { return 3 * s_ + 1 + e_ * s_ + tri(rank, l); }
    int p_ul(int rank, int l) const { return 3 * s_ + 1 + e_ * s_ + tri_size() + tri(rank, l); }
    int k_hb_ul(int e, int l) const { return 3 * s_ + 1 + e_ * s_ + 2 * tri_size() + e * s_ + l; }
    int size() const { return 3 * s_ + 1 + 2 * e_ * s_ + 2 * tri_size(); }

    Eigen::VectorXd pack(const SessionSchedule& x) const;
    SessionSchedule unpack(const Eigen::VectorXd& v, const Ordering& ordering) const;

private:
    int tri(int rank, int l) const { return l * (l + 1) / 2 + rank; }
    int tri_size() const { return s_ * (s_ + 1) / 2; }
    int s_;
    int e_;
};

/// Share of the band each HB UE holds while the FL service is idle.
/// Proportional to the per-slot reservation, so every HB UE sees the same
/// multiple of its threshold.
std::vector<double> idle_hb_shares(const Scenario& sc);

/// Per-slot HB reservation k_e = theta / per-RB rate of each HB UE.
std::vector<double> hb_reservations(const Scenario& sc);

/// Training time available to the UE of uplink rank `rank`: uplink sessions
/// before its own, downlink sessions after its own broadcast ended, and the idle time.
double implied_compute_time(const SessionSchedule& x, int rank);

/// Exact (untransformed) evaluation; residuals are returned even when infeasible.
RoundOutcome evaluate(const SessionSchedule& x, const Scenario& sc);

/// Auxiliary variables that make every transformed term tight at x.
/// Throws std::invalid_argument on a zero-length session.
AuxVars update_aux(const Scenario& sc, const SessionSchedule& x);

/// Convex subproblem for fixed auxiliary variables, over SessionLayout variables.
convex::ConvexProgram build_subproblem(const Scenario& sc, const Ordering& ordering, const AuxVars& aux,
                                       double duration_guard = 1e-9);

/// Strictly feasible start: static HB reservation, leftover RBs to FL.
/// Throws InfeasibleError when HB alone needs the whole band.
SessionSchedule init_feasible(const Scenario& sc, const Ordering& ordering, double margin = 1e-6);

struct Algorithm1Options {
    double eps = 1e-4;
    int n_max = 50;
    double duration_guard = 1e-9;  // lower bound on session lengths inside the solver
    double snap_below = 1e-7;      // session lengths below this are reported as 0
    convex::SolveOptions solver{.tol = 1e-10, .max_newton = 3000};
};

struct TraceRow {
    int iteration = 0;
    double objective = 0.0;  // exact objective of the iterate
    double latency_s = 0.0;
    double energy_j = 0.0;
    double subproblem_objective = 0.0;
    int newton_steps = 0;
};

struct Algorithm1Result {
    SessionSchedule schedule;
    RoundOutcome outcome;
    std::vector<TraceRow> trace;
    int iterations = 0;
    bool converged = false;
};

/// Alternates auxiliary updates and convex solves from `init` (or init_feasible).
Algorithm1Result run_algorithm1(const Scenario& sc, const Ordering& ordering, const Algorithm1Options& opts = {},
                                const SessionSchedule* init = nullptr);

struct RankedOrdering {
    Ordering ordering;
    double objective = 0.0;
    bool feasible = true;
};

/// Runs run_algorithm1 for all S! orderings and sorts them by objective.
/// Throws std::invalid_argument when S exceeds `cap`.
std::vector<RankedOrdering> enumerate_orderings(const Scenario& sc, int cap = 7, const Algorithm1Options& opts = {},
                                                int threads = 0);

/// Session lengths below `threshold` set to exactly zero.
SessionSchedule snap_durations(SessionSchedule x, double threshold);

}  // namespace flsched
