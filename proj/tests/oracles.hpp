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

// Reference computations used by the tests. Nothing here calls into the
// library; every formula is written out again from first principles.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

namespace oracle {

inline constexpr double kLight = 299792458.0;

inline double free_space_gain_sq(double d, double f)
{
    const double a = kLight / (4.0 * std::numbers::pi * d * f);
    return a * a;
}

inline double dbm_to_w(double dbm) { return std::pow(10.0, dbm / 10.0) / 1000.0; }

inline double shannon_dl(double rbs, double bw, double pd, double h2, double n0)
{
    return rbs * bw * std::log2(1.0 + pd * h2 / (bw * n0));
}

inline double shannon_ul(double rbs, double p, double bw, double h2, double n0)
{
    if (rbs <= 0.0) {
        return 0.0;
    }
    return rbs * bw * std::log2(1.0 + p * h2 / (rbs * bw * n0));
}

/// Central difference of f along coordinate i.
inline double central_difference(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x, int i,
                                 double h)
{
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    return (fp - fm) / (2.0 * h);
}

/// minimize 0.5 x'Qx + c'x  s.t.  A x <= b, Q positive definite. Enumerates
/// every active set, solves its KKT system and keeps the primal and dual
/// feasible candidate with the lowest value.
struct QpSolution {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
};

inline QpSolution active_set_enumeration(const Eigen::MatrixXd& q, const Eigen::VectorXd& c,
                                         const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
{
    const int n = static_cast<int>(q.rows());
    const int m = static_cast<int>(a.rows());
    QpSolution best;
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        std::vector<int> act;
        for (int i = 0; i < m; ++i) {
            if (mask & (1u << i)) {
                act.push_back(i);
            }
        }
        const int k = static_cast<int>(act.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
        Eigen::VectorXd rhs(n + k);
        kkt.topLeftCorner(n, n) = q;
        rhs.head(n) = -c;
        for (int r = 0; r < k; ++r) {
            kkt.block(n + r, 0, 1, n) = a.row(act[r]);
            kkt.block(0, n + r, n, 1) = a.row(act[r]).transpose();
            rhs[n + r] = b[act[r]];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
        if (!lu.isInvertible()) {
            continue;
        }
        const Eigen::VectorXd sol = lu.solve(rhs);
        const Eigen::VectorXd x = sol.head(n);
        if (((a * x - b).array() > 1e-9).any()) {
            continue;
        }
        if (k > 0 && (sol.tail(k).array() < -1e-9).any()) {
            continue;
        }
        const double v = 0.5 * x.dot(q * x) + c.dot(x);
        if (v < best.value) {
            best.value = v;
            best.x = x;
        }
    }
    return best;
}

/// Two FL UEs, one HB UE. Inputs are raw physical constants.
struct TwoUeInstance {
    double num_rbs = 2;
    double bw = 720e3;
    double n0 = 0;
    double pd = 1;
    double pmax = 0.2;
    double h2_fl[2]{};  // channel order: h2_fl[0] >= h2_fl[1]
    double h2_hb = 0;
    double bits = 1e5;
    double tau_min[2]{};
    double energy_coef[2]{};  // E_cp = coef / tau^2
    double lambda[2]{};
    double theta = 0;
    int sigma[2]{0, 1};  // uplink rank -> FL UE
};

struct LatticePoint {
    double objective = std::numeric_limits<double>::infinity();
    double t_dl[2]{};
    double t_ul[2]{};
    double t_idle = 0;
    double k_dl = 0;
    double k_ul00 = 0, k_ul01 = 0, k_ul11 = 0;
    double p00 = 0, p01 = 0, p11 = 0;
};

namespace detail {

// Minimizes g(T) = T + sum_i w_i / (c_i + T)^2 over T >= lo by bisection on g'.
inline double idle_minimizer(double lo, const double c[2], const double w[2])
{
    auto dg = [&](double t) {
        double d = 1.0;
        for (int i = 0; i < 2; ++i) {
            d -= 2.0 * w[i] / std::pow(c[i] + t, 3);
        }
        return d;
    };
    if (dg(lo) >= 0.0) {
        return lo;
    }
    double hi = std::max(1.0, 2.0 * lo + 1.0);
    while (dg(hi) < 0.0) {
        hi *= 2.0;
    }
    double l = lo;
    for (int it = 0; it < 200 && hi - l > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (l + hi);
        (dg(mid) < 0.0 ? l : hi) = mid;
    }
    return 0.5 * (l + hi);
}

}  // namespace detail

/// Exhaustive search over a lattice of allocations with exact durations.
///
/// Axes (points per axis): FL downlink RBs, the same in both downlink
/// sessions; uplink RBs and power of rank 0 alone in uplink session 0; rank
/// 0 RBs and power plus rank 1 power in uplink session 1, where rank 1 takes
/// the remaining RBs. HB holds whatever the FL UEs leave. For each lattice
/// point and each uplink-0 duration on a fine grid the remaining durations
/// are optimal in closed form or by a one-dimensional convex search.
inline LatticePoint lattice_search(const TwoUeInstance& in, int points = 10, int t0_grid = 24)
{
    const double k = in.num_rbs;
    auto dl_per_rb = [&](double h2) { return shannon_dl(1.0, in.bw, in.pd, h2, in.n0); };
    const double r_dl[2] = {dl_per_rb(in.h2_fl[0]), dl_per_rb(in.h2_fl[1])};
    const double r_hb = dl_per_rb(in.h2_hb);
    const int a = in.sigma[0];
    const int b = in.sigma[1];

    auto level = [&](int i, double top) { return top * (i + 1) / points; };

    LatticePoint best;
    for (int ikd = 0; ikd < points; ++ikd) {
        const double kd = level(ikd, k);
        const double t_dl0 = in.bits / (kd * r_dl[0]);
        const double left1 = in.bits - kd * r_dl[1] * t_dl0;
        const double t_dl1 = left1 > 0 ? left1 / (kd * r_dl[1]) : 0.0;
        const double t_dl[2] = {t_dl0, t_dl1};
        // Downlink time each UE trains through before the uplink starts.
        const double dl_after[2] = {t_dl1, 0.0};
        const double hb_dl_bits = (k - kd) * r_hb * (t_dl0 + t_dl1);

        for (int ik00 = 0; ik00 < points; ++ik00) {
            const double k00 = level(ik00, k);
            for (int ip00 = 0; ip00 < points; ++ip00) {
                const double p00 = level(ip00, in.pmax);
                const double r00 = shannon_ul(k00, p00, in.bw, in.h2_fl[a], in.n0);
                for (int ik01 = 0; ik01 < points; ++ik01) {
                    const double k01 = k * ik01 / points;  // 0 .. 0.9 K
                    const double k11 = k - k01;
                    for (int ip01 = 0; ip01 < points; ++ip01) {
                        const double p01 = level(ip01, in.pmax);
                        const double r01 = shannon_ul(k01, p01, in.bw, in.h2_fl[a], in.n0);
                        for (int ip11 = 0; ip11 < points; ++ip11) {
                            const double p11 = level(ip11, in.pmax);
                            const double r11 = shannon_ul(k11, p11, in.bw, in.h2_fl[b], in.n0);
                            const double t0_max = in.bits / r00;
                            for (int g = 0; g <= t0_grid + 1; ++g) {
                                double t0;
                                if (g <= t0_grid) {
                                    t0 = t0_max * g / t0_grid;
                                } else if (r01 > 0) {
                                    // Both ranks finish together at the end of session 1.
                                    t0 = std::clamp((in.bits - r01 * in.bits / r11) / r00, 0.0, t0_max);
                                } else {
                                    continue;
                                }
                                const double need0 = in.bits - r00 * t0;
                                double t1 = in.bits / r11;
                                if (need0 > 1e-12 * in.bits) {
                                    if (r01 <= 0) {
                                        continue;
                                    }
                                    t1 = std::max(t1, need0 / r01);
                                }
                                const double comm = t_dl0 + t_dl1 + t0 + t1;
                                // Compute windows: c + T_idle for each rank.
                                const double c_rank[2] = {dl_after[a], t0 + dl_after[b]};
                                double lo = std::max(in.tau_min[a] - c_rank[0], in.tau_min[b] - c_rank[1]);
                                lo = std::max(lo, 0.0);
                                // HB: bits(T_idle) >= theta (comm + T_idle).
                                const double hb_bits = hb_dl_bits + (k - k00) * r_hb * t0;
                                const double hb_gain = k * r_hb - in.theta;
                                const double deficit = in.theta * comm - hb_bits;
                                if (deficit > 0) {
                                    if (hb_gain <= 0) {
                                        continue;
                                    }
                                    lo = std::max(lo, deficit / hb_gain);
                                }
                                const double w[2] = {in.lambda[a] * in.energy_coef[a],
                                                     in.lambda[b] * in.energy_coef[b]};
                                const double idle = detail::idle_minimizer(lo, c_rank, w);
                                const double obj = comm + idle + w[0] / std::pow(c_rank[0] + idle, 2) +
                                                   w[1] / std::pow(c_rank[1] + idle, 2) +
                                                   in.lambda[a] * (p00 * t0 + p01 * t1) + in.lambda[b] * p11 * t1;
                                if (obj < best.objective) {
                                    best.objective = obj;
                                    best.t_dl[0] = t_dl[0];
                                    best.t_dl[1] = t_dl[1];
                                    best.t_ul[0] = t0;
                                    best.t_ul[1] = t1;
                                    best.t_idle = idle;
                                    best.k_dl = kd;
                                    best.k_ul00 = k00;
                                    best.k_ul01 = k01;
                                    best.k_ul11 = k11;
                                    best.p00 = p00;
                                    best.p01 = p01;
                                    best.p11 = p11;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return best;
}

}  // namespace oracle
