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

#include "flsched/rigid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "flsched/ratemodel.hpp"
#include "transform_terms.hpp"

namespace flsched {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kAuxFloor = 1e-15;

// Variable positions: K_dl, T, then K_ul, p, tau, t_ul per UE.
struct RigidLayout {
    int s;
    int k_dl() const { return 0; }
    int t_epi() const { return 1; }
    int k_ul(int j) const { return 2 + j; }
    int p_ul(int j) const { return 2 + s + j; }
    int tau(int j) const { return 2 + 2 * s + j; }
    int t_ul(int j) const { return 2 + 3 * s + j; }
    int size() const { return 2 + 4 * s; }

    Eigen::VectorXd pack(const RigidSolution& x) const
    {
        Eigen::VectorXd v(size());
        v[k_dl()] = x.k_dl;
        v[t_epi()] = x.t_epi;
        v.segment(k_ul(0), s) = x.k_ul;
        v.segment(p_ul(0), s) = x.p_ul;
        v.segment(tau(0), s) = x.tau_cp;
        v.segment(t_ul(0), s) = x.t_ul;
        return v;
    }

    RigidSolution unpack(const Eigen::VectorXd& v, double k_hb) const
    {
        RigidSolution x;
        x.k_dl = v[k_dl()];
        x.t_epi = v[t_epi()];
        x.k_ul = v.segment(k_ul(0), s);
        x.p_ul = v.segment(p_ul(0), s);
        x.tau_cp = v.segment(tau(0), s);
        x.t_ul = v.segment(t_ul(0), s);
        x.k_hb = k_hb;
        return x;
    }
};

// a / k over {k}.
convex::Term::Eval reciprocal(double a)
{
    return [a](std::span<const double> x, std::span<double> g, std::span<double> h) {
        const double k = x[0];
        if (!(k > 0.0)) {
            return kInf;
        }
        if (!g.empty()) {
            g[0] = -a / (k * k);
        }
        if (!h.empty()) {
            h[0] = 2.0 * a / (k * k * k);
        }
        return a / k;
    };
}

double slowest_per_rb(const Scenario& sc)
{
    double c = kInf;
    for (const auto& ue : sc.fl_ues) {
        c = std::min(c, rate::dl_rate_per_rb(ue.channel_gain_sq, sc.radio));
    }
    return c;
}

// Coefficient a of the separation requirement tau_j >= a / K_dl.
double separation_coef(const Scenario& sc, int j, SeparationRule rule)
{
    const double d = sc.workload(j).model_bits;
    const double c_min = slowest_per_rb(sc);
    if (rule == SeparationRule::ComputeCoversBroadcast) {
        return d / c_min;
    }
    const double c_j = rate::dl_rate_per_rb(sc.fl_ues[j].channel_gain_sq, sc.radio);
    return std::max(0.0, d / c_min - d / c_j);
}

struct RigidAux {
    Eigen::VectorXd y_ul;
    Eigen::VectorXd y_e;
};

RigidAux rigid_aux(const Scenario& sc, const RigidSolution& x)
{
    const int s = sc.num_fl();
    RigidAux a{Eigen::VectorXd(s), Eigen::VectorXd(s)};
    for (int j = 0; j < s; ++j) {
        if (!(x.t_ul[j] > 0.0)) {
            throw std::invalid_argument("rigid aux update: zero uplink time");
        }
        const auto coef = rate::ul_coefficients(sc.fl_ues[j].channel_gain_sq, sc.radio, sc.workload(j).model_bits);
        const double r = rate::perspective_log(coef, x.k_ul[j], x.p_ul[j]).value;
        a.y_ul[j] = std::max(std::sqrt(r) * x.t_ul[j], kAuxFloor);
        a.y_e[j] = std::max(x.p_ul[j] / x.t_ul[j], kAuxFloor);
    }
    return a;
}

double latency_scale(const Scenario& sc)
{
    double t = 1.0;
    for (int j = 0; j < sc.num_fl(); ++j) {
        t = std::max(t, rate::min_compute_time(sc.workload(j)));
    }
    return t;
}

convex::ConvexProgram rigid_program(const Scenario& sc, const RigidAux& aux, double k_avail, SeparationRule rule)
{
    const int s = sc.num_fl();
    const RigidLayout lay{s};
    const auto& radio = sc.radio;
    convex::ConvexProgram prog(lay.size());

    prog.lower.setZero();
    prog.upper[lay.k_dl()] = k_avail;
    for (int j = 0; j < s; ++j) {
        prog.upper[lay.p_ul(j)] = radio.ue_max_power_w;
        prog.lower[lay.tau(j)] = rate::min_compute_time(sc.workload(j));
    }

    auto& obj = prog.objective;
    obj.add_linear(lay.t_epi(), 1.0);
    for (int j = 0; j < s; ++j) {
        const auto& w = sc.workload(j);
        if (w.energy_weight > 0.0) {
            obj.add_term({lay.tau(j)}, detail::inverse_square_of_sum(w.energy_weight * rate::compute_energy_coefficient(w)));
            obj.add_term({lay.p_ul(j), lay.t_ul(j)}, detail::energy_majorizer(aux.y_e[j], w.energy_weight));
        }
    }

    const double t_scale = latency_scale(sc);
    for (int j = 0; j < s; ++j) {
        const auto& ue = sc.fl_ues[j];
        const double d = ue.workload->model_bits;
        const double c = rate::dl_rate_per_rb(ue.channel_gain_sq, radio);
        convex::Function g;
        g.add_term({lay.k_dl()}, reciprocal(d / (c * t_scale)));
        g.add_linear(lay.tau(j), 1.0 / t_scale);
        g.add_linear(lay.t_ul(j), 1.0 / t_scale);
        g.add_linear(lay.t_epi(), -1.0 / t_scale);
        prog.add_inequality(std::move(g), "latency[" + std::to_string(j) + "]");
    }
    for (int j = 0; j < s; ++j) {
        const auto& ue = sc.fl_ues[j];
        convex::Function g;
        g.constant = 1.0;
        g.add_term({lay.k_ul(j), lay.p_ul(j), lay.t_ul(j)},
                   detail::neg_transformed_uplink(
                       aux.y_ul[j], rate::ul_coefficients(ue.channel_gain_sq, radio, ue.workload->model_bits)));
        prog.add_inequality(std::move(g), "ul_completion[" + std::to_string(j) + "]");
    }
    {
        convex::Function g;
        g.constant = -1.0;
        for (int j = 0; j < s; ++j) {
            g.add_linear(lay.k_ul(j), 1.0 / k_avail);
        }
        prog.add_inequality(std::move(g), "ul_rb");
    }
    for (int j = 0; j < s; ++j) {
        const double a = separation_coef(sc, j, rule);
        if (!(a > 0.0)) {
            continue;
        }
        const double tau_min = rate::min_compute_time(sc.workload(j));
        convex::Function g;
        g.add_term({lay.k_dl()}, reciprocal(a / tau_min));
        g.add_linear(lay.tau(j), -1.0 / tau_min);
        prog.add_inequality(std::move(g), "separation[" + std::to_string(j) + "]");
    }
    return prog;
}

RigidSolution rigid_init(const Scenario& sc, double k_avail, double k_hb, SeparationRule rule)
{
    const int s = sc.num_fl();
    const auto& radio = sc.radio;
    const double margin = 1e-3;
    RigidSolution x;
    x.k_hb = k_hb;
    x.k_dl = k_avail * (1.0 - margin);
    x.k_ul = Eigen::VectorXd::Constant(s, x.k_dl / s);
    x.p_ul = Eigen::VectorXd::Constant(s, 0.5 * radio.ue_max_power_w);
    x.tau_cp.resize(s);
    x.t_ul.resize(s);
    x.t_epi = 0.0;
    for (int j = 0; j < s; ++j) {
        const auto& ue = sc.fl_ues[j];
        const double d = ue.workload->model_bits;
        const double need = std::max(rate::min_compute_time(*ue.workload), separation_coef(sc, j, rule) / x.k_dl);
        x.tau_cp[j] = need * (1.0 + margin) + margin;
        x.t_ul[j] = d / rate::ul_rate(x.k_ul[j], x.p_ul[j], ue.channel_gain_sq, radio) * (1.0 + margin);
        const double dl = d / rate::dl_rate(x.k_dl, ue.channel_gain_sq, radio);
        x.t_epi = std::max(x.t_epi, dl + x.tau_cp[j] + x.t_ul[j]);
    }
    x.t_epi = x.t_epi * (1.0 + margin) + margin;
    return x;
}

}  // namespace

double hb_total_reservation(const Scenario& sc)
{
    const auto k = hb_reservations(sc);
    return std::accumulate(k.begin(), k.end(), 0.0);
}

RoundOutcome evaluate_rigid(const RigidSolution& x, const Scenario& sc, SeparationRule rule)
{
    const int s = sc.num_fl();
    const auto& radio = sc.radio;
    const double big_k = radio.num_rbs;
    if (x.k_ul.size() != s || x.p_ul.size() != s || x.tau_cp.size() != s || x.t_ul.size() != s) {
        throw std::invalid_argument("evaluate_rigid: dimensions do not match the scenario");
    }
    RoundOutcome out;
    out.e_cp.assign(s, 0.0);
    out.e_cm.assign(s, 0.0);
    out.e_tot.assign(s, 0.0);
    out.compute_time_s.assign(s, 0.0);

    auto& cp = out.residuals["compute_time"];
    auto& sep = out.residuals["separation"];
    auto& dl_rb = out.residuals["dl_rb_budget"];
    auto& ul_rb = out.residuals["ul_rb_budget"];
    auto& power = out.residuals["power"];
    auto& nonneg = out.residuals["nonnegativity"];
    auto& hb = out.residuals["hb_rate"];
    dl_rb.scale = ul_rb.scale = big_k;
    power.scale = radio.ue_max_power_w;
    hb.scale = std::max(sc.hb_threshold_bps, 1.0);

    std::vector<double> dl_time(s);
    double dl_max = 0.0;
    for (int j = 0; j < s; ++j) {
        const auto& ue = sc.fl_ues[j];
        const double r = rate::dl_rate(x.k_dl, ue.channel_gain_sq, radio);
        dl_time[j] = r > 0 ? ue.workload->model_bits / r : kInf;
        dl_max = std::max(dl_max, dl_time[j]);
    }
    double min_var = std::min(x.k_dl, x.k_ul.minCoeff());
    min_var = std::min(min_var, x.p_ul.minCoeff());
    sep.scale = std::max(dl_max, 1.0);
    for (int j = 0; j < s; ++j) {
        const auto& ue = sc.fl_ues[j];
        const auto& w = *ue.workload;
        const double r_ul = rate::ul_rate(x.k_ul[j], x.p_ul[j], ue.channel_gain_sq, radio);
        const double t_ul = r_ul > 0 ? w.model_bits / r_ul : kInf;
        const double tau = x.tau_cp[j];
        out.latency_s = std::max(out.latency_s, dl_time[j] + tau + t_ul);
        out.compute_time_s[j] = tau;
        out.e_cp[j] = tau > 0 ? rate::compute_energy_for_time(w, tau) : kInf;
        out.e_cm[j] = x.p_ul[j] > 0 ? x.p_ul[j] * t_ul : 0.0;
        out.e_tot[j] = out.e_cp[j] + out.e_cm[j];
        const double tau_min = rate::min_compute_time(w);
        cp.absolute.push_back((tau_min - tau) / tau_min);
        const double ready = rule == SeparationRule::ComputeCoversBroadcast ? tau : dl_time[j] + tau;
        sep.absolute.push_back(dl_max - ready);
    }
    dl_rb.absolute.push_back(x.k_dl + x.k_hb - big_k);
    ul_rb.absolute.push_back(x.k_ul.sum() + x.k_hb - big_k);
    power.absolute.push_back(x.p_ul.maxCoeff() - radio.ue_max_power_w);
    nonneg.absolute.push_back(-min_var);

    const auto k_res = hb_reservations(sc);
    const double k_res_total = std::accumulate(k_res.begin(), k_res.end(), 0.0);
    for (int e = 0; e < sc.num_hb(); ++e) {
        // HB UEs split their constant block in proportion to their reservations.
        const double share = k_res_total > 0 ? x.k_hb * k_res[e] / k_res_total : 0.0;
        const double avg = rate::dl_rate(share, sc.hb_ues[e].channel_gain_sq, radio);
        out.hb_avg_rates.push_back(avg);
        hb.absolute.push_back(sc.hb_threshold_bps - avg);
    }

    out.objective = out.latency_s;
    for (int j = 0; j < s; ++j) {
        out.objective += sc.workload(j).energy_weight * out.e_tot[j];
    }
    return out;
}

RigidResult solve_rigid(const Scenario& sc, const RigidOptions& opts)
{
    const int s = sc.num_fl();
    const double big_k = sc.radio.num_rbs;
    const double k_hb = hb_total_reservation(sc);
    if (k_hb >= big_k) {
        throw InfeasibleError("HB reservation needs " + std::to_string(k_hb) + " of " +
                              std::to_string(sc.radio.num_rbs) + " RBs");
    }
    const double k_avail = big_k - k_hb;
    const RigidLayout lay{s};

    RigidSolution x = rigid_init(sc, k_avail, k_hb, opts.separation);
    RigidResult res;
    auto record = [&](int n, double sub, int newton) {
        const RoundOutcome o = evaluate_rigid(x, sc, opts.separation);
        res.trace.push_back({n, o.objective, o.latency_s, o.total_energy(), sub, newton});
    };
    record(0, kInf, 0);

    Eigen::VectorXd v = lay.pack(x);
    double prev = kInf;
    for (int n = 1; n <= opts.n_max; ++n) {
        const auto prog = rigid_program(sc, rigid_aux(sc, x), k_avail, opts.separation);
        const auto rep = convex::solve(prog, v, opts.solver);
        if (rep.status != convex::SolveStatus::Optimal) {
            throw SolverError(n, convex::to_string(rep.status));
        }
        v = rep.x_opt;
        x = lay.unpack(v, k_hb);
        record(n, rep.objective_value, rep.newton_iterations);
        res.iterations = n;
        const double cur = rep.objective_value;
        if (std::abs(cur - prev) / std::abs(cur) <= opts.eps) {
            res.converged = true;
            break;
        }
        prev = cur;
    }
    res.solution = x;
    res.outcome = evaluate_rigid(x, sc, opts.separation);
    return res;
}

RigidSolution rigid_init_feasible(const Scenario& sc, SeparationRule separation)
{
    const double k_hb = hb_total_reservation(sc);
    if (k_hb >= sc.radio.num_rbs) {
        throw InfeasibleError("HB reservation needs the whole band");
    }
    return rigid_init(sc, sc.radio.num_rbs - k_hb, k_hb, separation);
}

convex::ConvexProgram build_rigid_subproblem(const Scenario& sc, const RigidSolution& at, SeparationRule separation)
{
    return rigid_program(sc, rigid_aux(sc, at), sc.radio.num_rbs - hb_total_reservation(sc), separation);
}

Eigen::VectorXd pack_rigid(const RigidSolution& sol)
{
    return RigidLayout{static_cast<int>(sol.k_ul.size())}.pack(sol);
}

std::vector<double> rigid_ready_times(const RigidSolution& sol, const Scenario& sc)
{
    std::vector<double> ready(sc.num_fl());
    for (int j = 0; j < sc.num_fl(); ++j) {
        const auto& ue = sc.fl_ues[j];
        ready[j] = ue.workload->model_bits / rate::dl_rate(sol.k_dl, ue.channel_gain_sq, sc.radio) + sol.tau_cp[j];
    }
    return ready;
}

Ordering ordering_from_rigid(const RigidSolution& sol, const Scenario& sc)
{
    const auto ready = rigid_ready_times(sol, sc);
    const double top = ready.empty() ? 1.0 : *std::max_element(ready.begin(), ready.end());
    // Ready times equal up to solver accuracy count as ties.
    const double quantum = 1e-6 * std::max(top, 1e-12);
    Ordering o = Ordering::identity(sc.num_fl());
    auto key = [&](int j) {
        return std::make_tuple(std::llround(ready[j] / quantum), -sc.fl_ues[j].channel_gain_sq, sc.fl_ues[j].id);
    };
    std::stable_sort(o.sigma.begin(), o.sigma.end(), [&](int a, int b) { return key(a) < key(b); });
    return o;
}

SessionSchedule rigid_to_session(const RigidSolution& sol, const Scenario& sc)
{
    const int s = sc.num_fl();
    const int e_count = sc.num_hb();
    const auto& radio = sc.radio;
    const Ordering ord = ordering_from_rigid(sol, sc);
    SessionSchedule x = SessionSchedule::zeros(s, e_count, ord);
    const auto k_res = hb_reservations(sc);
    const double k_res_total = std::accumulate(k_res.begin(), k_res.end(), 0.0);

    double elapsed = 0.0;
    for (int j = 0; j < s; ++j) {
        const auto& ue = sc.fl_ues[j];
        const double end = ue.workload->model_bits / rate::dl_rate(sol.k_dl, ue.channel_gain_sq, radio);
        x.t_dl[j] = std::max(0.0, end - elapsed);
        elapsed += x.t_dl[j];
        x.k_dl[j] = sol.k_dl;
    }
    const double dl_total = elapsed;
    for (int l = 0; l < s; ++l) {
        for (int e = 0; e < e_count; ++e) {
            const double block = k_res_total > 0 ? sol.k_hb * k_res[e] / k_res_total : 0.0;
            x.k_hb_dl(e, l) = block;
            x.k_hb_ul(e, l) = block;
        }
    }

    // Sessions start at the ready times, clamped to be monotone in rank.
    const auto ready = rigid_ready_times(sol, sc);
    std::vector<double> start(s);
    std::vector<double> finish(s);
    double round_end = dl_total;
    for (int rank = 0; rank < s; ++rank) {
        const int j = ord.sigma[rank];
        const double earliest = rank == 0 ? dl_total : start[rank - 1];
        start[rank] = std::max(ready[j], earliest);
        const double r = rate::ul_rate(sol.k_ul[j], sol.p_ul[j], sc.fl_ues[j].channel_gain_sq, radio);
        finish[rank] = start[rank] + sc.workload(j).model_bits / r;
        round_end = std::max(round_end, finish[rank]);
    }
    x.t_idle = start[0] - dl_total;
    for (int l = 0; l < s; ++l) {
        const double end = l + 1 < s ? start[l + 1] : round_end;
        x.t_ul[l] = end - start[l];
        for (int rank = 0; rank <= l; ++rank) {
            const int j = ord.sigma[rank];
            const double overlap = std::max(0.0, std::min(end, finish[rank]) - start[l]);
            const double frac = x.t_ul[l] > 0 ? overlap / x.t_ul[l] : 0.0;
            x.k_ul(rank, l) = frac * sol.k_ul[j];
            x.p_ul(rank, l) = frac * sol.p_ul[j];
        }
    }
    return x;
}

}  // namespace flsched
