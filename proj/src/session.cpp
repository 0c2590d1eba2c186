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

#include "flsched/session.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "flsched/parallel.hpp"
#include "flsched/ratemodel.hpp"
#include "transform_terms.hpp"

namespace flsched {

namespace {

using detail::energy_majorizer;
using detail::inverse_square_of_sum;
using detail::neg_transformed_linear;
using detail::neg_transformed_uplink;

constexpr double kInf = std::numeric_limits<double>::infinity();
// Auxiliary variables are kept strictly positive.
constexpr double kAuxFloor = 1e-15;

double pos_floor(double v)
{
    return std::max(v, kAuxFloor);
}

void check_dims(const SessionSchedule& x, const Scenario& sc)
{
    const int s = sc.num_fl();
    const int e = sc.num_hb();
    if (x.num_fl() != s || x.t_ul.size() != s || x.k_dl.size() != s || x.k_hb_dl.rows() != e ||
        x.k_hb_dl.cols() != s || x.k_hb_ul.rows() != e || x.k_hb_ul.cols() != s || x.k_ul.rows() != s ||
        x.k_ul.cols() != s || x.p_ul.rows() != s || x.p_ul.cols() != s || !x.ordering.valid(s)) {
        throw std::invalid_argument("schedule dimensions do not match the scenario");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Ordering / schedule plumbing

Ordering Ordering::identity(int num_fl)
{
    Ordering o;
    o.sigma.resize(num_fl);
    std::iota(o.sigma.begin(), o.sigma.end(), 0);
    return o;
}

bool Ordering::valid(int num_fl) const
{
    if (static_cast<int>(sigma.size()) != num_fl) {
        return false;
    }
    std::vector<int> sorted = sigma;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < num_fl; ++i) {
        if (sorted[i] != i) {
            return false;
        }
    }
    return true;
}

std::vector<int> Ordering::ranks() const
{
    std::vector<int> r(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        r[sigma[i]] = static_cast<int>(i);
    }
    return r;
}

std::string Ordering::to_string() const
{
    std::ostringstream os;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        os << (i ? "-" : "") << sigma[i];
    }
    return os.str();
}

SessionSchedule SessionSchedule::zeros(int num_fl, int num_hb, Ordering ordering)
{
    SessionSchedule x;
    x.ordering = std::move(ordering);
    x.t_dl = Eigen::VectorXd::Zero(num_fl);
    x.t_ul = Eigen::VectorXd::Zero(num_fl);
    x.k_dl = Eigen::VectorXd::Zero(num_fl);
    x.k_hb_dl = Eigen::MatrixXd::Zero(num_hb, num_fl);
    x.k_hb_ul = Eigen::MatrixXd::Zero(num_hb, num_fl);
    x.k_ul = Eigen::MatrixXd::Zero(num_fl, num_fl);
    x.p_ul = Eigen::MatrixXd::Zero(num_fl, num_fl);
    return x;
}

bool SessionSchedule::operator==(const SessionSchedule& o) const
{
    return ordering == o.ordering && t_dl == o.t_dl && t_ul == o.t_ul && t_idle == o.t_idle && k_dl == o.k_dl &&
           k_hb_dl == o.k_hb_dl && k_ul == o.k_ul && p_ul == o.p_ul && k_hb_ul == o.k_hb_ul;
}

SessionLayout::SessionLayout(int num_fl, int num_hb) : s_(num_fl), e_(num_hb) {}

Eigen::VectorXd SessionLayout::pack(const SessionSchedule& x) const
{
    Eigen::VectorXd v(size());
    for (int l = 0; l < s_; ++l) {
        v[t_dl(l)] = x.t_dl[l];
        v[t_ul(l)] = x.t_ul[l];
        v[k_dl(l)] = x.k_dl[l];
        for (int e = 0; e < e_; ++e) {
            v[k_hb_dl(e, l)] = x.k_hb_dl(e, l);
            v[k_hb_ul(e, l)] = x.k_hb_ul(e, l);
        }
        for (int r = 0; r <= l; ++r) {
            v[k_ul(r, l)] = x.k_ul(r, l);
            v[p_ul(r, l)] = x.p_ul(r, l);
        }
    }
    v[t_idle()] = x.t_idle;
    return v;
}

SessionSchedule SessionLayout::unpack(const Eigen::VectorXd& v, const Ordering& ordering) const
{
    SessionSchedule x = SessionSchedule::zeros(s_, e_, ordering);
    for (int l = 0; l < s_; ++l) {
        x.t_dl[l] = v[t_dl(l)];
        x.t_ul[l] = v[t_ul(l)];
        x.k_dl[l] = v[k_dl(l)];
        for (int e = 0; e < e_; ++e) {
            x.k_hb_dl(e, l) = v[k_hb_dl(e, l)];
            x.k_hb_ul(e, l) = v[k_hb_ul(e, l)];
        }
        for (int r = 0; r <= l; ++r) {
            x.k_ul(r, l) = v[k_ul(r, l)];
            x.p_ul(r, l) = v[p_ul(r, l)];
        }
    }
    x.t_idle = v[t_idle()];
    return x;
}

std::vector<double> hb_reservations(const Scenario& sc)
{
    std::vector<double> k;
    for (const auto& ue : sc.hb_ues) {
        k.push_back(rate::hb_reservation(ue.channel_gain_sq, sc.hb_threshold_bps, sc.radio));
    }
    return k;
}

std::vector<double> idle_hb_shares(const Scenario& sc)
{
    const auto k = hb_reservations(sc);
    const double total = std::accumulate(k.begin(), k.end(), 0.0);
    std::vector<double> share(k.size());
    for (std::size_t e = 0; e < k.size(); ++e) {
        share[e] = sc.radio.num_rbs * (total > 0 ? k[e] / total : 1.0 / k.size());
    }
    return share;
}

double implied_compute_time(const SessionSchedule& x, int rank)
{
    const int s = x.num_fl();
    const int ue = x.ordering.sigma.at(rank);
    double tau = x.t_idle;
    for (int l = 0; l < rank; ++l) {
        tau += x.t_ul[l];
    }
    for (int l = ue + 1; l < s; ++l) {
        tau += x.t_dl[l];
    }
    return tau;
}

SessionSchedule snap_durations(SessionSchedule x, double threshold)
{
    for (int l = 0; l < x.num_fl(); ++l) {
        if (x.t_dl[l] < threshold) {
            x.t_dl[l] = 0.0;
        }
        if (x.t_ul[l] < threshold) {
            x.t_ul[l] = 0.0;
        }
    }
    if (x.t_idle < threshold) {
        x.t_idle = 0.0;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Exact evaluation

RoundOutcome evaluate(const SessionSchedule& x, const Scenario& sc)
{
    check_dims(x, sc);
    const int s_count = sc.num_fl();
    const int e_count = sc.num_hb();
    const auto& radio = sc.radio;
    const double big_k = radio.num_rbs;

    RoundOutcome out;
    out.latency_s = x.latency();
    out.e_cp.assign(s_count, 0.0);
    out.e_cm.assign(s_count, 0.0);
    out.e_tot.assign(s_count, 0.0);
    out.compute_time_s.assign(s_count, 0.0);

    auto& dl = out.residuals["dl_completion"];
    auto& ul = out.residuals["ul_completion"];
    auto& cp = out.residuals["compute_time"];
    auto& dl_rb = out.residuals["dl_rb_budget"];
    auto& ul_rb = out.residuals["ul_rb_budget"];
    auto& power = out.residuals["power"];
    auto& nonneg = out.residuals["nonnegativity"];
    auto& hb = out.residuals["hb_rate"];
    dl.absolute.assign(s_count, 0.0);
    ul.absolute.assign(s_count, 0.0);
    cp.absolute.assign(s_count, 0.0);
    dl_rb.scale = ul_rb.scale = big_k;
    power.scale = radio.ue_max_power_w;
    hb.scale = std::max(sc.hb_threshold_bps, 1.0);

    double min_var = std::min({x.t_dl.minCoeff(), x.t_ul.minCoeff(), x.t_idle, x.k_dl.minCoeff()});
    double max_power = 0.0;

    for (int j = 0; j < s_count; ++j) {
        const auto& ue = sc.fl_ues[j];
        const double per_rb = rate::dl_rate_per_rb(ue.channel_gain_sq, radio);
        double bits = 0.0;
        for (int i = 0; i <= j; ++i) {
            bits += per_rb * x.k_dl[i] * x.t_dl[i];
        }
        dl.absolute[j] = ue.workload->model_bits - bits;
        dl.scale = ue.workload->model_bits;
    }

    for (int l = 0; l < s_count; ++l) {
        double used = x.k_dl[l];
        for (int e = 0; e < e_count; ++e) {
            used += x.k_hb_dl(e, l);
            min_var = std::min(min_var, x.k_hb_dl(e, l));
        }
        dl_rb.absolute.push_back(used - big_k);

        used = 0.0;
        for (int r = 0; r <= l; ++r) {
            used += x.k_ul(r, l);
            min_var = std::min({min_var, x.k_ul(r, l), x.p_ul(r, l)});
            max_power = std::max(max_power, x.p_ul(r, l));
        }
        for (int e = 0; e < e_count; ++e) {
            used += x.k_hb_ul(e, l);
            min_var = std::min(min_var, x.k_hb_ul(e, l));
        }
        ul_rb.absolute.push_back(used - big_k);
    }
    power.absolute.push_back(max_power - radio.ue_max_power_w);
    nonneg.absolute.push_back(-min_var);

    for (int rank = 0; rank < s_count; ++rank) {
        const int j = x.ordering.sigma[rank];
        const auto& ue = sc.fl_ues[j];
        const auto& w = *ue.workload;
        double bits = 0.0;
        double energy = 0.0;
        for (int l = rank; l < s_count; ++l) {
            bits += rate::ul_rate(x.k_ul(rank, l), x.p_ul(rank, l), ue.channel_gain_sq, radio) * x.t_ul[l];
            energy += x.p_ul(rank, l) * x.t_ul[l];
        }
        ul.absolute[j] = w.model_bits - bits;
        ul.scale = w.model_bits;
        const double tau = implied_compute_time(x, rank);
        const double tau_min = rate::min_compute_time(w);
        out.compute_time_s[j] = tau;
        cp.absolute[j] = tau_min - tau;
        cp.scale = std::max(cp.scale, tau_min);
        out.e_cm[j] = energy;
        out.e_cp[j] = tau > 0 ? rate::compute_energy_for_time(w, tau) : kInf;
        out.e_tot[j] = out.e_cm[j] + out.e_cp[j];
    }
    // Compute-time residuals relative to each UE's own minimum.
    for (int j = 0; j < s_count; ++j) {
        cp.absolute[j] *= cp.scale / rate::min_compute_time(sc.workload(j));
    }

    const auto share = idle_hb_shares(sc);
    const double total_time = out.latency_s;
    for (int e = 0; e < e_count; ++e) {
        const double per_rb = rate::dl_rate_per_rb(sc.hb_ues[e].channel_gain_sq, radio);
        double bits = x.t_idle * share[e] * per_rb;
        for (int l = 0; l < s_count; ++l) {
            bits += per_rb * (x.k_hb_dl(e, l) * x.t_dl[l] + x.k_hb_ul(e, l) * x.t_ul[l]);
        }
        const double avg = total_time > 0 ? bits / total_time : kInf;
        out.hb_avg_rates.push_back(avg);
        hb.absolute.push_back(total_time > 0 ? sc.hb_threshold_bps - avg : 0.0);
    }

    out.objective = out.latency_s;
    for (int j = 0; j < s_count; ++j) {
        out.objective += sc.workload(j).energy_weight * out.e_tot[j];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transform machinery

AuxVars update_aux(const Scenario& sc, const SessionSchedule& x)
{
    check_dims(x, sc);
    const int s_count = sc.num_fl();
    const int e_count = sc.num_hb();
    for (int l = 0; l < s_count; ++l) {
        if (!(x.t_dl[l] > 0.0) || !(x.t_ul[l] > 0.0)) {
            throw std::invalid_argument("update_aux: session " + std::to_string(l) + " has zero duration");
        }
    }
    AuxVars y;
    y.y_fl_dl.resize(s_count);
    y.y_hb_dl.resize(e_count, s_count);
    y.y_hb_ul.resize(e_count, s_count);
    y.y_fl_ul = Eigen::MatrixXd::Zero(s_count, s_count);
    y.y_e = Eigen::MatrixXd::Zero(s_count, s_count);
    for (int l = 0; l < s_count; ++l) {
        y.y_fl_dl[l] = pos_floor(std::sqrt(std::max(x.k_dl[l], 0.0)) * x.t_dl[l]);
        for (int e = 0; e < e_count; ++e) {
            y.y_hb_dl(e, l) = pos_floor(std::sqrt(std::max(x.k_hb_dl(e, l), 0.0)) * x.t_dl[l]);
            y.y_hb_ul(e, l) = pos_floor(std::sqrt(std::max(x.k_hb_ul(e, l), 0.0)) * x.t_ul[l]);
        }
    }
    for (int rank = 0; rank < s_count; ++rank) {
        const auto& ue = sc.fl_ues[x.ordering.sigma[rank]];
        const double d = ue.workload->model_bits;
        for (int l = rank; l < s_count; ++l) {
            const double r = rate::ul_rate(x.k_ul(rank, l), x.p_ul(rank, l), ue.channel_gain_sq, sc.radio) / d;
            y.y_fl_ul(rank, l) = pos_floor(std::sqrt(r) * x.t_ul[l]);
            y.y_e(rank, l) = pos_floor(x.p_ul(rank, l) / x.t_ul[l]);
        }
    }
    return y;
}

convex::ConvexProgram build_subproblem(const Scenario& sc, const Ordering& ordering, const AuxVars& aux,
                                       double duration_guard)
{
    const int s_count = sc.num_fl();
    const int e_count = sc.num_hb();
    if (!ordering.valid(s_count)) {
        throw std::invalid_argument("build_subproblem: invalid ordering");
    }
    auto positive = [](const auto& m) { return m.size() == 0 || m.minCoeff() > 0.0; };
    if (!positive(aux.y_fl_dl) || !positive(aux.y_hb_dl) || !positive(aux.y_hb_ul)) {
        throw std::invalid_argument("build_subproblem: auxiliary variables must be strictly positive");
    }
    for (int rank = 0; rank < s_count; ++rank) {
        for (int l = rank; l < s_count; ++l) {
            if (!(aux.y_fl_ul(rank, l) > 0.0) || !(aux.y_e(rank, l) > 0.0)) {
                throw std::invalid_argument("build_subproblem: auxiliary variables must be strictly positive");
            }
        }
    }

    const SessionLayout lay(s_count, e_count);
    const auto& radio = sc.radio;
    const double big_k = radio.num_rbs;
    convex::ConvexProgram prog(lay.size());

    for (int l = 0; l < s_count; ++l) {
        prog.lower[lay.t_dl(l)] = duration_guard;
        prog.lower[lay.t_ul(l)] = duration_guard;
        prog.lower[lay.k_dl(l)] = 0.0;
        for (int e = 0; e < e_count; ++e) {
            prog.lower[lay.k_hb_dl(e, l)] = 0.0;
            prog.lower[lay.k_hb_ul(e, l)] = 0.0;
        }
        for (int r = 0; r <= l; ++r) {
            prog.lower[lay.k_ul(r, l)] = 0.0;
            prog.lower[lay.p_ul(r, l)] = 0.0;
            prog.upper[lay.p_ul(r, l)] = radio.ue_max_power_w;
        }
    }
    prog.lower[lay.t_idle()] = 0.0;

    // Objective: round latency plus weighted (majorized) energy.
    auto& obj = prog.objective;
    for (int l = 0; l < s_count; ++l) {
        obj.add_linear(lay.t_dl(l), 1.0);
        obj.add_linear(lay.t_ul(l), 1.0);
    }
    obj.add_linear(lay.t_idle(), 1.0);
    for (int rank = 0; rank < s_count; ++rank) {
        const int ue = ordering.sigma[rank];
        const auto& w = sc.workload(ue);
        if (w.energy_weight <= 0.0) {
            continue;
        }
        for (int l = rank; l < s_count; ++l) {
            obj.add_term({lay.p_ul(rank, l), lay.t_ul(l)}, energy_majorizer(aux.y_e(rank, l), w.energy_weight));
        }
        std::vector<int> tau_vars{lay.t_idle()};
        for (int l = 0; l < rank; ++l) {
            tau_vars.push_back(lay.t_ul(l));
        }
        for (int l = ue + 1; l < s_count; ++l) {
            tau_vars.push_back(lay.t_dl(l));
        }
        obj.add_term(tau_vars, inverse_square_of_sum(w.energy_weight * rate::compute_energy_coefficient(w)));
    }

    // Broadcast completion of FL UE j by the end of downlink session j (normalized by D).
    for (int j = 0; j < s_count; ++j) {
        const auto& ue = sc.fl_ues[j];
        const double c = rate::dl_rate_per_rb(ue.channel_gain_sq, radio) / ue.workload->model_bits;
        convex::Function g;
        g.constant = 1.0;
        for (int i = 0; i <= j; ++i) {
            g.add_term({lay.k_dl(i), lay.t_dl(i)}, neg_transformed_linear(aux.y_fl_dl[i], c));
        }
        prog.add_inequality(std::move(g), "dl_completion[" + std::to_string(j) + "]");
    }

    // Uplink completion of the rank-r UE over sessions r..S-1 (normalized by D).
    for (int rank = 0; rank < s_count; ++rank) {
        const auto& ue = sc.fl_ues[ordering.sigma[rank]];
        const auto coef = rate::ul_coefficients(ue.channel_gain_sq, radio, ue.workload->model_bits);
        convex::Function g;
        g.constant = 1.0;
        for (int l = rank; l < s_count; ++l) {
            g.add_term({lay.k_ul(rank, l), lay.p_ul(rank, l), lay.t_ul(l)},
                       neg_transformed_uplink(aux.y_fl_ul(rank, l), coef));
        }
        prog.add_inequality(std::move(g), "ul_completion[" + std::to_string(rank) + "]");
    }

    // RB budgets per session (normalized by K).
    for (int l = 0; l < s_count; ++l) {
        convex::Function g;
        g.constant = -1.0;
        g.add_linear(lay.k_dl(l), 1.0 / big_k);
        for (int e = 0; e < e_count; ++e) {
            g.add_linear(lay.k_hb_dl(e, l), 1.0 / big_k);
        }
        prog.add_inequality(std::move(g), "dl_rb[" + std::to_string(l) + "]");
    }
    for (int l = 0; l < s_count; ++l) {
        convex::Function g;
        g.constant = -1.0;
        for (int r = 0; r <= l; ++r) {
            g.add_linear(lay.k_ul(r, l), 1.0 / big_k);
        }
        for (int e = 0; e < e_count; ++e) {
            g.add_linear(lay.k_hb_ul(e, l), 1.0 / big_k);
        }
        prog.add_inequality(std::move(g), "ul_rb[" + std::to_string(l) + "]");
    }

    // Training time of each rank is at least the f_max time (normalized by it).
    for (int rank = 0; rank < s_count; ++rank) {
        const int ue = ordering.sigma[rank];
        const double tau_min = rate::min_compute_time(sc.workload(ue));
        convex::Function g;
        g.constant = 1.0;
        g.add_linear(lay.t_idle(), -1.0 / tau_min);
        for (int l = 0; l < rank; ++l) {
            g.add_linear(lay.t_ul(l), -1.0 / tau_min);
        }
        for (int l = ue + 1; l < s_count; ++l) {
            g.add_linear(lay.t_dl(l), -1.0 / tau_min);
        }
        prog.add_inequality(std::move(g), "compute[" + std::to_string(rank) + "]");
    }

    // HB average rate, written in RB-seconds per reserved RB (seconds).
    const auto k_res = hb_reservations(sc);
    const auto share = idle_hb_shares(sc);
    for (int e = 0; e < e_count; ++e) {
        if (!(k_res[e] > 0.0)) {
            continue;
        }
        convex::Function g;
        for (int l = 0; l < s_count; ++l) {
            g.add_linear(lay.t_dl(l), 1.0);
            g.add_linear(lay.t_ul(l), 1.0);
        }
        g.add_linear(lay.t_idle(), 1.0 - share[e] / k_res[e]);
        const double w = 1.0 / k_res[e];
        for (int l = 0; l < s_count; ++l) {
            g.add_term({lay.k_hb_dl(e, l), lay.t_dl(l)}, neg_transformed_linear(aux.y_hb_dl(e, l), w));
            g.add_term({lay.k_hb_ul(e, l), lay.t_ul(l)}, neg_transformed_linear(aux.y_hb_ul(e, l), w));
        }
        prog.add_inequality(std::move(g), "hb_rate[" + std::to_string(e) + "]");
    }
    return prog;
}

// ---------------------------------------------------------------------------
// Initialization

SessionSchedule init_feasible(const Scenario& sc, const Ordering& ordering, double margin)
{
    const int s_count = sc.num_fl();
    const int e_count = sc.num_hb();
    if (!ordering.valid(s_count)) {
        throw std::invalid_argument("init_feasible: invalid ordering");
    }
    const auto& radio = sc.radio;
    const double big_k = radio.num_rbs;
    const auto k_res = hb_reservations(sc);
    const double hb_total = std::accumulate(k_res.begin(), k_res.end(), 0.0) * (1.0 + margin);
    if (hb_total >= big_k) {
        throw InfeasibleError("HB reservation needs " + std::to_string(hb_total) + " of " +
                              std::to_string(radio.num_rbs) + " RBs");
    }
    const double fl_rbs = (big_k - hb_total) * (1.0 - margin);
    const double min_len = 1e-6;

    SessionSchedule x = SessionSchedule::zeros(s_count, e_count, ordering);
    for (int l = 0; l < s_count; ++l) {
        for (int e = 0; e < e_count; ++e) {
            x.k_hb_dl(e, l) = k_res[e] * (1.0 + margin);
            x.k_hb_ul(e, l) = k_res[e] * (1.0 + margin);
        }
        x.k_dl[l] = fl_rbs;
    }

    // Downlink: session j lasts until UE j holds D (1 + margin) bits.
    std::vector<double> dl_end(s_count);
    double elapsed = 0.0;
    for (int j = 0; j < s_count; ++j) {
        const auto& ue = sc.fl_ues[j];
        const double need = ue.workload->model_bits * (1.0 + margin) /
                            rate::dl_rate(fl_rbs, ue.channel_gain_sq, radio);
        x.t_dl[j] = std::max(need - elapsed, min_len);
        elapsed += x.t_dl[j];
        dl_end[j] = elapsed;
    }
    const double dl_total = elapsed;

    // Uplink sessions start when their UE is ready at f_max, kept in rank order.
    std::vector<double> start(s_count);
    for (int rank = 0; rank < s_count; ++rank) {
        const int ue = ordering.sigma[rank];
        const double ready = dl_end[ue] + rate::min_compute_time(sc.workload(ue)) * (1.0 + margin);
        const double earliest = rank == 0 ? dl_total + min_len : start[rank - 1] + min_len;
        start[rank] = std::max(earliest, ready);
    }
    x.t_idle = start[0] - dl_total;

    // Every rank eligible in a session gets an equal share at half power, even
    // after it has finished, so that no allocation starts next to zero.
    const double half_p = 0.5 * radio.ue_max_power_w;
    std::vector<double> remaining(s_count);
    for (int rank = 0; rank < s_count; ++rank) {
        remaining[rank] = sc.workload(ordering.sigma[rank]).model_bits * (1.0 + margin);
    }
    for (int l = 0; l < s_count; ++l) {
        const double share = fl_rbs / (l + 1);
        std::vector<double> rates(l + 1, 0.0);
        for (int r = 0; r <= l; ++r) {
            x.k_ul(r, l) = share;
            x.p_ul(r, l) = half_p;
            const auto& ue = sc.fl_ues[ordering.sigma[r]];
            rates[r] = rate::ul_rate(share, half_p, ue.channel_gain_sq, radio);
        }
        double len;
        if (l + 1 < s_count) {
            len = start[l + 1] - start[l];
        } else {
            len = min_len;
            for (int r = 0; r <= l; ++r) {
                if (remaining[r] > 0) {
                    len = std::max(len, remaining[r] / rates[r]);
                }
            }
        }
        x.t_ul[l] = len;
        for (int r = 0; r <= l; ++r) {
            remaining[r] -= rates[r] * len;
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// Algorithm 1

Algorithm1Result run_algorithm1(const Scenario& sc, const Ordering& ordering, const Algorithm1Options& opts,
                                const SessionSchedule* init)
{
    const int s_count = sc.num_fl();
    const SessionLayout lay(s_count, sc.num_hb());
    SessionSchedule x = init ? *init : init_feasible(sc, ordering);
    if (!(x.ordering == ordering)) {
        throw std::invalid_argument("run_algorithm1: initial schedule uses a different ordering");
    }
    for (int l = 0; l < s_count; ++l) {
        x.t_dl[l] = std::max(x.t_dl[l], 2.0 * opts.duration_guard);
        x.t_ul[l] = std::max(x.t_ul[l], 2.0 * opts.duration_guard);
    }

    Algorithm1Result res;
    auto record = [&](int n, const SessionSchedule& s, double sub, int newton) {
        const RoundOutcome o = evaluate(s, sc);
        res.trace.push_back({n, o.objective, o.latency_s, o.total_energy(), sub, newton});
    };
    record(0, x, kInf, 0);

    Eigen::VectorXd v = lay.pack(x);
    double prev = kInf;
    for (int n = 1; n <= opts.n_max; ++n) {
        const AuxVars aux = update_aux(sc, x);
        const auto prog = build_subproblem(sc, ordering, aux, opts.duration_guard);
        const auto rep = convex::solve(prog, v, opts.solver);
        if (rep.status != convex::SolveStatus::Optimal) {
            throw SolverError(n, convex::to_string(rep.status));
        }
        v = rep.x_opt;
        x = lay.unpack(v, ordering);
        record(n, x, rep.objective_value, rep.newton_iterations);
        res.iterations = n;
        const double cur = rep.objective_value;
        if (std::abs(cur - prev) / std::abs(cur) <= opts.eps) {
            res.converged = true;
            break;
        }
        prev = cur;
    }
    res.schedule = snap_durations(x, opts.snap_below);
    res.outcome = evaluate(res.schedule, sc);
    return res;
}

std::vector<RankedOrdering> enumerate_orderings(const Scenario& sc, int cap, const Algorithm1Options& opts,
                                                int threads)
{
    const int s_count = sc.num_fl();
    if (s_count > cap) {
        throw std::invalid_argument("enumerate_orderings: S = " + std::to_string(s_count) + " exceeds cap " +
                                    std::to_string(cap));
    }
    std::vector<Ordering> all;
    Ordering o = Ordering::identity(s_count);
    do {
        all.push_back(o);
    } while (std::next_permutation(o.sigma.begin(), o.sigma.end()));

    std::vector<RankedOrdering> ranked(all.size());
    parallel_for(static_cast<int>(all.size()), threads, [&](int i) {
        ranked[i].ordering = all[i];
        try {
            const auto r = run_algorithm1(sc, all[i], opts);
            ranked[i].objective = r.outcome.objective;
            ranked[i].feasible = r.outcome.feasible();
        } catch (const std::runtime_error&) {
            ranked[i].objective = kInf;
            ranked[i].feasible = false;
        }
    });
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedOrdering& a, const RankedOrdering& b) { return a.objective < b.objective; });
    return ranked;
}

}  // namespace flsched
