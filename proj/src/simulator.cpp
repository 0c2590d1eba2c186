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

#include "flsched/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "flsched/ratemodel.hpp"

namespace flsched::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr long kNever = std::numeric_limits<long>::max();
// Bits below this fraction of the payload count as delivered.
constexpr double kDoneFrac = 1e-9;

// Rate of one FL flow as a function of its RB count.
struct RateCurve {
    bool uplink = false;
    double per_rb = 0.0;     // downlink bit/s per RB
    double gain_sq = 0.0;
    double power_w = 0.0;
    const RadioConstants* radio = nullptr;

    double rate(double k) const
    {
        if (!(k > 0.0)) {
            return 0.0;
        }
        return uplink ? rate::ul_rate(k, power_w, gain_sq, *radio) : per_rb * k;
    }

    // Supremum of the rate over all RB counts.
    double saturation() const
    {
        if (!uplink) {
            return kInf;
        }
        return power_w * gain_sq / (radio->noise_psd_w_per_hz * std::log(2.0));
    }

    // d rate / d k.
    double marginal(double k) const
    {
        if (!uplink) {
            return per_rb;
        }
        if (!(k > 0.0)) {
            return kInf;
        }
        const double bw = radio->rb_bandwidth_hz();
        const double x = power_w * gain_sq / (k * bw * radio->noise_psd_w_per_hz);
        return bw * (std::log1p(x) - x / (1.0 + x)) / std::log(2.0);
    }

    // Smallest k with rate(k) >= r; infinite when r is out of reach.
    double rbs_for_rate(double r) const
    {
        if (!(r > 0.0)) {
            return 0.0;
        }
        if (!uplink) {
            return r / per_rb;
        }
        if (r >= saturation()) {
            return kInf;
        }
        double lo = 0.0;
        double hi = 1.0;
        while (rate(hi) < r) {
            hi *= 2.0;
        }
        for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (rate(mid) < r ? lo : hi) = mid;
        }
        return hi;
    }

    // RB count at which the marginal rate falls to mu (uplink only).
    double rbs_for_marginal(double mu) const
    {
        double lo = 0.0;
        double hi = 1.0;
        while (marginal(hi) > mu && hi < 1e12) {
            hi *= 2.0;
        }
        for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (marginal(mid) > mu ? lo : hi) = mid;
        }
        return hi;
    }
};

// Greedy max-sum-rate split of the budget: every RB goes to the flow with
// the highest marginal rate, no flow receiving more than its cap.
std::vector<double> max_sum_rate(const std::vector<RateCurve>& curves, const std::vector<double>& caps,
                                 double budget)
{
    const std::size_t n = curves.size();
    std::vector<double> k(n, 0.0);
    const double cap_total = std::accumulate(caps.begin(), caps.end(), 0.0);
    if (cap_total <= budget) {
        return caps;
    }
    auto take = [&](double mu, std::vector<double>& out) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (curves[i].uplink) {
                out[i] = std::min(caps[i], curves[i].rbs_for_marginal(mu));
            } else {
                out[i] = curves[i].per_rb > mu ? caps[i] : 0.0;
            }
            total += out[i];
        }
        return total;
    };
    double hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        hi = std::max(hi, curves[i].uplink ? curves[i].marginal(1e-9 * budget) : curves[i].per_rb);
    }
    hi *= 2.0;
    double lo = 0.0;
    std::vector<double> trial(n);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (take(mid, trial) > budget ? lo : hi) = mid;
    }
    double used = take(hi, k);
    // Flows whose constant marginal sits at the water level absorb the rest.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return curves[a].marginal(k[a]) > curves[b].marginal(k[b]);
    });
    for (std::size_t i : order) {
        const double add = std::min(caps[i] - k[i], budget - used);
        if (add > 0.0) {
            k[i] += add;
            used += add;
        }
    }
    return k;
}

// Max-min split: raise a common level of cumulative average rate as far as
// the budget allows. need[i] is the rate flow i must get this slot to reach
// level L, namely L * slope[i] - offset[i].
std::vector<double> max_min_rate(const std::vector<RateCurve>& curves, const std::vector<double>& caps,
                                 const std::vector<double>& slope, const std::vector<double>& offset,
                                 double budget)
{
    const std::size_t n = curves.size();
    const double cap_total = std::accumulate(caps.begin(), caps.end(), 0.0);
    if (cap_total <= budget) {
        return caps;
    }
    std::vector<double> k(n, 0.0);
    auto take = [&](double level, std::vector<double>& out) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = level * slope[i] - offset[i];
            out[i] = std::min(caps[i], curves[i].rbs_for_rate(r));
            total += out[i];
        }
        return total;
    };
    double hi = 1.0;
    std::vector<double> trial(n);
    while (take(hi, trial) <= budget) {
        hi *= 2.0;
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (take(mid, trial) > budget ? hi : lo) = mid;
    }
    double used = take(lo, k);
    for (std::size_t i = 0; i < n && used < budget; ++i) {
        const double add = std::min(caps[i] - k[i], budget - used);
        if (add > 0.0) {
            k[i] += add;
            used += add;
        }
    }
    return k;
}

void append_segment(std::vector<TimelineSegment>& tl, long first, long count, int flow, double rbs, double power,
                    double bits)
{
    for (auto it = tl.rbegin(); it != tl.rend(); ++it) {
        if (it->last_slot < first - 1) {
            break;
        }
        if (it->flow == flow && it->last_slot == first - 1 && it->rbs == rbs && it->power_w == power) {
            it->last_slot = first + count - 1;
            it->bits += bits;
            return;
        }
    }
    tl.push_back({first, first + count - 1, flow, rbs, power, bits});
}

}  // namespace

const char* to_string(Policy p)
{
    return p == Policy::MaxSumRate ? "msr" : "mmr";
}

const char* to_string(FlowKind k)
{
    switch (k) {
    case FlowKind::HbDl:
        return "hb_dl";
    case FlowKind::FlDl:
        return "fl_dl";
    case FlowKind::FlUl:
        return "fl_ul";
    }
    return "?";
}

namespace {

// Largest-remainder rounding into the whole RBs of the residual band, each
// flow at most its rounded-up cap.
std::vector<double> round_to_whole_rbs(const std::vector<double>& rbs, const std::vector<double>& caps,
                                       double residual)
{
    const std::size_t n = rbs.size();
    std::vector<double> out(n);
    double assigned = 0.0;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = std::floor(rbs[i] + 1e-9);
        assigned += out[i];
        order[i] = i;
    }
    double spare = std::floor(residual + 1e-9) - assigned;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rbs[a] - out[a] > rbs[b] - out[b]; });
    for (std::size_t i : order) {
        if (spare < 1.0) {
            break;
        }
        if (out[i] + 1.0 <= std::ceil(caps[i] - 1e-9) && rbs[i] - out[i] > 0.0) {
            out[i] += 1.0;
            spare -= 1.0;
        }
    }
    return out;
}

}  // namespace

PolicyResult run_policy(const Scenario& sc, Policy policy, const SimOptions& opts)
{
    const auto& radio = sc.radio;
    const double tti = opts.tti_s > 0.0 ? opts.tti_s : radio.tti_s;
    if (!(tti > 0.0)) {
        throw std::invalid_argument("run_policy: TTI must be positive");
    }
    const int s_count = sc.num_fl();
    const int e_count = sc.num_hb();
    const double big_k = radio.num_rbs;
    const auto k_res = hb_reservations(sc);
    const double k_res_total = std::accumulate(k_res.begin(), k_res.end(), 0.0);
    if (k_res_total > big_k) {
        throw InfeasibleError("HB reservation exceeds the band");
    }
    const double residual = big_k - k_res_total;

    PolicyResult res;
    res.tti_s = tti;
    auto& flows = res.flows;
    std::vector<RateCurve> curve;
    for (int e = 0; e < e_count; ++e) {
        flows.push_back({e, FlowKind::HbDl, e, kInf, 0, -1, 0.0, 0.0});
        curve.push_back({false, rate::dl_rate_per_rb(sc.hb_ues[e].channel_gain_sq, radio), 0, 0, &radio});
    }
    for (int j = 0; j < s_count; ++j) {
        const double d = sc.workload(j).model_bits;
        flows.push_back({e_count + j, FlowKind::FlDl, j, d, 0, -1, 0.0, 0.0});
        curve.push_back({false, rate::dl_rate_per_rb(sc.fl_ues[j].channel_gain_sq, radio), 0, 0, &radio});
    }
    for (int j = 0; j < s_count; ++j) {
        const double d = sc.workload(j).model_bits;
        flows.push_back({e_count + s_count + j, FlowKind::FlUl, j, d, kNever, -1, 0.0, 0.0});
        curve.push_back({true, 0.0, sc.fl_ues[j].channel_gain_sq, radio.ue_max_power_w, &radio});
    }
    std::vector<long> cp_slots(s_count);
    for (int j = 0; j < s_count; ++j) {
        cp_slots[j] = static_cast<long>(std::ceil(rate::min_compute_time(sc.workload(j)) / tti - 1e-9));
    }

    std::vector<double> hb_bits(e_count, 0.0);
    int fl_pending = 2 * s_count;
    long n = 0;
    while (fl_pending > 0) {
        if (n >= opts.max_slots) {
            throw std::runtime_error("run_policy: round did not finish within " + std::to_string(opts.max_slots) +
                                     " slots");
        }
        std::vector<int> active;
        long next_activation = kNever;
        for (int f = e_count; f < static_cast<int>(flows.size()); ++f) {
            if (flows[f].completed_at >= 0) {
                continue;
            }
            if (flows[f].active_from <= n) {
                active.push_back(f);
            } else {
                next_activation = std::min(next_activation, flows[f].active_from);
            }
        }

        std::vector<double> rbs(active.size(), 0.0);
        if (!active.empty()) {
            std::vector<RateCurve> cv;
            std::vector<double> caps;
            for (int f : active) {
                cv.push_back(curve[f]);
                caps.push_back(std::min(residual, curve[f].rbs_for_rate(flows[f].bits_remaining / tti)));
            }
            if (policy == Policy::MaxSumRate) {
                rbs = max_sum_rate(cv, caps, residual);
            } else {
                std::vector<double> slope;
                std::vector<double> offset;
                for (int f : active) {
                    slope.push_back(static_cast<double>(n - flows[f].active_from + 1));
                    offset.push_back(flows[f].cumulative_bits / tti);
                }
                rbs = max_min_rate(cv, caps, slope, offset, residual);
            }
            if (opts.integer_rbs) {
                rbs = round_to_whole_rbs(rbs, caps, residual);
            }
        }

        // Slots this allocation can be held: until a flow finishes or a new one arrives.
        long span = 1;
        if (active.empty()) {
            span = next_activation == kNever ? 1 : next_activation - n;
        } else if (policy == Policy::MaxSumRate) {
            span = next_activation == kNever ? opts.max_slots : next_activation - n;
            for (std::size_t i = 0; i < active.size(); ++i) {
                const double per_slot = curve[active[i]].rate(rbs[i]) * tti;
                if (per_slot > 0.0) {
                    const double full = std::floor(flows[active[i]].bits_remaining / per_slot);
                    span = std::min(span, static_cast<long>(std::max(1.0, std::min(full, 1e15))));
                }
            }
        }
        span = std::max(1L, std::min(span, opts.max_slots - n));

        double used = 0.0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            auto& fl = flows[active[i]];
            used += rbs[i];
            const double bits = std::min(curve[active[i]].rate(rbs[i]) * tti * span, fl.bits_remaining);
            fl.bits_remaining -= bits;
            fl.cumulative_bits += bits;
            const double power = fl.kind == FlowKind::FlUl && rbs[i] > 0 ? radio.ue_max_power_w : 0.0;
            fl.energy_spent += power * tti * span;
            if (opts.record_timeline && rbs[i] > 0) {
                append_segment(res.timeline, n, span, fl.id, rbs[i], power, bits);
            }
            if (fl.bits_remaining <= kDoneFrac * sc.workload(fl.ue).model_bits) {
                fl.bits_remaining = 0.0;
                fl.completed_at = n + span - 1;
                --fl_pending;
                if (fl.kind == FlowKind::FlDl) {
                    flows[e_count + s_count + fl.ue].active_from = n + span + cp_slots[fl.ue];
                }
            }
        }
        const double leftover = std::max(0.0, residual - used);
        for (int e = 0; e < e_count; ++e) {
            const double extra = k_res_total > 0 ? leftover * k_res[e] / k_res_total : leftover / e_count;
            const double k = k_res[e] + extra;
            const double bits = curve[e].rate(k) * tti * span;
            hb_bits[e] += bits;
            flows[e].cumulative_bits += bits;
            if (opts.record_timeline) {
                append_segment(res.timeline, n, span, e, k, 0.0, bits);
            }
            used += k;
        }
        res.max_slot_rbs = std::max(res.max_slot_rbs, e_count > 0 ? used : used + leftover);
        n += span;
    }
    res.slots = n;

    auto& out = res.outcome;
    out.latency_s = static_cast<double>(n) * tti;
    auto& dl = out.residuals["dl_completion"];
    auto& ul = out.residuals["ul_completion"];
    auto& budget = out.residuals["rb_budget"];
    auto& hb = out.residuals["hb_rate"];
    budget.scale = big_k;
    budget.absolute.push_back(res.max_slot_rbs - big_k);
    hb.scale = std::max(sc.hb_threshold_bps, 1.0);
    for (int j = 0; j < s_count; ++j) {
        const auto& w = sc.workload(j);
        dl.scale = ul.scale = w.model_bits;
        dl.absolute.push_back(flows[e_count + j].bits_remaining);
        ul.absolute.push_back(flows[e_count + s_count + j].bits_remaining);
        out.e_cp.push_back(rate::compute_energy(w, w.f_max_hz));
        out.e_cm.push_back(flows[e_count + s_count + j].energy_spent);
        out.e_tot.push_back(out.e_cp.back() + out.e_cm.back());
        out.compute_time_s.push_back(static_cast<double>(cp_slots[j]) * tti);
    }
    for (int e = 0; e < e_count; ++e) {
        const double avg = out.latency_s > 0 ? hb_bits[e] / out.latency_s : kInf;
        out.hb_avg_rates.push_back(avg);
        hb.absolute.push_back(out.latency_s > 0 ? sc.hb_threshold_bps - avg : 0.0);
    }
    out.objective = out.latency_s;
    for (int j = 0; j < s_count; ++j) {
        out.objective += sc.workload(j).energy_weight * out.e_tot[j];
    }
    return res;
}

AuditReport replay_schedule(const SessionSchedule& x, const Scenario& sc, double tti_s, double tolerance)
{
    AuditReport rep;
    rep.tolerance = tolerance;
    rep.tti_s = tti_s > 0.0 ? tti_s : sc.radio.tti_s;
    const double tti = rep.tti_s;
    auto note = [&](const std::string& check, int index, double slack) {
        auto [it, fresh] = rep.family_slack.emplace(check, slack);
        if (!fresh) {
            it->second = std::min(it->second, slack);
        }
        if (slack < -tolerance) {
            rep.violations.push_back({check, index, slack});
        }
    };

    const int s_count = sc.num_fl();
    const int e_count = sc.num_hb();
    if (x.num_fl() != s_count || x.num_hb() != e_count || !x.ordering.valid(s_count) || !(tti > 0.0)) {
        note("dimensions", 0, -kInf);
        rep.worst_slack = -kInf;
        return rep;
    }
    const auto& radio = sc.radio;
    const double big_k = radio.num_rbs;

    // Continuous session boundaries: S downlink sessions, the idle period, S uplink sessions.
    std::vector<double> bound{0.0};
    for (int l = 0; l < s_count; ++l) {
        bound.push_back(bound.back() + std::max(0.0, x.t_dl[l]));
    }
    bound.push_back(bound.back() + std::max(0.0, x.t_idle));
    for (int l = 0; l < s_count; ++l) {
        bound.push_back(bound.back() + std::max(0.0, x.t_ul[l]));
    }
    const long total_slots = static_cast<long>(std::ceil(bound.back() / tti - 1e-9));
    rep.slots = total_slots;
    rep.latency_s = static_cast<double>(total_slots) * tti;

    // Each slot carries the allocation of the session holding its midpoint;
    // slots past the continuous end keep the last session's allocation.
    const int n_sessions = 2 * s_count + 1;
    std::vector<long> first(n_sessions);
    std::vector<long> count(n_sessions);
    for (int i = 0; i < n_sessions; ++i) {
        const long lo = static_cast<long>(std::ceil(bound[i] / tti - 0.5));
        long hi = static_cast<long>(std::ceil(bound[i + 1] / tti - 0.5));
        if (i == n_sessions - 1) {
            hi = total_slots;
        }
        first[i] = std::min(lo, total_slots);
        count[i] = std::max(0L, std::min(hi, total_slots) - first[i]);
    }
    auto dl_session = [](int l) { return l; };
    const int idle_session = s_count;
    auto ul_session = [s_count](int l) { return s_count + 1 + l; };
    auto secs = [&](int i) { return static_cast<double>(count[i]) * tti; };

    // Downlink: bits and the end of the slot in which each UE's last needed bit arrived.
    std::vector<double> dl_done(s_count, 0.0);
    for (int j = 0; j < s_count; ++j) {
        const double d = sc.workload(j).model_bits;
        const double per_rb = rate::dl_rate_per_rb(sc.fl_ues[j].channel_gain_sq, radio);
        double delivered = 0.0;
        for (int l = 0; l <= j; ++l) {
            delivered += per_rb * std::max(0.0, x.k_dl[l]) * secs(dl_session(l));
        }
        note("dl_bits", j, (delivered - d) / d);
        const double target = std::min(d, delivered) * (1.0 - kDoneFrac);
        double bits = 0.0;
        for (int l = 0; l <= j && target > 0.0; ++l) {
            const double r = per_rb * std::max(0.0, x.k_dl[l]);
            const int i = dl_session(l);
            if (r > 0.0 && count[i] > 0 && bits + r * secs(i) >= target) {
                const long k = std::clamp(static_cast<long>(std::ceil((target - bits) / (r * tti))), 1L, count[i]);
                dl_done[j] = static_cast<double>(first[i] + k) * tti;
                break;
            }
            bits += r * secs(i);
        }
    }

    // Uplink: bits over the rank's sessions and the training window before them.
    for (int rank = 0; rank < s_count; ++rank) {
        const int j = x.ordering.sigma[rank];
        const auto& ue = sc.fl_ues[j];
        const double d = ue.workload->model_bits;
        double bits = 0.0;
        for (int l = rank; l < s_count; ++l) {
            bits += rate::ul_rate(std::max(0.0, x.k_ul(rank, l)), std::max(0.0, x.p_ul(rank, l)), ue.channel_gain_sq,
                                  radio) *
                    secs(ul_session(l));
        }
        note("ul_bits", j, (bits - d) / d);
        long start = total_slots;
        for (int l = rank; l < s_count; ++l) {
            if (count[ul_session(l)] > 0 && x.k_ul(rank, l) > 0.0 && x.p_ul(rank, l) > 0.0) {
                start = first[ul_session(l)];
                break;
            }
        }
        const double tau_min = rate::min_compute_time(*ue.workload);
        const double window = static_cast<double>(start) * tti - dl_done[j];
        note("compute_window", j, (window - tau_min) / tau_min);
    }

    // Per-slot budgets and powers; allocations are constant within a session.
    for (int l = 0; l < s_count; ++l) {
        double used = x.k_dl[l];
        for (int e = 0; e < e_count; ++e) {
            used += x.k_hb_dl(e, l);
        }
        if (count[dl_session(l)] > 0) {
            note("rb_budget", l, (big_k - used) / big_k);
        }
        used = 0.0;
        double neg = 0.0;
        for (int r = 0; r <= l; ++r) {
            used += x.k_ul(r, l);
            neg = std::min({neg, x.k_ul(r, l), x.p_ul(r, l)});
            note("power", r, (radio.ue_max_power_w - x.p_ul(r, l)) / radio.ue_max_power_w);
        }
        for (int e = 0; e < e_count; ++e) {
            used += x.k_hb_ul(e, l);
            neg = std::min({neg, x.k_hb_ul(e, l), x.k_hb_dl(e, l)});
        }
        if (count[ul_session(l)] > 0) {
            note("rb_budget", s_count + l, (big_k - used) / big_k);
        }
        note("nonnegativity", l, neg / big_k);
    }

    // HB average over the slotted round; the idle period gives HB the band.
    const auto share = idle_hb_shares(sc);
    for (int e = 0; e < e_count; ++e) {
        const double per_rb = rate::dl_rate_per_rb(sc.hb_ues[e].channel_gain_sq, radio);
        double bits = share[e] * per_rb * secs(idle_session);
        for (int l = 0; l < s_count; ++l) {
            bits += per_rb * (x.k_hb_dl(e, l) * secs(dl_session(l)) + x.k_hb_ul(e, l) * secs(ul_session(l)));
        }
        const double avg = rep.latency_s > 0 ? bits / rep.latency_s : kInf;
        rep.hb_avg_rates.push_back(avg);
        if (sc.hb_threshold_bps > 0.0 && rep.latency_s > 0) {
            note("hb_rate", e, (avg - sc.hb_threshold_bps) / sc.hb_threshold_bps);
        }
    }

    rep.worst_slack = kInf;
    for (const auto& [name, slack] : rep.family_slack) {
        rep.worst_slack = std::min(rep.worst_slack, slack);
    }
    if (rep.family_slack.empty()) {
        rep.worst_slack = 0.0;
    }
    return rep;
}

}  // namespace flsched::sim
