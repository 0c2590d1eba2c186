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

#include <doctest.h>

#include <cmath>
#include <map>

#include "flsched/ratemodel.hpp"
#include "flsched/rigid.hpp"
#include "flsched/simulator.hpp"
#include "oracles.hpp"

using namespace flsched;
using sim::Policy;

namespace {

long slots_for(double seconds, double tti) { return static_cast<long>(std::ceil(seconds / tti - 1e-9)); }

}  // namespace

TEST_CASE("a round without FL UEs ends at once")
{
    Scenario sc = generate(1, {{"num_fl", 1}, {"num_hb", 3}});
    sc.fl_ues.clear();
    for (Policy p : {Policy::MaxSumRate, Policy::MaxMinRate}) {
        const auto r = sim::run_policy(sc, p);
        CHECK(r.slots == 0);
        CHECK(r.outcome.latency_s == 0);
    }
}

TEST_CASE("single FL UE without HB matches the closed form")
{
    const Scenario sc = generate(3, {{"num_fl", 1}, {"num_hb", 0}});
    const auto& ue = sc.fl_ues[0];
    const auto& w = *ue.workload;
    const auto& radio = sc.radio;
    const double tti = radio.tti_s;
    const double bw = radio.rb_bandwidth_hz();
    const double dl = w.model_bits / oracle::shannon_dl(radio.num_rbs, bw, radio.bs_power_per_rb_w,
                                                        ue.channel_gain_sq, radio.noise_psd_w_per_hz);
    const double ul = w.model_bits / oracle::shannon_ul(radio.num_rbs, radio.ue_max_power_w, bw, ue.channel_gain_sq,
                                                        radio.noise_psd_w_per_hz);
    const double cp = w.epochs * w.cycles_per_sample * w.samples / w.f_max_hz;
    const long expect = slots_for(dl, tti) + slots_for(cp, tti) + slots_for(ul, tti);
    for (Policy p : {Policy::MaxSumRate, Policy::MaxMinRate}) {
        const auto r = sim::run_policy(sc, p);
        CHECK(r.slots == expect);
        CHECK(r.outcome.latency_s == doctest::Approx(expect * tti));
        CHECK(r.outcome.e_cp[0] == doctest::Approx(w.kappa * w.epochs * w.cycles_per_sample * w.samples *
                                                   w.f_max_hz * w.f_max_hz));
        CHECK(r.outcome.e_cm[0] == doctest::Approx(radio.ue_max_power_w * slots_for(ul, tti) * tti));
        CHECK(r.outcome.feasible());
    }
}

TEST_CASE("policies respect the band, the HB floor and bit conservation")
{
    const Scenario sc = generate(2);
    std::map<Policy, double> latency;
    for (Policy p : {Policy::MaxSumRate, Policy::MaxMinRate}) {
        sim::SimOptions opts;
        opts.record_timeline = true;
        const auto r = sim::run_policy(sc, p, opts);
        latency[p] = r.outcome.latency_s;
        CHECK(r.max_slot_rbs <= sc.radio.num_rbs + 1e-9);
        for (double avg : r.outcome.hb_avg_rates) {
            CHECK(avg >= sc.hb_threshold_bps * (1 - 1e-9));
        }
        std::map<int, double> bits;
        std::map<long, double> per_slot;
        for (const auto& seg : r.timeline) {
            bits[seg.flow] += seg.bits;
            CHECK(seg.first_slot <= seg.last_slot);
            CHECK(seg.last_slot < r.slots);
        }
        for (const auto& f : r.flows) {
            CHECK(bits[f.id] == doctest::Approx(f.cumulative_bits).epsilon(1e-12));
            if (f.kind != sim::FlowKind::HbDl) {
                CHECK(f.completed_at >= 0);
                CHECK(f.cumulative_bits >= sc.workload(f.ue).model_bits * (1 - 1e-9));
            }
        }
        // Every uplink starts after its broadcast and training.
        for (const auto& f : r.flows) {
            if (f.kind == sim::FlowKind::FlUl) {
                const auto& dl = r.flows[sc.num_hb() + f.ue];
                const long cp = slots_for(rate::min_compute_time(sc.workload(f.ue)), r.tti_s);
                CHECK(f.active_from == dl.completed_at + 1 + cp);
            }
        }
        CHECK(r.outcome.feasible());
    }
    MESSAGE("MSR latency " << latency[Policy::MaxSumRate] << " s, MMR latency " << latency[Policy::MaxMinRate] << " s");
}

TEST_CASE("per-slot budget under every slot of a recorded timeline")
{
    const Scenario sc = generate(4, {{"num_fl", 3}, {"num_hb", 4}});
    for (Policy p : {Policy::MaxSumRate, Policy::MaxMinRate}) {
        sim::SimOptions opts;
        opts.record_timeline = true;
        const auto r = sim::run_policy(sc, p, opts);
        std::map<long, double> used;
        for (const auto& seg : r.timeline) {
            for (long s = seg.first_slot; s <= seg.last_slot; ++s) {
                used[s] += seg.rbs;
            }
        }
        for (const auto& [slot, k] : used) {
            REQUIRE(k <= sc.radio.num_rbs + 1e-9);
        }
    }
}

TEST_CASE("integer RBs never finish sooner")
{
    const Scenario sc = generate(5, {{"num_fl", 3}, {"num_hb", 4}});
    sim::SimOptions integer;
    integer.integer_rbs = true;
    const auto a = sim::run_policy(sc, Policy::MaxSumRate);
    const auto b = sim::run_policy(sc, Policy::MaxSumRate, integer);
    CHECK(b.outcome.latency_s >= a.outcome.latency_s);
    CHECK(b.outcome.feasible());
}

TEST_CASE("the slot guard stops runaway rounds")
{
    const Scenario sc = generate(1, {{"num_fl", 2}, {"num_hb", 2}});
    sim::SimOptions opts;
    opts.max_slots = 10;
    CHECK_THROWS_AS(sim::run_policy(sc, Policy::MaxMinRate, opts), std::runtime_error);
    CHECK_THROWS_AS(sim::run_policy(sc, Policy::MaxSumRate, opts), std::runtime_error);
}

TEST_CASE("replay of optimizer schedules")
{
    const Scenario sc = generate(8, {{"num_fl", 4}, {"num_hb", 6}});
    const auto rig = solve_rigid(sc);
    const Ordering ord = ordering_from_rigid(rig.solution, sc);
    const auto ses = run_algorithm1(sc, ord);

    for (const SessionSchedule& x : {ses.schedule, rigid_to_session(rig.solution, sc)}) {
        const auto coarse = sim::replay_schedule(x, sc, 1e-3);
        const auto fine = sim::replay_schedule(x, sc, 1e-5);
        CHECK(coarse.passed(-0.01));
        CHECK(fine.passed(-0.01));
        // Moving one session boundary by up to a slot shifts at most S + 1
        // boundaries that affect a UE's bits or its training window.
        double lipschitz = 0;
        for (int j = 0; j < sc.num_fl(); ++j) {
            const auto& ue = sc.fl_ues[j];
            const double d = ue.workload->model_bits;
            double peak = 0;
            for (int l = 0; l < sc.num_fl(); ++l) {
                peak = std::max(peak, rate::dl_rate(x.k_dl[l], ue.channel_gain_sq, sc.radio));
                for (int r = 0; r <= l; ++r) {
                    if (x.ordering.sigma[r] == j) {
                        peak = std::max(peak, rate::ul_rate(x.k_ul(r, l), x.p_ul(r, l), ue.channel_gain_sq, sc.radio));
                    }
                }
            }
            lipschitz = std::max({lipschitz, (sc.num_fl() + 1) * peak / d,
                                  2.0 * (sc.num_fl() + 1) / rate::min_compute_time(*ue.workload)});
        }
        for (double tti : {1e-3, 1e-4, 1e-5}) {
            const double w = std::min(0.0, sim::replay_schedule(x, sc, tti).worst_slack);
            CHECK(-w <= lipschitz * tti);
        }
        CHECK(std::abs(std::min(0.0, fine.worst_slack)) < std::abs(std::min(0.0, coarse.worst_slack)));
        CHECK(std::abs(coarse.latency_s - evaluate(x, sc).latency_s) <= 2 * sc.num_fl() * 1e-3);
        CHECK(coarse.slots == static_cast<long>(std::ceil(x.latency() / 1e-3 - 1e-9)));
        for (const char* family : {"dl_bits", "ul_bits", "compute_window", "rb_budget", "power", "hb_rate"}) {
            CHECK(coarse.family_slack.count(family) == 1);
        }
    }
}

TEST_CASE("deleting the idle period breaks the first uplink's training window")
{
    const Scenario sc = generate(8, {{"num_fl", 3}, {"num_hb", 4}});
    const auto ses = run_algorithm1(sc, Ordering::identity(3));
    REQUIRE(ses.schedule.t_idle > 1.0);
    SessionSchedule x = ses.schedule;
    x.t_idle = 0;
    const auto rep = sim::replay_schedule(x, sc);
    CHECK_FALSE(rep.passed(-0.01));
    bool first_flagged = false;
    for (const auto& v : rep.violations) {
        if (v.check == "compute_window" && v.index == x.ordering.sigma[0]) {
            first_flagged = true;
            CHECK(v.slack < -0.01);
        }
    }
    CHECK(first_flagged);
}

TEST_CASE("replay never throws on mismatched input")
{
    const Scenario sc = generate(1, {{"num_fl", 3}, {"num_hb", 2}});
    const auto x = SessionSchedule::zeros(2, 2, Ordering::identity(2));
    sim::AuditReport rep;
    CHECK_NOTHROW(rep = sim::replay_schedule(x, sc));
    REQUIRE_FALSE(rep.violations.empty());
    CHECK(rep.violations[0].check == "dimensions");
    CHECK_FALSE(rep.passed(-1.0));
}

TEST_CASE("enum names")
{
    CHECK(std::string(sim::to_string(Policy::MaxSumRate)) == "msr");
    CHECK(std::string(sim::to_string(Policy::MaxMinRate)) == "mmr");
}
