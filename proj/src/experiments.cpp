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

#include "flsched/experiments.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <utility>

#include "flsched/parallel.hpp"
#include "flsched/serialization.hpp"

namespace flsched::exp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::pair<Method, const char*> kMethods[] = {
    {Method::Session, "session"}, {Method::Rigid, "rigid"}, {Method::Msr, "msr"}, {Method::Mmr, "mmr"}};

constexpr std::pair<SweepParameter, const char*> kParameters[] = {{SweepParameter::Lambda, "lambda"},
                                                                  {SweepParameter::NumRbs, "K"},
                                                                  {SweepParameter::Theta, "theta"},
                                                                  {SweepParameter::Seed, "seed"}};

void write_row_tail(std::ostream& os, const ResultRow& r)
{
    os << to_string(r.method) << ',' << r.seed << ',' << io::fmt(r.latency_s) << ',' << io::fmt(r.energy_j) << ','
       << io::fmt(r.objective) << ',' << (r.feasible ? "true" : "false") << ',' << r.iterations << '\n';
}

}  // namespace

const char* to_string(Method m)
{
    for (const auto& [k, name] : kMethods) {
        if (k == m) {
            return name;
        }
    }
    return "?";
}

std::optional<Method> parse_method(const std::string& name)
{
    for (const auto& [k, n] : kMethods) {
        if (name == n) {
            return k;
        }
    }
    return std::nullopt;
}

const char* to_string(SweepParameter p)
{
    for (const auto& [k, name] : kParameters) {
        if (k == p) {
            return name;
        }
    }
    return "?";
}

std::optional<SweepParameter> parse_parameter(const std::string& name)
{
    for (const auto& [k, n] : kParameters) {
        if (name == n) {
            return k;
        }
    }
    return std::nullopt;
}

MethodRun run_method(const Scenario& sc, Method m, const RunConfig& cfg)
{
    MethodRun run;
    run.method = m;
    try {
        switch (m) {
        case Method::Session: {
            const auto rigid = solve_rigid(sc, cfg.rigid);
            const auto res = run_algorithm1(sc, ordering_from_rigid(rigid.solution, sc), cfg.session);
            run.outcome = res.outcome;
            run.iterations = res.iterations;
            run.trace = res.trace;
            run.schedule = res.schedule;
            break;
        }
        case Method::Rigid: {
            const auto res = solve_rigid(sc, cfg.rigid);
            run.outcome = res.outcome;
            run.iterations = res.iterations;
            run.trace = res.trace;
            run.schedule = rigid_to_session(res.solution, sc);
            break;
        }
        case Method::Msr:
        case Method::Mmr: {
            const auto res =
                sim::run_policy(sc, m == Method::Msr ? sim::Policy::MaxSumRate : sim::Policy::MaxMinRate, cfg.sim);
            run.outcome = res.outcome;
            break;
        }
        }
        if (run.schedule) {
            run.audit = sim::replay_schedule(*run.schedule, sc, cfg.replay_tti_s);
        }
        run.feasible = run.outcome.feasible();
    } catch (const std::exception& e) {
        run.error = e.what();
        run.feasible = false;
    }
    return run;
}

ResultRow make_row(const MethodRun& run, std::uint64_t seed, std::string label)
{
    ResultRow r;
    r.label = std::move(label);
    r.method = run.method;
    r.seed = seed;
    r.feasible = run.feasible;
    r.iterations = run.iterations;
    if (run.error.empty()) {
        r.latency_s = run.outcome.latency_s;
        r.energy_j = run.outcome.total_energy();
        r.objective = run.outcome.objective;
    } else {
        r.latency_s = r.energy_j = r.objective = kNaN;
    }
    return r;
}

void write_solve_csv(std::ostream& os, const std::vector<ResultRow>& rows)
{
    os << "method,seed,T_s,E_total_J,objective,feasible,iterations\n";
    for (const auto& r : rows) {
        write_row_tail(os, r);
    }
}

void write_sweep_csv(std::ostream& os, const std::string& name, const std::vector<ResultRow>& rows)
{
    os << name << ",method,seed,T_s,E_total_J,objective,feasible,iterations\n";
    for (const auto& r : rows) {
        os << r.label << ',';
        write_row_tail(os, r);
    }
}

Scenario with_parameter(const Scenario& base, SweepParameter p, double value, const ParameterMap& gen_overrides)
{
    Scenario sc = base;
    switch (p) {
    case SweepParameter::Lambda:
        if (!(value >= 0.0)) {
            throw std::invalid_argument("lambda must be nonnegative");
        }
        for (auto& ue : sc.fl_ues) {
            ue.workload->energy_weight = value;
        }
        break;
    case SweepParameter::NumRbs:
        if (!(value >= 1.0) || value != std::floor(value)) {
            throw std::invalid_argument("K must be a positive integer");
        }
        sc.radio.num_rbs = static_cast<int>(value);
        break;
    case SweepParameter::Theta:
        if (!(value >= 0.0)) {
            throw std::invalid_argument("theta must be nonnegative");
        }
        sc.hb_threshold_bps = value * 8.0 * 1000.0;
        break;
    case SweepParameter::Seed:
        if (!(value >= 0.0) || value != std::floor(value)) {
            throw std::invalid_argument("seed must be a nonnegative integer");
        }
        sc = generate(static_cast<std::uint64_t>(value), gen_overrides);
        break;
    }
    sc.validate();
    return sc;
}

std::vector<ResultRow> sweep(const Scenario& base, SweepParameter p, const std::vector<double>& values,
                             const std::vector<Method>& methods, const RunConfig& cfg,
                             const ParameterMap& gen_overrides)
{
    if (values.empty() || methods.empty()) {
        throw std::invalid_argument("sweep needs at least one value and one method");
    }
    const int n = static_cast<int>(values.size() * methods.size());
    std::vector<ResultRow> rows(n);
    parallel_for(n, cfg.threads, [&](int i) {
        const double v = values[i / methods.size()];
        const Method m = methods[i % methods.size()];
        const std::string label = io::fmt(v);
        try {
            const Scenario sc = with_parameter(base, p, v, gen_overrides);
            rows[i] = make_row(run_method(sc, m, cfg), sc.rng_seed, label);
        } catch (const std::exception& e) {
            MethodRun failed;
            failed.method = m;
            failed.error = e.what();
            rows[i] = make_row(failed, base.rng_seed, label);
        }
    });
    return rows;
}

bool weakly_dominates(const std::vector<ResultRow>& front, const std::vector<ResultRow>& dominated)
{
    for (const auto& d : dominated) {
        if (!d.feasible) {
            continue;
        }
        bool covered = false;
        for (const auto& f : front) {
            if (f.feasible && f.latency_s <= d.latency_s && f.energy_j <= d.energy_j) {
                covered = true;
                break;
            }
        }
        if (!covered) {
            return false;
        }
    }
    return true;
}

std::vector<OrderingRow> rank_orderings(const Scenario& sc, const RunConfig& cfg, int cap)
{
    const auto rigid = solve_rigid(sc, cfg.rigid);
    const Ordering heuristic = ordering_from_rigid(rigid.solution, sc);
    const auto ranked = enumerate_orderings(sc, cap, cfg.session, cfg.threads);
    std::vector<OrderingRow> rows;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        rows.push_back({static_cast<int>(i) + 1, ranked[i].ordering, ranked[i].objective, ranked[i].feasible,
                        ranked[i].ordering == heuristic});
    }
    return rows;
}

void write_orderings_csv(std::ostream& os, const std::vector<OrderingRow>& rows)
{
    os << "rank,ordering,objective,feasible,rigid_based\n";
    for (const auto& r : rows) {
        os << r.rank << ',' << r.ordering.to_string() << ',' << io::fmt(r.objective) << ','
           << (r.feasible ? "true" : "false") << ',' << (r.rigid_based ? "true" : "false") << '\n';
    }
}

}  // namespace flsched::exp
