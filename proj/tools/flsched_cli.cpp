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


// Command-line front end: solve | pareto | orderings | sweep | baselines.
// Exit codes: 0 success, 1 infeasible or failed run, 2 usage error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flsched/experiments.hpp"
#include "flsched/serialization.hpp"

using namespace flsched;

namespace {

constexpr int kOk = 0;
constexpr int kInfeasible = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonArgs {
    std::string scenario_path;
    std::uint64_t seed = 1;
    std::vector<std::string> overrides;  // key=value
    std::string out;
    double delta = 0.0;
    double eps = 1e-4;
    int max_iter = 50;
    int threads = 0;
};

ParameterMap parse_overrides(const std::vector<std::string>& items)
{
    ParameterMap map;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw UsageError("--set expects key=value, got '" + item + "'");
        }
        try {
            map[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw UsageError("--set value is not a number: '" + item + "'");
        }
    }
    return map;
}

Scenario make_scenario(const CommonArgs& a)
{
    if (!a.scenario_path.empty()) {
        auto loaded = io::load_scenario(a.scenario_path);
        for (const auto& w : loaded.warnings) {
            std::cerr << "warning: " << w << '\n';
        }
        return loaded.scenario;
    }
    try {
        return generate(a.seed, parse_overrides(a.overrides));
    } catch (const ScenarioError& e) {
        throw UsageError(e.what());
    }
}

exp::RunConfig make_config(const CommonArgs& a)
{
    exp::RunConfig cfg;
    cfg.session.eps = cfg.rigid.eps = a.eps;
    cfg.session.n_max = cfg.rigid.n_max = a.max_iter;
    cfg.sim.tti_s = a.delta;
    cfg.replay_tti_s = a.delta;
    cfg.threads = a.threads;
    return cfg;
}

std::vector<exp::Method> parse_methods(const std::vector<std::string>& names)
{
    if (names.empty()) {
        throw UsageError("at least one method is required");
    }
    std::vector<exp::Method> out;
    for (const auto& n : names) {
        const auto m = exp::parse_method(n);
        if (!m) {
            throw UsageError("unknown method '" + n + "'");
        }
        out.push_back(*m);
    }
    return out;
}

// Writes to --out when given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) {
                throw std::runtime_error("cannot write " + path);
            }
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void write_json(const std::string& path, const nlohmann::json& doc)
{
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write " + path);
    }
    os << doc.dump(2) << '\n';
}

void add_common(CLI::App* cmd, CommonArgs& a)
{
    cmd->add_option("--scenario", a.scenario_path, "Scenario JSON file (overrides --seed and --set)");
    cmd->add_option("--seed", a.seed, "Seed for the generated scenario")->capture_default_str();
    cmd->add_option("--set", a.overrides, "Generator override key=value (repeatable)");
    cmd->add_option("--out", a.out, "Output CSV path (default stdout)");
    cmd->add_option("--delta", a.delta, "Slot length in seconds (default: scenario TTI)");
    cmd->add_option("--eps", a.eps, "Relative stopping tolerance")->capture_default_str();
    cmd->add_option("--max-iter", a.max_iter, "Iteration cap of the iterative solvers")->capture_default_str();
    cmd->add_option("--threads", a.threads, "Worker threads, 0 = all cores")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Session-based FL round scheduling experiments"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string method;
    std::string trace_path;
    std::string schedule_path;
    std::string audit_path;
    std::vector<double> lambdas{0.005, 0.05, 0.5};
    std::vector<std::string> method_names{"session", "rigid", "msr", "mmr"};
    std::string param;
    std::vector<double> values;
    std::string timeline_prefix;

    auto* solve = app.add_subcommand("solve", "Run one method and print a CSV row");
    add_common(solve, common);
    solve->add_option("--method", method, "session | rigid | msr | mmr")->required();
    solve->add_option("--trace", trace_path, "Write the per-iteration trace CSV (session, rigid)");
    solve->add_option("--schedule", schedule_path, "Write the schedule JSON (session, rigid)");
    solve->add_option("--audit", audit_path, "Write the slot replay audit JSON (session, rigid)");

    auto* pareto = app.add_subcommand("pareto", "Energy-latency trade-off over lambda");
    add_common(pareto, common);
    pareto->add_option("--lambda", lambdas, "Energy weights")->delimiter(',')->capture_default_str();
    pareto->add_option("--method", method_names, "Methods")->delimiter(',')->capture_default_str();

    auto* orderings = app.add_subcommand("orderings", "Rank every uplink ordering (S <= 7)");
    add_common(orderings, common);

    auto* sweep = app.add_subcommand("sweep", "Vary one parameter");
    add_common(sweep, common);
    sweep->add_option("--param", param, "lambda | K | theta (kByte/s) | seed")->required();
    sweep->add_option("--values", values, "Parameter values")->delimiter(',')->required();
    sweep->add_option("--method", method_names, "Methods")->delimiter(',')->capture_default_str();

    auto* baselines = app.add_subcommand("baselines", "Run the max-sum-rate and max-min-rate slot schedulers");
    add_common(baselines, common);
    baselines->add_option("--timeline", timeline_prefix, "Write <prefix>_msr.csv and <prefix>_mmr.csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        const Scenario sc = make_scenario(common);
        const exp::RunConfig cfg = make_config(common);

        if (solve->parsed()) {
            const auto m = exp::parse_method(method);
            if (!m) {
                throw UsageError("unknown method '" + method + "'");
            }
            const auto run = exp::run_method(sc, *m, cfg);
            if (!run.error.empty()) {
                std::cerr << "error: " << run.error << '\n';
            }
            Output out(common.out);
            exp::write_solve_csv(out.stream(), {exp::make_row(run, sc.rng_seed)});
            if (!trace_path.empty() && !run.trace.empty()) {
                std::ofstream os(trace_path);
                io::write_trace_csv(os, run.trace);
            }
            if (!schedule_path.empty() && run.schedule) {
                write_json(schedule_path, io::to_json(*run.schedule));
            }
            if (!audit_path.empty() && run.audit) {
                write_json(audit_path, io::to_json(*run.audit));
            }
            if (!run.feasible) {
                std::cerr << "error: " << exp::to_string(*m) << " produced no feasible schedule\n";
                return kInfeasible;
            }
            return kOk;
        }

        if (pareto->parsed()) {
            for (double l : lambdas) {
                if (!(l >= 0.0)) {
                    throw UsageError("lambda values must be nonnegative");
                }
            }
            const auto rows = exp::sweep(sc, exp::SweepParameter::Lambda, lambdas, parse_methods(method_names), cfg);
            Output out(common.out);
            exp::write_sweep_csv(out.stream(), "lambda", rows);
            std::vector<exp::ResultRow> session_rows;
            std::vector<exp::ResultRow> rigid_rows;
            for (const auto& r : rows) {
                if (r.method == exp::Method::Session) {
                    session_rows.push_back(r);
                } else if (r.method == exp::Method::Rigid) {
                    rigid_rows.push_back(r);
                }
            }
            if (!session_rows.empty() && !rigid_rows.empty()) {
                std::cerr << "session front weakly dominates rigid front: "
                          << (exp::weakly_dominates(session_rows, rigid_rows) ? "true" : "false") << '\n';
            }
            return kOk;
        }

        if (orderings->parsed()) {
            if (sc.num_fl() > 7) {
                throw UsageError("orderings needs S <= 7, scenario has S = " + std::to_string(sc.num_fl()));
            }
            const auto rows = exp::rank_orderings(sc, cfg);
            Output out(common.out);
            exp::write_orderings_csv(out.stream(), rows);
            return kOk;
        }

        if (sweep->parsed()) {
            const auto p = exp::parse_parameter(param);
            if (!p) {
                throw UsageError("unknown parameter '" + param + "'");
            }
            const auto methods = parse_methods(method_names);
            const auto rows = exp::sweep(sc, *p, values, methods, cfg, parse_overrides(common.overrides));
            Output out(common.out);
            exp::write_sweep_csv(out.stream(), exp::to_string(*p), rows);
            return kOk;
        }

        if (baselines->parsed()) {
            std::vector<exp::ResultRow> rows;
            bool all_ok = true;
            for (auto policy : {sim::Policy::MaxSumRate, sim::Policy::MaxMinRate}) {
                sim::SimOptions so = cfg.sim;
                so.record_timeline = !timeline_prefix.empty();
                exp::MethodRun run;
                run.method = policy == sim::Policy::MaxSumRate ? exp::Method::Msr : exp::Method::Mmr;
                try {
                    const auto res = sim::run_policy(sc, policy, so);
                    run.outcome = res.outcome;
                    run.feasible = res.outcome.feasible();
                    if (so.record_timeline) {
                        std::ofstream os(timeline_prefix + "_" + sim::to_string(policy) + ".csv");
                        io::write_timeline_csv(os, res);
                    }
                } catch (const std::exception& e) {
                    run.error = e.what();
                    std::cerr << "error: " << e.what() << '\n';
                }
                all_ok = all_ok && run.feasible;
                rows.push_back(exp::make_row(run, sc.rng_seed));
            }
            Output out(common.out);
            exp::write_solve_csv(out.stream(), rows);
            return all_ok ? kOk : kInfeasible;
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInfeasible;
    }
    return kUsage;
}
