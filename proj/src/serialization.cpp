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

#include "flsched/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace flsched::io {

using nlohmann::json;

namespace {

const json& field(const json& obj, const std::string& key, const std::string& where)
{
    if (!obj.is_object()) {
        throw ScenarioError(where + " must be an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ScenarioError("missing field '" + where + key + "'");
    }
    return *it;
}

double number(const json& obj, const std::string& key, const std::string& where)
{
    const json& v = field(obj, key, where);
    if (!v.is_number()) {
        throw ScenarioError("field '" + where + key + "' must be a number");
    }
    return v.get<double>();
}

long long integer(const json& obj, const std::string& key, const std::string& where)
{
    const json& v = field(obj, key, where);
    if (!v.is_number_integer()) {
        throw ScenarioError("field '" + where + key + "' must be an integer");
    }
    return v.get<long long>();
}

json ue_to_json(const UeRecord& ue)
{
    json j{{"id", ue.id}, {"position", {ue.position[0], ue.position[1]}}, {"channel_gain_sq", ue.channel_gain_sq}};
    if (ue.workload) {
        const auto& w = *ue.workload;
        j["workload"] = {{"model_bits", w.model_bits},   {"epochs", w.epochs},     {"cycles_per_sample", w.cycles_per_sample},
                         {"samples", w.samples},         {"f_max_hz", w.f_max_hz}, {"kappa", w.kappa},
                         {"energy_weight", w.energy_weight}};
    }
    return j;
}

UeRecord ue_from_json(const json& j, UeKind kind, const std::string& where)
{
    UeRecord ue;
    ue.kind = kind;
    ue.id = static_cast<int>(integer(j, "id", where));
    const json& pos = field(j, "position", where);
    if (!pos.is_array() || pos.size() != 2 || !pos[0].is_number() || !pos[1].is_number()) {
        throw ScenarioError("field '" + where + "position' must be a pair of numbers");
    }
    ue.position = {pos[0].get<double>(), pos[1].get<double>()};
    ue.channel_gain_sq = number(j, "channel_gain_sq", where);
    if (kind == UeKind::Fl) {
        const std::string ww = where + "workload.";
        const json& wj = field(j, "workload", where);
        FlWorkload w;
        w.model_bits = number(wj, "model_bits", ww);
        w.epochs = static_cast<int>(integer(wj, "epochs", ww));
        w.cycles_per_sample = number(wj, "cycles_per_sample", ww);
        w.samples = number(wj, "samples", ww);
        w.f_max_hz = number(wj, "f_max_hz", ww);
        w.kappa = number(wj, "kappa", ww);
        w.energy_weight = number(wj, "energy_weight", ww);
        ue.workload = w;
    }
    return ue;
}

json matrix(const Eigen::MatrixXd& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

json vec(const Eigen::VectorXd& v)
{
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

// JSON has no infinity; report it as null.
json finite_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

}  // namespace

std::string fmt(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

json scenario_to_json(const Scenario& sc)
{
    const auto& r = sc.radio;
    json doc;
    doc["radio"] = {{"num_rbs", r.num_rbs},
                    {"subcarrier_spacing_hz", r.subcarrier_spacing_hz},
                    {"subcarriers_per_rb", r.subcarriers_per_rb},
                    {"noise_psd_w_per_hz", r.noise_psd_w_per_hz},
                    {"bs_power_per_rb_w", r.bs_power_per_rb_w},
                    {"ue_max_power_w", r.ue_max_power_w},
                    {"carrier_freq_hz", r.carrier_freq_hz},
                    {"tti_s", r.tti_s}};
    doc["fl_ues"] = json::array();
    for (const auto& ue : sc.fl_ues) {
        doc["fl_ues"].push_back(ue_to_json(ue));
    }
    doc["hb_ues"] = json::array();
    for (const auto& ue : sc.hb_ues) {
        doc["hb_ues"].push_back(ue_to_json(ue));
    }
    doc["hb_threshold"] = sc.hb_threshold_bps;
    doc["cell_radius_m"] = sc.cell_radius_m;
    doc["rng_seed"] = sc.rng_seed;
    return doc;
}

LoadedScenario scenario_from_json(const json& doc)
{
    LoadedScenario out;
    Scenario& sc = out.scenario;
    const json& rj = field(doc, "radio", "");
    auto& r = sc.radio;
    r.num_rbs = static_cast<int>(integer(rj, "num_rbs", "radio."));
    r.subcarrier_spacing_hz = number(rj, "subcarrier_spacing_hz", "radio.");
    r.subcarriers_per_rb = static_cast<int>(integer(rj, "subcarriers_per_rb", "radio."));
    r.noise_psd_w_per_hz = number(rj, "noise_psd_w_per_hz", "radio.");
    r.bs_power_per_rb_w = number(rj, "bs_power_per_rb_w", "radio.");
    r.ue_max_power_w = number(rj, "ue_max_power_w", "radio.");
    r.carrier_freq_hz = number(rj, "carrier_freq_hz", "radio.");
    r.tti_s = number(rj, "tti_s", "radio.");

    for (const char* key : {"fl_ues", "hb_ues"}) {
        const json& list = field(doc, key, "");
        if (!list.is_array()) {
            throw ScenarioError(std::string("field '") + key + "' must be an array");
        }
        const bool fl = std::string(key) == "fl_ues";
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = std::string(key) + "[" + std::to_string(i) + "].";
            (fl ? sc.fl_ues : sc.hb_ues).push_back(ue_from_json(list[i], fl ? UeKind::Fl : UeKind::Hb, where));
        }
    }
    sc.hb_threshold_bps = number(doc, "hb_threshold", "");
    sc.cell_radius_m = number(doc, "cell_radius_m", "");
    const json& seed = field(doc, "rng_seed", "");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
        throw ScenarioError("field 'rng_seed' must be a nonnegative integer");
    }
    sc.rng_seed = seed.get<std::uint64_t>();

    if (!sc.is_channel_sorted()) {
        sc.sort_fl_by_channel();
        out.reordered = true;
        out.warnings.push_back("fl_ues were not sorted by descending channel_gain_sq and have been reordered");
    }
    sc.validate();
    return out;
}

void save_scenario(const Scenario& sc, const std::string& path)
{
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write " + path);
    }
    os << scenario_to_json(sc).dump(2) << '\n';
}

LoadedScenario load_scenario(const std::string& path)
{
    std::ifstream is(path);
    if (!is) {
        throw std::runtime_error("cannot read " + path);
    }
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ScenarioError(path + ": " + e.what());
    }
    return scenario_from_json(doc);
}

json to_json(const SessionSchedule& x)
{
    return {{"ordering", x.ordering.sigma},   {"t_dl", vec(x.t_dl)},       {"t_ul", vec(x.t_ul)},
            {"t_idle", x.t_idle},             {"k_dl", vec(x.k_dl)},       {"k_hb_dl", matrix(x.k_hb_dl)},
            {"k_ul", matrix(x.k_ul)},         {"p_ul", matrix(x.p_ul)},    {"k_hb_ul", matrix(x.k_hb_ul)}};
}

json to_json(const RigidSolution& x)
{
    return {{"k_dl", x.k_dl},           {"k_ul", vec(x.k_ul)},   {"p_ul", vec(x.p_ul)}, {"tau_cp", vec(x.tau_cp)},
            {"t_ul", vec(x.t_ul)},      {"t_epi", x.t_epi},      {"k_hb", x.k_hb}};
}

json to_json(const RoundOutcome& o)
{
    json res = json::object();
    for (const auto& [name, fam] : o.residuals) {
        res[name] = {{"worst_relative", finite_or_null(fam.worst_relative())}, {"scale", fam.scale}};
    }
    json e_cp = json::array();
    json e_cm = json::array();
    json e_tot = json::array();
    for (std::size_t i = 0; i < o.e_tot.size(); ++i) {
        e_cp.push_back(finite_or_null(o.e_cp[i]));
        e_cm.push_back(finite_or_null(o.e_cm[i]));
        e_tot.push_back(finite_or_null(o.e_tot[i]));
    }
    return {{"latency_s", o.latency_s},
            {"objective", finite_or_null(o.objective)},
            {"total_energy_j", finite_or_null(o.total_energy())},
            {"e_cp", e_cp},
            {"e_cm", e_cm},
            {"e_tot", e_tot},
            {"compute_time_s", o.compute_time_s},
            {"hb_avg_rates", o.hb_avg_rates},
            {"feasible", o.feasible()},
            {"residuals", res}};
}

json to_json(const sim::AuditReport& r)
{
    json viol = json::array();
    for (const auto& v : r.violations) {
        viol.push_back({{"check", v.check}, {"index", v.index}, {"slack", finite_or_null(v.slack)}});
    }
    json fam = json::object();
    for (const auto& [k, v] : r.family_slack) {
        fam[k] = finite_or_null(v);
    }
    return {{"tti_s", r.tti_s},           {"slots", r.slots},     {"latency_s", r.latency_s},
            {"worst_slack", finite_or_null(r.worst_slack)}, {"family_slack", fam}, {"violations", viol},
            {"hb_avg_rates", r.hb_avg_rates}};
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace)
{
    os << "iteration,objective,latency_s,energy_j\n";
    for (const auto& row : trace) {
        os << row.iteration << ',' << fmt(row.objective) << ',' << fmt(row.latency_s) << ',' << fmt(row.energy_j)
           << '\n';
    }
}

void write_timeline_csv(std::ostream& os, const sim::PolicyResult& r)
{
    os << "first_slot,last_slot,flow,kind,ue,rbs,power_w,bits\n";
    for (const auto& seg : r.timeline) {
        const auto& f = r.flows.at(seg.flow);
        os << seg.first_slot << ',' << seg.last_slot << ',' << seg.flow << ',' << sim::to_string(f.kind) << ','
           << f.ue << ',' << fmt(seg.rbs) << ',' << fmt(seg.power_w) << ',' << fmt(seg.bits) << '\n';
    }
}

}  // namespace flsched::io
