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

#include "flsched/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace flsched {

namespace {

constexpr double kSpeedOfLight = 299792458.0;

void require(bool ok, const std::string& what)
{
    if (!ok) {
        throw ScenarioError(what);
    }
}

// Portable uniform in [0, 1): mt19937_64 output is fully specified, the
// standard distributions are not.
double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::array<double, 2> draw_position(std::mt19937_64& rng, double radius, double min_distance)
{
    // Area-uniform radius, then clamp away from the BS to keep the far-field model valid.
    const double r = std::max(min_distance, radius * std::sqrt(uniform01(rng)));
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    return {r * std::cos(phi), r * std::sin(phi)};
}

double get(const ParameterMap& m, const std::string& key, double fallback)
{
    auto it = m.find(key);
    return it == m.end() ? fallback : it->second;
}

int get_count(const ParameterMap& m, const std::string& key, int fallback)
{
    const double v = get(m, key, fallback);
    require(v >= 0 && std::floor(v) == v, "override '" + key + "' must be a nonnegative integer");
    return static_cast<int>(v);
}

}  // namespace

double dbm_to_watt(double dbm)
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double free_space_gain_sq(double distance_m, double carrier_freq_hz)
{
    const double g = kSpeedOfLight / (4.0 * std::numbers::pi * distance_m * carrier_freq_hz);
    return g * g;
}

void RadioConstants::validate() const
{
    require(num_rbs >= 1, "radio.num_rbs must be >= 1");
    require(subcarrier_spacing_hz > 0, "radio.subcarrier_spacing_hz must be positive");
    require(subcarriers_per_rb >= 1, "radio.subcarriers_per_rb must be >= 1");
    require(noise_psd_w_per_hz > 0, "radio.noise_psd_w_per_hz must be positive");
    require(bs_power_per_rb_w > 0, "radio.bs_power_per_rb_w must be positive");
    require(ue_max_power_w > 0, "radio.ue_max_power_w must be positive");
    require(carrier_freq_hz > 0, "radio.carrier_freq_hz must be positive");
    require(tti_s > 0, "radio.tti_s must be positive");
}

void FlWorkload::validate() const
{
    require(model_bits > 0, "workload.model_bits must be positive");
    require(epochs >= 1, "workload.epochs must be >= 1");
    require(cycles_per_sample > 0, "workload.cycles_per_sample must be positive");
    require(samples >= 1, "workload.samples must be >= 1");
    require(f_max_hz > 0, "workload.f_max_hz must be positive");
    require(kappa > 0, "workload.kappa must be positive");
    require(energy_weight >= 0, "workload.energy_weight must be nonnegative");
}

double UeRecord::distance() const
{
    return std::hypot(position[0], position[1]);
}

bool Scenario::is_channel_sorted() const
{
    return std::is_sorted(fl_ues.begin(), fl_ues.end(), [](const UeRecord& a, const UeRecord& b) {
        return a.channel_gain_sq > b.channel_gain_sq;
    });
}

bool Scenario::sort_fl_by_channel()
{
    if (is_channel_sorted()) {
        return false;
    }
    std::stable_sort(fl_ues.begin(), fl_ues.end(), [](const UeRecord& a, const UeRecord& b) {
        return a.channel_gain_sq > b.channel_gain_sq;
    });
    return true;
}

void Scenario::validate() const
{
    radio.validate();
    require(cell_radius_m > 0, "cell_radius_m must be positive");
    require(hb_threshold_bps >= 0, "hb_threshold must be nonnegative");
    require(!fl_ues.empty(), "fl_ues must not be empty");
    for (const auto& ue : fl_ues) {
        require(ue.kind == UeKind::Fl, "fl_ues entry " + std::to_string(ue.id) + " is not an FL UE");
        require(ue.workload.has_value(), "fl_ues entry " + std::to_string(ue.id) + " has no workload");
        ue.workload->validate();
        require(ue.channel_gain_sq > 0, "channel_gain_sq of UE " + std::to_string(ue.id) + " must be positive");
        require(ue.distance() <= cell_radius_m * (1 + 1e-12),
                "UE " + std::to_string(ue.id) + " lies outside the cell");
    }
    for (const auto& ue : hb_ues) {
        require(ue.kind == UeKind::Hb, "hb_ues entry " + std::to_string(ue.id) + " is not an HB UE");
        require(ue.channel_gain_sq > 0, "channel_gain_sq of UE " + std::to_string(ue.id) + " must be positive");
        require(ue.distance() <= cell_radius_m * (1 + 1e-12),
                "UE " + std::to_string(ue.id) + " lies outside the cell");
    }
    require(is_channel_sorted(), "fl_ues must be sorted by descending channel_gain_sq");
}

const std::vector<std::string>& override_keys()
{
    static const std::vector<std::string> keys = {
        "num_fl",         "num_hb",      "num_rbs",         "theta_kbyte_s",
        "lambda",         "model_bits",  "epochs",          "total_samples",
        "f_max_hz",       "kappa",       "radius_m",        "min_distance_m",
        "subcarrier_spacing_hz", "subcarriers_per_rb", "noise_dbm_hz", "bs_power_dbm",
        "ue_max_power_dbm", "carrier_freq_hz", "tti_s",   "homogeneous_fl",
    };
    return keys;
}

Scenario generate(std::uint64_t seed, const ParameterMap& overrides)
{
    const auto& keys = override_keys();
    for (const auto& [key, value] : overrides) {
        require(std::find(keys.begin(), keys.end(), key) != keys.end(), "unknown override '" + key + "'");
        require(std::isfinite(value), "override '" + key + "' is not finite");
    }

    Scenario sc;
    sc.rng_seed = seed;
    sc.cell_radius_m = get(overrides, "radius_m", 50.0);
    require(sc.cell_radius_m > 0, "radius_m must be positive");
    const double min_distance = std::min(get(overrides, "min_distance_m", 1.0), sc.cell_radius_m);

    RadioConstants& radio = sc.radio;
    radio.num_rbs = get_count(overrides, "num_rbs", 10);
    require(radio.num_rbs >= 1, "num_rbs must be >= 1");
    radio.subcarrier_spacing_hz = get(overrides, "subcarrier_spacing_hz", radio.subcarrier_spacing_hz);
    radio.subcarriers_per_rb = get_count(overrides, "subcarriers_per_rb", radio.subcarriers_per_rb);
    if (overrides.count("noise_dbm_hz")) {
        radio.noise_psd_w_per_hz = dbm_to_watt(overrides.at("noise_dbm_hz"));
    }
    if (overrides.count("bs_power_dbm")) {
        radio.bs_power_per_rb_w = dbm_to_watt(overrides.at("bs_power_dbm"));
    }
    if (overrides.count("ue_max_power_dbm")) {
        radio.ue_max_power_w = dbm_to_watt(overrides.at("ue_max_power_dbm"));
    }
    radio.carrier_freq_hz = get(overrides, "carrier_freq_hz", radio.carrier_freq_hz);
    radio.tti_s = get(overrides, "tti_s", radio.tti_s);
    radio.validate();

    // kByte/s -> bit/s
    sc.hb_threshold_bps = get(overrides, "theta_kbyte_s", 600.0) * 8.0 * 1000.0;
    require(sc.hb_threshold_bps >= 0, "theta_kbyte_s must be nonnegative");

    const int num_fl = get_count(overrides, "num_fl", 10);
    const int num_hb = get_count(overrides, "num_hb", 20);
    require(num_fl >= 1, "num_fl must be >= 1");

    FlWorkload base;
    base.model_bits = get(overrides, "model_bits", base.model_bits);
    base.epochs = get_count(overrides, "epochs", base.epochs);
    base.f_max_hz = get(overrides, "f_max_hz", base.f_max_hz);
    base.kappa = get(overrides, "kappa", base.kappa);
    base.energy_weight = get(overrides, "lambda", base.energy_weight);
    const int total_samples = get_count(overrides, "total_samples", 60000);
    require(total_samples >= num_fl, "total_samples must cover every FL UE");
    const bool homogeneous = get(overrides, "homogeneous_fl", 0.0) != 0.0;

    std::mt19937_64 rng(seed);

    std::vector<std::array<double, 2>> fl_pos(num_fl);
    for (auto& p : fl_pos) {
        p = draw_position(rng, sc.cell_radius_m, min_distance);
    }
    std::vector<std::array<double, 2>> hb_pos(num_hb);
    for (auto& p : hb_pos) {
        p = draw_position(rng, sc.cell_radius_m, min_distance);
    }

    // Uniform random ratios, floored, remainder to the last UE.
    std::vector<double> ratios(num_fl);
    double ratio_sum = 0.0;
    for (auto& r : ratios) {
        r = uniform01(rng) + 1e-12;
        ratio_sum += r;
    }
    std::vector<int> samples(num_fl);
    int assigned = 0;
    for (int i = 0; i < num_fl - 1; ++i) {
        samples[i] = homogeneous ? total_samples / num_fl
                                 : std::max(1, static_cast<int>(std::floor(total_samples * ratios[i] / ratio_sum)));
        assigned += samples[i];
    }
    samples[num_fl - 1] = total_samples - assigned;
    if (samples[num_fl - 1] < 1) {
        // Only reachable when several floors were lifted to 1; take back from the largest share.
        auto largest = std::max_element(samples.begin(), samples.end() - 1);
        *largest -= 1 - samples[num_fl - 1];
        samples[num_fl - 1] = 1;
    }

    for (int i = 0; i < num_fl; ++i) {
        UeRecord ue;
        ue.id = i;
        ue.kind = UeKind::Fl;
        ue.position = homogeneous ? fl_pos[0] : fl_pos[i];
        ue.channel_gain_sq = free_space_gain_sq(ue.distance(), radio.carrier_freq_hz);
        FlWorkload w = base;
        w.samples = samples[i];
        ue.workload = w;
        sc.fl_ues.push_back(ue);
    }
    for (int e = 0; e < num_hb; ++e) {
        UeRecord ue;
        ue.id = num_fl + e;
        ue.kind = UeKind::Hb;
        ue.position = hb_pos[e];
        ue.channel_gain_sq = free_space_gain_sq(ue.distance(), radio.carrier_freq_hz);
        sc.hb_ues.push_back(ue);
    }
    sc.sort_fl_by_channel();
    sc.validate();
    return sc;
}

}  // namespace flsched
