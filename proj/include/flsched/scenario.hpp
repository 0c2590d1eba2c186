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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flsched {

/// Raised for malformed or out-of-range scenario descriptions.
class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Cell-wide radio constants. All values in SI units.
struct RadioConstants {
    int num_rbs = 10;
    double subcarrier_spacing_hz = 60e3;
    // Rates are computed over the RB bandwidth (spacing x subcarriers).
    int subcarriers_per_rb = 12;
    double noise_psd_w_per_hz = 3.981071705534973e-21;  // -174 dBm/Hz
    double bs_power_per_rb_w = 1.0;                       // 30 dBm
    double ue_max_power_w = 0.19952623149688797;          // 23 dBm
    double carrier_freq_hz = 3.5e9;
    double tti_s = 1e-3;

    double rb_bandwidth_hz() const { return subcarrier_spacing_hz * subcarriers_per_rb; }
    void validate() const;

    bool operator==(const RadioConstants&) const = default;
};

/// Per-UE local training workload and energy model constants.
struct FlWorkload {
    double model_bits = 1e8;
    int epochs = 20;
    double cycles_per_sample = 15.0 * 32 * 32 * 3 * 32;
    double samples = 6000;
    double f_max_hz = 2e9;
    double kappa = 1e-28;
    double energy_weight = 0.05;

    /// Cycles per sample pass over all epochs (I_s * C_s).
    double alpha() const { return epochs * cycles_per_sample; }
    double total_cycles() const { return alpha() * samples; }
    void validate() const;

    bool operator==(const FlWorkload&) const = default;
};

enum class UeKind { Fl, Hb };

struct UeRecord {
    int id = 0;
    UeKind kind = UeKind::Fl;
    std::array<double, 2> position{0.0, 0.0};
    double channel_gain_sq = 0.0;
    std::optional<FlWorkload> workload;  // set for FL UEs only

    double distance() const;
    bool operator==(const UeRecord&) const = default;
};

/// Immutable system description of one communication round.
///
/// FL UEs are kept sorted by descending channel gain; the downlink broadcast
/// sessions complete in that order.
struct Scenario {
    RadioConstants radio;
    std::vector<UeRecord> fl_ues;
    std::vector<UeRecord> hb_ues;
    double hb_threshold_bps = 4.8e6;
    double cell_radius_m = 50.0;
    std::uint64_t rng_seed = 1;

    int num_fl() const { return static_cast<int>(fl_ues.size()); }
    int num_hb() const { return static_cast<int>(hb_ues.size()); }
    const FlWorkload& workload(int fl_index) const { return *fl_ues.at(fl_index).workload; }

    /// Throws ScenarioError naming the first violated invariant.
    void validate() const;
    bool is_channel_sorted() const;
    /// Stable sort of FL UEs by descending h^2. Returns true if the order changed.
    bool sort_fl_by_channel();

    bool operator==(const Scenario&) const = default;
};

/// Named numeric overrides accepted by generate(). Unknown keys are rejected.
///
/// Keys: num_fl, num_hb, num_rbs, theta_kbyte_s, lambda, model_bits, epochs,
/// total_samples, f_max_hz, kappa, radius_m, min_distance_m,
/// subcarrier_spacing_hz, subcarriers_per_rb, noise_dbm_hz, bs_power_dbm,
/// ue_max_power_dbm, carrier_freq_hz, tti_s, homogeneous_fl.
using ParameterMap = std::map<std::string, double>;

const std::vector<std::string>& override_keys();

/// Draws UE positions uniformly over the cell disk and derives free-space gains.
/// Deterministic for a given (seed, overrides).
Scenario generate(std::uint64_t seed, const ParameterMap& overrides = {});

/// Free-space power gain (c / (4 pi d f))^2.
double free_space_gain_sq(double distance_m, double carrier_freq_hz);

double dbm_to_watt(double dbm);

}  // namespace flsched
