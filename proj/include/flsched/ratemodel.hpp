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

#include <span>

#include "flsched/scenario.hpp"

// Closed-form rates, times and energies shared by the optimizers and the
// slot simulator. RB counts are continuous.
namespace flsched::rate {

/// Per-RB downlink SNR P_d h^2 / (B N0).
double dl_snr(double gain_sq, const RadioConstants& radio);

/// Downlink rate in bit/s; linear in rb_count.
double dl_rate(double rb_count, double gain_sq, const RadioConstants& radio);

/// Downlink bit/s delivered per RB.
double dl_rate_per_rb(double gain_sq, const RadioConstants& radio);

/// Uplink rate K B log2(1 + p h^2 / (K B N0)), the perspective of log(1 + x).
/// Returns 0 for rb_count == 0 (the continuous extension).
double ul_rate(double rb_count, double power_w, double gain_sq, const RadioConstants& radio);

/// Value and derivatives of a scaled uplink rate X(K, p) = a K ln(1 + b p / K).
struct PerspectiveLog {
    double value = 0;
    double d_k = 0;
    double d_p = 0;
    double d_kk = 0;
    double d_kp = 0;
    double d_pp = 0;
};

/// a, b for which X(K, p) = ul_rate(K, p) / scale.
struct UlRateCoefficients {
    double a = 0;
    double b = 0;
};
UlRateCoefficients ul_coefficients(double gain_sq, const RadioConstants& radio, double scale);
PerspectiveLog perspective_log(UlRateCoefficients c, double rb_count, double power_w);

/// RBs an HB UE must hold in every slot to receive exactly threshold_bps.
double hb_reservation(double gain_sq, double threshold_bps, const RadioConstants& radio);

/// Local training time I C Theta / f. Throws std::invalid_argument for f <= 0.
double compute_time(const FlWorkload& w, double f_hz);
/// kappa I C Theta f^2. Throws std::invalid_argument for f <= 0.
double compute_energy(const FlWorkload& w, double f_hz);
/// Same energy written through the training time: kappa (I C)^3 Theta^3 / tau^2.
double compute_energy_for_time(const FlWorkload& w, double tau_s);
/// Training time at f_max.
double min_compute_time(const FlWorkload& w);
/// kappa (I C Theta)^3, the numerator of compute_energy_for_time.
double compute_energy_coefficient(const FlWorkload& w);

/// Round latency: slowest UE's downlink + compute + uplink.
double round_latency(std::span<const double> dl_times, std::span<const double> cp_times,
                     std::span<const double> ul_times);

}  // namespace flsched::rate
