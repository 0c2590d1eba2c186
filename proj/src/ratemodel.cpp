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

#include "flsched/ratemodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace flsched::rate {

double dl_snr(double gain_sq, const RadioConstants& radio)
{
    return radio.bs_power_per_rb_w * gain_sq / (radio.rb_bandwidth_hz() * radio.noise_psd_w_per_hz);
}

double dl_rate_per_rb(double gain_sq, const RadioConstants& radio)
{
    return radio.rb_bandwidth_hz() * std::log2(1.0 + dl_snr(gain_sq, radio));
}

double dl_rate(double rb_count, double gain_sq, const RadioConstants& radio)
{
    return rb_count * dl_rate_per_rb(gain_sq, radio);
}

double ul_rate(double rb_count, double power_w, double gain_sq, const RadioConstants& radio)
{
    if (rb_count <= 0.0 || power_w <= 0.0) {
        return 0.0;
    }
    const double bw = radio.rb_bandwidth_hz();
    return rb_count * bw * std::log2(1.0 + power_w * gain_sq / (rb_count * bw * radio.noise_psd_w_per_hz));
}

UlRateCoefficients ul_coefficients(double gain_sq, const RadioConstants& radio, double scale)
{
    const double bw = radio.rb_bandwidth_hz();
    return {bw / (scale * std::numbers::ln2), gain_sq / (bw * radio.noise_psd_w_per_hz)};
}

PerspectiveLog perspective_log(UlRateCoefficients c, double k, double p)
{
    PerspectiveLog out;
    if (k <= 0.0) {
        return out;
    }
    const double u = c.b * p / k;
    const double l = std::log1p(u);
    const double inv = 1.0 / (1.0 + u);
    out.value = c.a * k * l;
    out.d_k = c.a * (l - u * inv);
    out.d_p = c.a * c.b * inv;
    // Hessian is -a / (K (1+u)^2) * v v^T with v = (u, -b).
    const double s = c.a * inv * inv / k;
    out.d_kk = -s * u * u;
    out.d_kp = s * u * c.b;
    out.d_pp = -s * c.b * c.b;
    return out;
}

double hb_reservation(double gain_sq, double threshold_bps, const RadioConstants& radio)
{
    return threshold_bps / dl_rate_per_rb(gain_sq, radio);
}

double compute_time(const FlWorkload& w, double f_hz)
{
    if (!(f_hz > 0.0)) {
        throw std::invalid_argument("compute frequency must be positive");
    }
    return w.total_cycles() / f_hz;
}

double compute_energy(const FlWorkload& w, double f_hz)
{
    if (!(f_hz > 0.0)) {
        throw std::invalid_argument("compute frequency must be positive");
    }
    return w.kappa * w.total_cycles() * f_hz * f_hz;
}

double compute_energy_coefficient(const FlWorkload& w)
{
    const double c = w.total_cycles();
    return w.kappa * c * c * c;
}

double compute_energy_for_time(const FlWorkload& w, double tau_s)
{
    return compute_energy_coefficient(w) / (tau_s * tau_s);
}

double min_compute_time(const FlWorkload& w)
{
    return compute_time(w, w.f_max_hz);
}

double round_latency(std::span<const double> dl_times, std::span<const double> cp_times,
                     std::span<const double> ul_times)
{
    if (dl_times.size() != cp_times.size() || dl_times.size() != ul_times.size()) {
        throw std::invalid_argument("round_latency: per-UE vectors differ in length");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < dl_times.size(); ++i) {
        worst = std::max(worst, dl_times[i] + cp_times[i] + ul_times[i]);
    }
    return worst;
}

}  // namespace flsched::rate
