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

#include "transform_terms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flsched::detail {

// -(2 y sqrt(K) - y^2 / t) * weight over vars {K, t}. Convex for K, t > 0.
convex::Term::Eval neg_transformed_linear(double y, double weight)
{
    return [y, weight](std::span<const double> x, std::span<double> g, std::span<double> h) {
        const double k = x[0];
        const double t = x[1];
        const double sk = std::sqrt(k);
        if (!g.empty()) {
            g[0] = -weight * y / sk;
            g[1] = -weight * y * y / (t * t);
        }
        if (!h.empty()) {
            h[0] = weight * y / (2.0 * k * sk);
            h[1] = 0.0;
            h[2] = 0.0;
            h[3] = 2.0 * weight * y * y / (t * t * t);
        }
        return -weight * (2.0 * y * sk - y * y / t);
    };
}

// -(2 y sqrt(X(K, p)) - y^2 / t) over vars {K, p, t}, X the normalized uplink rate.
convex::Term::Eval neg_transformed_uplink(double y, rate::UlRateCoefficients c)
{
    return [y, c](std::span<const double> x, std::span<double> g, std::span<double> h) {
        const double t = x[2];
        const auto r = rate::perspective_log(c, x[0], x[1]);
        const double q = std::sqrt(r.value);
        if (!g.empty()) {
            g[0] = -y * r.d_k / q;
            g[1] = -y * r.d_p / q;
            g[2] = -y * y / (t * t);
        }
        if (!h.empty()) {
            // Hessian of 2 y sqrt(X) = y X'' / q - y X' X'^T / (2 q^3)
            const double q3 = 2.0 * q * q * q;
            const double hkk = y * r.d_kk / q - y * r.d_k * r.d_k / q3;
            const double hkp = y * r.d_kp / q - y * r.d_k * r.d_p / q3;
            const double hpp = y * r.d_pp / q - y * r.d_p * r.d_p / q3;
            h[0] = -hkk;
            h[1] = -hkp;
            h[2] = 0.0;
            h[3] = -hkp;
            h[4] = -hpp;
            h[5] = 0.0;
            h[6] = 0.0;
            h[7] = 0.0;
            h[8] = 2.0 * y * y / (t * t * t);
        }
        return -(2.0 * y * q - y * y / t);
    };
}

// weight * (p^2 / (2 y) + y t^2 / 2) over vars {p, t}; majorizes weight * p * t.
convex::Term::Eval energy_majorizer(double y, double weight)
{
    return [y, weight](std::span<const double> x, std::span<double> g, std::span<double> h) {
        const double p = x[0];
        const double t = x[1];
        if (!g.empty()) {
            g[0] = weight * p / y;
            g[1] = weight * y * t;
        }
        if (!h.empty()) {
            h[0] = weight / y;
            h[1] = 0.0;
            h[2] = 0.0;
            h[3] = weight * y;
        }
        return weight * (p * p / (2.0 * y) + y * t * t / 2.0);
    };
}

// weight * C / (sum x)^2, the training energy as a function of the training time.
convex::Term::Eval inverse_square_of_sum(double coef)
{
    return [coef](std::span<const double> x, std::span<double> g, std::span<double> h) {
        double tau = 0.0;
        for (double v : x) {
            tau += v;
        }
        if (!(tau > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        if (!g.empty()) {
            std::fill(g.begin(), g.end(), -2.0 * coef / (tau * tau * tau));
        }
        if (!h.empty()) {
            std::fill(h.begin(), h.end(), 6.0 * coef / (tau * tau * tau * tau));
        }
        return coef / (tau * tau);
    };
}

}  // namespace flsched::detail
