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

#include "flsched/outcome.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace flsched {

double ResidualFamily::worst_relative() const
{
    double worst = -std::numeric_limits<double>::infinity();
    for (double r : absolute) {
        worst = std::max(worst, std::isnan(r) ? std::numeric_limits<double>::infinity() : r / scale);
    }
    return absolute.empty() ? 0.0 : worst;
}

double RoundOutcome::total_energy() const
{
    return std::accumulate(e_tot.begin(), e_tot.end(), 0.0);
}

double RoundOutcome::max_relative_residual() const
{
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& [name, fam] : residuals) {
        if (!fam.absolute.empty()) {
            worst = std::max(worst, fam.worst_relative());
        }
    }
    return residuals.empty() ? 0.0 : worst;
}

}  // namespace flsched
