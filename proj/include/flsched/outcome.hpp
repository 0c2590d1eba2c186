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

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace flsched {

/// The instance admits no schedule under the requested method.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The convex subproblem solver failed inside an iterative method.
class SolverError : public std::runtime_error {
public:
    SolverError(int iteration, const std::string& status)
        : std::runtime_error("subproblem solve failed at iteration " + std::to_string(iteration) + ": " + status),
          iteration_(iteration)
    {
    }
    int iteration() const { return iteration_; }

private:
    int iteration_;
};

/// Residuals of one constraint family; entries <= 0 are satisfied.
struct ResidualFamily {
    std::vector<double> absolute;
    double scale = 1.0;  // natural unit for relative residuals

    double worst_relative() const;
};

/// Evaluated round: common output of the optimizers and the simulators.
struct RoundOutcome {
    double latency_s = 0.0;
    std::vector<double> e_cp;   // per FL UE (scenario index), J
    std::vector<double> e_cm;   // per FL UE, J
    std::vector<double> e_tot;  // per FL UE, J
    std::vector<double> compute_time_s;
    std::vector<double> hb_avg_rates;  // per HB UE, bit/s
    double objective = 0.0;            // latency + sum lambda_s E_tot
    std::map<std::string, ResidualFamily> residuals;

    double total_energy() const;
    double max_relative_residual() const;
    bool feasible(double rel_tol = 1e-6) const { return max_relative_residual() <= rel_tol; }
};

}  // namespace flsched
