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

#include "flsched/convex.hpp"
#include "flsched/ratemodel.hpp"

// Convex surrogate terms shared by the session and rigid solvers.
namespace flsched::detail {

// weight * -(2 y sqrt(K) - y^2 / t) over {K, t}.
convex::Term::Eval neg_transformed_linear(double y, double weight);

// -(2 y sqrt(X(K, p)) - y^2 / t) over {K, p, t}, X the normalized uplink rate.
convex::Term::Eval neg_transformed_uplink(double y, rate::UlRateCoefficients c);

// weight * (p^2 / (2 y) + y t^2 / 2) over {p, t}; majorizes weight * p * t.
convex::Term::Eval energy_majorizer(double y, double weight);

// coef / (sum of vars)^2.
convex::Term::Eval inverse_square_of_sum(double coef);

}  // namespace flsched::detail
