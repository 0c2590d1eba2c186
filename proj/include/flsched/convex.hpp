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

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

// Log-barrier interior point solver for smooth convex programs
//
//   minimize f(x)  s.t.  g_i(x) <= 0,  A x = b,  lower <= x <= upper
//
// Functions are sums of a linear part and small dense "terms", each touching
// a handful of variables, so that barrier Hessians can be assembled cheaply.
namespace flsched::convex {

/// Smooth function of the variables listed in `vars`.
///
/// `eval` returns the value at the gathered point x (x[i] is variable
/// vars[i]). When `grad` is non-empty it receives the gradient; when `hess`
/// is non-empty it receives the row-major Hessian (vars.size() squared).
struct Term {
    using Eval = std::function<double(std::span<const double> x, std::span<double> grad,
                                      std::span<double> hess)>;
    std::vector<int> vars;
    Eval eval;
};

/// constant + sum_j linear_j x_j + sum_k term_k(x)
struct Function {
    double constant = 0.0;
    std::vector<std::pair<int, double>> linear;
    std::vector<Term> terms;

    void add_linear(int var, double coef) { linear.emplace_back(var, coef); }
    void add_term(std::vector<int> vars, Term::Eval eval) { terms.push_back({std::move(vars), std::move(eval)}); }
};

struct ConvexProgram {
    int n_vars = 0;
    Function objective;
    std::vector<Function> inequalities;  // each g_i(x) <= 0
    std::vector<std::string> inequality_names;
    Eigen::MatrixXd eq_matrix;  // rows x n_vars, may be empty
    Eigen::VectorXd eq_rhs;
    Eigen::VectorXd lower;  // -inf allowed
    Eigen::VectorXd upper;  // +inf allowed

    explicit ConvexProgram(int n = 0);
    void add_inequality(Function g, std::string name);
};

enum class SolveStatus { Optimal, MaxIter, Infeasible };

const char* to_string(SolveStatus s);

struct SolveOptions {
    double tol = 1e-8;            // relative bound on the duality gap
    int max_newton = 500;         // total Newton steps, phase I excluded
    double mu = 10.0;             // barrier growth factor
    double armijo = 0.25;
    double backtrack = 0.5;
    double t0 = 0.0;              // <= 0 picks m / |f(x0)|
    double center_tol = 1e-9;     // Newton decrement^2 / 2, raised to the rounding floor at large t
    double interior_margin = 1e-6;
    int max_phase1_newton = 500;
};

struct SolveReport {
    Eigen::VectorXd x_opt;
    double objective_value = 0.0;
    double kkt_residual = 0.0;
    double max_violation = 0.0;
    int barrier_iterations = 0;
    int newton_iterations = 0;
    int phase1_newton_iterations = 0;
    SolveStatus status = SolveStatus::MaxIter;
    std::vector<double> gap_history;  // m / t at the end of each outer iteration
};

double value(const Function& f, const Eigen::VectorXd& x);
/// Dense gradient of f at x.
Eigen::VectorXd gradient(const Function& f, const Eigen::VectorXd& x);
/// Dense Hessian of f at x.
Eigen::MatrixXd hessian(const Function& f, const Eigen::VectorXd& x);

/// Largest g_i(x), bound violation and |A x - b| at x (<= 0 means feasible).
double max_violation(const ConvexProgram& prog, const Eigen::VectorXd& x);
bool strictly_feasible(const ConvexProgram& prog, const Eigen::VectorXd& x);

/// Minimizes prog starting from x0. A phase-I problem is solved first when x0
/// is not strictly feasible; A x0 = b is required either way.
SolveReport solve(const ConvexProgram& prog, const Eigen::VectorXd& x0, const SolveOptions& opts = {});

/// Worst relative mismatch between analytic gradients (objective and every
/// constraint) and central differences with relative step h.
double check_derivatives(const ConvexProgram& prog, const Eigen::VectorXd& x, double h = 1e-6);

/// Worst relative mismatch between the analytic gradient of a single function and central differences.
double check_function_derivatives(const Function& f, const Eigen::VectorXd& x, double h = 1e-6);

}  // namespace flsched::convex
