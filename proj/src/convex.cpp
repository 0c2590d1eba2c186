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

#include "flsched/convex.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace flsched::convex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Function with its variable support resolved to local positions.
struct Compiled {
    struct LocalTerm {
        const Term* term;
        std::vector<int> local;
    };
    std::vector<int> support;
    std::vector<std::pair<int, double>> linear;  // local index, coefficient
    std::vector<LocalTerm> terms;
    double constant = 0.0;
};

Compiled compile(const Function& f, int n_vars)
{
    Compiled c;
    c.constant = f.constant;
    std::vector<int> all;
    for (const auto& [v, coef] : f.linear) {
        all.push_back(v);
    }
    for (const auto& t : f.terms) {
        all.insert(all.end(), t.vars.begin(), t.vars.end());
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    for (int v : all) {
        if (v < 0 || v >= n_vars) {
            throw std::out_of_range("function references variable " + std::to_string(v));
        }
    }
    c.support = all;
    auto local_of = [&](int v) {
        return static_cast<int>(std::lower_bound(all.begin(), all.end(), v) - all.begin());
    };
    for (const auto& [v, coef] : f.linear) {
        c.linear.emplace_back(local_of(v), coef);
    }
    for (const auto& t : f.terms) {
        Compiled::LocalTerm lt{&t, {}};
        for (int v : t.vars) {
            lt.local.push_back(local_of(v));
        }
        c.terms.push_back(std::move(lt));
    }
    return c;
}

struct Scratch {
    std::vector<double> x, g, h;
};

// Value and optionally the local gradient / Hessian over c.support.
double eval_local(const Compiled& c, const Eigen::VectorXd& x, Eigen::VectorXd* grad, Eigen::MatrixXd* hess,
                  Scratch& s)
{
    const int m = static_cast<int>(c.support.size());
    double val = c.constant;
    if (grad) {
        grad->setZero(m);
    }
    if (hess) {
        hess->setZero(m, m);
    }
    for (const auto& [li, coef] : c.linear) {
        val += coef * x[c.support[li]];
        if (grad) {
            (*grad)[li] += coef;
        }
    }
    for (const auto& lt : c.terms) {
        const int k = static_cast<int>(lt.local.size());
        s.x.resize(k);
        for (int i = 0; i < k; ++i) {
            s.x[i] = x[lt.term->vars[i]];
        }
        std::span<double> gs, hs;
        if (grad) {
            s.g.assign(k, 0.0);
            gs = s.g;
        }
        if (hess) {
            s.h.assign(static_cast<std::size_t>(k) * k, 0.0);
            hs = s.h;
        }
        val += lt.term->eval(s.x, gs, hs);
        if (grad) {
            for (int i = 0; i < k; ++i) {
                (*grad)[lt.local[i]] += s.g[i];
            }
        }
        if (hess) {
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < k; ++j) {
                    (*hess)(lt.local[i], lt.local[j]) += s.h[static_cast<std::size_t>(i) * k + j];
                }
            }
        }
    }
    return val;
}

double eval_value(const Compiled& c, const Eigen::VectorXd& x, Scratch& s)
{
    return eval_local(c, x, nullptr, nullptr, s);
}

struct CompiledProgram {
    const ConvexProgram* prog;
    Compiled objective;
    std::vector<Compiled> inequalities;
    std::vector<int> finite_lower, finite_upper;

    int barrier_count() const
    {
        return static_cast<int>(inequalities.size() + finite_lower.size() + finite_upper.size());
    }
};

CompiledProgram compile(const ConvexProgram& prog)
{
    CompiledProgram cp{&prog, compile(prog.objective, prog.n_vars), {}, {}, {}};
    for (const auto& g : prog.inequalities) {
        cp.inequalities.push_back(compile(g, prog.n_vars));
    }
    for (int j = 0; j < prog.n_vars; ++j) {
        if (std::isfinite(prog.lower[j])) {
            cp.finite_lower.push_back(j);
        }
        if (std::isfinite(prog.upper[j])) {
            cp.finite_upper.push_back(j);
        }
    }
    return cp;
}

bool inside_bounds(const CompiledProgram& cp, const Eigen::VectorXd& x)
{
    const auto& p = *cp.prog;
    for (int j : cp.finite_lower) {
        if (!(x[j] > p.lower[j])) {
            return false;
        }
    }
    for (int j : cp.finite_upper) {
        if (!(x[j] < p.upper[j])) {
            return false;
        }
    }
    return true;
}

// Barrier value t f(x) - sum log(-g_i) - sum log(bound slack); +inf outside the domain.
double barrier_value(const CompiledProgram& cp, const Eigen::VectorXd& x, double t, Scratch& s)
{
    if (!inside_bounds(cp, x)) {
        return kInf;
    }
    const auto& p = *cp.prog;
    double phi = 0.0;
    for (const auto& g : cp.inequalities) {
        const double v = eval_value(g, x, s);
        if (!(v < 0.0)) {
            return kInf;
        }
        phi -= std::log(-v);
    }
    for (int j : cp.finite_lower) {
        phi -= std::log(x[j] - p.lower[j]);
    }
    for (int j : cp.finite_upper) {
        phi -= std::log(p.upper[j] - x[j]);
    }
    const double f = eval_value(cp.objective, x, s);
    if (!std::isfinite(f)) {
        return kInf;
    }
    return phi + t * f;
}

// Constraints touching more variables than this enter the Newton system as
// rank-one updates instead of dense blocks.
constexpr std::size_t kLowRankSupport = 6;

// Barrier Hessian split as sparse + sum_i weight_i a_i a_i^T.
struct NewtonSystem {
    Eigen::VectorXd grad;
    std::vector<Eigen::Triplet<double>> sparse_lower;
    struct RankOne {
        const std::vector<int>* support;
        Eigen::VectorXd a;
        double weight;
    };
    std::vector<RankOne> rank_one;
};

void assemble(const CompiledProgram& cp, const Eigen::VectorXd& x, double t, NewtonSystem& sys, Scratch& s)
{
    const auto& p = *cp.prog;
    auto& grad = sys.grad;
    auto& hess = sys.sparse_lower;
    grad.setZero(p.n_vars);
    hess.clear();
    sys.rank_one.clear();
    Eigen::VectorXd lg;
    Eigen::MatrixXd lh;
    auto add_block = [&](const std::vector<int>& sup, auto&& value) {
        for (std::size_t b = 0; b < sup.size(); ++b) {
            for (std::size_t a = 0; a < sup.size(); ++a) {
                if (sup[a] >= sup[b]) {
                    const double v = value(a, b);
                    if (v != 0.0 || a == b) {
                        hess.emplace_back(sup[a], sup[b], v);
                    }
                }
            }
        }
    };

    eval_local(cp.objective, x, &lg, &lh, s);
    const auto& os = cp.objective.support;
    for (std::size_t a = 0; a < os.size(); ++a) {
        grad[os[a]] += t * lg[a];
    }
    add_block(os, [&](std::size_t a, std::size_t b) { return t * lh(a, b); });
    for (const auto& g : cp.inequalities) {
        const double d = -eval_local(g, x, &lg, &lh, s);
        const auto& sup = g.support;
        for (std::size_t a = 0; a < sup.size(); ++a) {
            grad[sup[a]] += lg[a] / d;
        }
        if (sup.size() > kLowRankSupport) {
            add_block(sup, [&](std::size_t a, std::size_t b) { return lh(a, b) / d; });
            sys.rank_one.push_back({&sup, lg, 1.0 / (d * d)});
        } else {
            add_block(sup, [&](std::size_t a, std::size_t b) { return lg[a] * lg[b] / (d * d) + lh(a, b) / d; });
        }
    }
    for (int j : cp.finite_lower) {
        const double d = x[j] - p.lower[j];
        grad[j] -= 1.0 / d;
        hess.emplace_back(j, j, 1.0 / (d * d));
    }
    for (int j : cp.finite_upper) {
        const double d = p.upper[j] - x[j];
        grad[j] += 1.0 / d;
        hess.emplace_back(j, j, 1.0 / (d * d));
    }
}

// Solves H dx = -grad. Without equality constraints the sparse part is
// factorized (pattern analyzed once per solve) and the rank-one part is
// handled with the Woodbury identity; otherwise a dense KKT system is used.
class NewtonSolver {
public:
    explicit NewtonSolver(const ConvexProgram& p) : p_(p), h_(p.n_vars, p.n_vars) {}

    Eigen::VectorXd direction(const NewtonSystem& sys)
    {
        if (p_.eq_matrix.rows() == 0) {
            h_.setFromTriplets(sys.sparse_lower.begin(), sys.sparse_lower.end());
            if (!analyzed_) {
                llt_.analyzePattern(h_);
                analyzed_ = true;
            }
            llt_.factorize(h_);
            if (llt_.info() == Eigen::Success) {
                return woodbury(sys);
            }
        }
        return dense(sys);
    }

private:
    Eigen::VectorXd woodbury(const NewtonSystem& sys)
    {
        const int n = p_.n_vars;
        const int k = static_cast<int>(sys.rank_one.size());
        // Columns scaled by sqrt(weight) so the capacitance matrix is I + U^T S^-1 U.
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, k);
        for (int i = 0; i < k; ++i) {
            const auto& r = sys.rank_one[i];
            const double sw = std::sqrt(r.weight);
            for (std::size_t a = 0; a < r.support->size(); ++a) {
                u((*r.support)[a], i) = sw * r.a[a];
            }
        }
        const Eigen::MatrixXd y = k > 0 ? Eigen::MatrixXd(llt_.solve(u)) : Eigen::MatrixXd(n, 0);
        Eigen::MatrixXd cap = u.transpose() * y;
        cap.diagonal().array() += 1.0;
        const Eigen::LLT<Eigen::MatrixXd> cap_f(cap);

        auto apply_inverse = [&](const Eigen::VectorXd& r) {
            Eigen::VectorXd z = llt_.solve(r);
            if (k > 0) {
                z -= y * cap_f.solve(u.transpose() * z);
            }
            return z;
        };
        auto apply_h = [&](const Eigen::VectorXd& v) {
            Eigen::VectorXd out = h_.selfadjointView<Eigen::Lower>() * v;
            if (k > 0) {
                out += u * (u.transpose() * v);
            }
            return out;
        };
        const Eigen::VectorXd rhs = -sys.grad;
        Eigen::VectorXd dx = apply_inverse(rhs);
        // Iterative refinement guards against cancellation in the update.
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd res = rhs - apply_h(dx);
            if (!(res.norm() > 1e-12 * rhs.norm())) {
                return dx;
            }
            dx += apply_inverse(res);
        }
        const Eigen::VectorXd res = rhs - apply_h(dx);
        if (!(res.norm() <= 1e-8 * rhs.norm())) {
            return dense(sys);
        }
        return dx;
    }

    Eigen::VectorXd dense(const NewtonSystem& sys)
    {
        const int n = p_.n_vars;
        const int q = static_cast<int>(p_.eq_matrix.rows());
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
        for (const auto& tr : sys.sparse_lower) {
            h(tr.row(), tr.col()) += tr.value();
            if (tr.row() != tr.col()) {
                h(tr.col(), tr.row()) += tr.value();
            }
        }
        for (const auto& r : sys.rank_one) {
            const auto& sup = *r.support;
            for (std::size_t a = 0; a < sup.size(); ++a) {
                for (std::size_t b = 0; b < sup.size(); ++b) {
                    h(sup[a], sup[b]) += r.weight * r.a[a] * r.a[b];
                }
            }
        }
        if (q > 0) {
            Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + q, n + q);
            kkt.topLeftCorner(n, n) = h;
            kkt.topRightCorner(n, q) = p_.eq_matrix.transpose();
            kkt.bottomLeftCorner(q, n) = p_.eq_matrix;
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + q);
            rhs.head(n) = -sys.grad;
            return kkt.partialPivLu().solve(rhs).head(n);
        }
        Eigen::LLT<Eigen::MatrixXd> llt(h);
        if (llt.info() == Eigen::Success) {
            return llt.solve(-sys.grad);
        }
        // Numerically indefinite: fall back to a regularized LDL^T.
        const double reg = 1e-12 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
        h.diagonal().array() += reg;
        return h.ldlt().solve(-sys.grad);
    }

    const ConvexProgram& p_;
    Eigen::SparseMatrix<double> h_;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
    bool analyzed_ = false;
};

// Largest step keeping x + a dx strictly within the simple bounds.
double max_bound_step(const CompiledProgram& cp, const Eigen::VectorXd& x, const Eigen::VectorXd& dx)
{
    const auto& p = *cp.prog;
    double amax = kInf;
    for (int j : cp.finite_lower) {
        if (dx[j] < 0) {
            amax = std::min(amax, (p.lower[j] - x[j]) / dx[j]);
        }
    }
    for (int j : cp.finite_upper) {
        if (dx[j] > 0) {
            amax = std::min(amax, (p.upper[j] - x[j]) / dx[j]);
        }
    }
    return amax;
}

struct CenterResult {
    int newton_steps = 0;
    double decrement_sq = 0.0;
    bool stalled = false;
};

// Newton centering for fixed t. `stop` may end the iteration early (phase I).
template <typename StopFn>
CenterResult center(const CompiledProgram& cp, Eigen::VectorXd& x, double t, const SolveOptions& opts,
                    int budget, StopFn&& stop, Scratch& s)
{
    CenterResult res;
    NewtonSystem sys;
    NewtonSolver newton(*cp.prog);
    const double f_scale = std::abs(eval_value(cp.objective, x, s)) + 1.0;
    while (res.newton_steps < budget) {
        assemble(cp, x, t, sys, s);
        const Eigen::VectorXd dx = newton.direction(sys);
        const double slope = sys.grad.dot(dx);
        res.decrement_sq = -slope;
        if (!std::isfinite(slope)) {
            res.stalled = true;
            return res;
        }
        const double phi0 = barrier_value(cp, x, t, s);
        // Rounding floor for comparisons of t f(x), which grows with t.
        const double noise = 1e-13 * (t * f_scale + std::abs(phi0));
        if (res.decrement_sq / 2.0 <= std::max(opts.center_tol, noise)) {
            return res;
        }
        ++res.newton_steps;

        double alpha = 1.0;
        const double amax = max_bound_step(cp, x, dx);
        if (amax <= 1.0) {
            alpha = 0.99 * amax;
        }
        Eigen::VectorXd trial;
        bool accepted = false;
        while (alpha > 1e-16) {
            trial = x + alpha * dx;
            const double phi = barrier_value(cp, trial, t, s);
            if (phi <= phi0 + opts.armijo * alpha * slope + noise) {
                accepted = true;
                break;
            }
            alpha *= opts.backtrack;
        }
        if (!accepted) {
            res.stalled = true;
            return res;
        }
        x = trial;
        if (stop(x)) {
            return res;
        }
    }
    return res;
}

// Returns a strictly feasible point or nullopt when the phase-I optimum is nonnegative.
std::optional<Eigen::VectorXd> phase_one(const ConvexProgram& prog, Eigen::VectorXd x, const SolveOptions& opts,
                                         int& newton_used)
{
    const int n = prog.n_vars;
    // Move into the interior of the simple bounds first.
    for (int j = 0; j < n; ++j) {
        const double lo = prog.lower[j];
        const double hi = prog.upper[j];
        if (std::isfinite(lo) && std::isfinite(hi)) {
            const double w = hi - lo;
            x[j] = std::clamp(x[j], lo + 1e-3 * w, hi - 1e-3 * w);
        } else if (std::isfinite(lo)) {
            x[j] = std::max(x[j], lo + std::max(1e-6, 1e-6 * std::abs(lo)));
        } else if (std::isfinite(hi)) {
            x[j] = std::min(x[j], hi - std::max(1e-6, 1e-6 * std::abs(hi)));
        }
    }
    Scratch s;
    std::vector<Compiled> gs;
    for (const auto& g : prog.inequalities) {
        gs.push_back(compile(g, n));
    }
    double worst = -kInf;
    for (const auto& g : gs) {
        worst = std::max(worst, eval_value(g, x, s));
    }
    if (worst < -opts.interior_margin || gs.empty()) {
        return x;
    }

    // minimize s  s.t.  g_i(x) - s <= 0,  s >= -1
    ConvexProgram p1(n + 1);
    p1.lower.head(n) = prog.lower;
    p1.upper.head(n) = prog.upper;
    p1.lower[n] = -1.0;
    p1.eq_rhs = prog.eq_rhs;
    if (prog.eq_matrix.rows() > 0) {
        p1.eq_matrix = Eigen::MatrixXd::Zero(prog.eq_matrix.rows(), n + 1);
        p1.eq_matrix.leftCols(n) = prog.eq_matrix;
    }
    p1.objective.add_linear(n, 1.0);
    for (const auto& g : prog.inequalities) {
        Function h = g;
        h.add_linear(n, -1.0);
        p1.add_inequality(std::move(h), "");
    }
    CompiledProgram cp = compile(p1);
    Eigen::VectorXd z(n + 1);
    z.head(n) = x;
    z[n] = std::max(worst + 1.0, 0.0);

    auto done = [&](const Eigen::VectorXd& v) { return v[n] < -opts.interior_margin; };
    const int m = cp.barrier_count();
    double t = 1.0;
    newton_used = 0;
    for (int outer = 0; outer < 60 && newton_used < opts.max_phase1_newton; ++outer) {
        auto r = center(cp, z, t, opts, opts.max_phase1_newton - newton_used, done, s);
        newton_used += r.newton_steps;
        if (done(z)) {
            return Eigen::VectorXd(z.head(n));
        }
        if (m / t < 1e-10) {
            break;
        }
        t *= opts.mu;
    }
    // The optimum is within m/t of z[n]; a negative value still gives a strict interior point.
    if (z[n] < 0.0) {
        Eigen::VectorXd xs = z.head(n);
        if (strictly_feasible(prog, xs)) {
            return xs;
        }
    }
    return std::nullopt;
}

}  // namespace

ConvexProgram::ConvexProgram(int n)
    : n_vars(n), lower(Eigen::VectorXd::Constant(n, -kInf)), upper(Eigen::VectorXd::Constant(n, kInf))
{
}

void ConvexProgram::add_inequality(Function g, std::string name)
{
    inequalities.push_back(std::move(g));
    inequality_names.push_back(std::move(name));
}

const char* to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal:
        return "Optimal";
    case SolveStatus::MaxIter:
        return "MaxIter";
    case SolveStatus::Infeasible:
        return "Infeasible";
    }
    return "?";
}

double value(const Function& f, const Eigen::VectorXd& x)
{
    Scratch s;
    return eval_value(compile(f, static_cast<int>(x.size())), x, s);
}

Eigen::VectorXd gradient(const Function& f, const Eigen::VectorXd& x)
{
    Scratch s;
    const Compiled c = compile(f, static_cast<int>(x.size()));
    Eigen::VectorXd lg;
    eval_local(c, x, &lg, nullptr, s);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (std::size_t a = 0; a < c.support.size(); ++a) {
        g[c.support[a]] += lg[a];
    }
    return g;
}

Eigen::MatrixXd hessian(const Function& f, const Eigen::VectorXd& x)
{
    Scratch s;
    const Compiled c = compile(f, static_cast<int>(x.size()));
    Eigen::VectorXd lg;
    Eigen::MatrixXd lh;
    eval_local(c, x, &lg, &lh, s);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(x.size(), x.size());
    for (std::size_t a = 0; a < c.support.size(); ++a) {
        for (std::size_t b = 0; b < c.support.size(); ++b) {
            h(c.support[a], c.support[b]) += lh(a, b);
        }
    }
    return h;
}

double max_violation(const ConvexProgram& prog, const Eigen::VectorXd& x)
{
    double worst = -kInf;
    for (const auto& g : prog.inequalities) {
        worst = std::max(worst, value(g, x));
    }
    for (int j = 0; j < prog.n_vars; ++j) {
        worst = std::max(worst, prog.lower[j] - x[j]);
        worst = std::max(worst, x[j] - prog.upper[j]);
    }
    if (prog.eq_matrix.rows() > 0) {
        worst = std::max(worst, (prog.eq_matrix * x - prog.eq_rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

bool strictly_feasible(const ConvexProgram& prog, const Eigen::VectorXd& x)
{
    const CompiledProgram cp = compile(prog);
    Scratch s;
    if (!inside_bounds(cp, x)) {
        return false;
    }
    for (const auto& g : cp.inequalities) {
        if (!(eval_value(g, x, s) < 0.0)) {
            return false;
        }
    }
    return true;
}

SolveReport solve(const ConvexProgram& prog, const Eigen::VectorXd& x0, const SolveOptions& opts)
{
    if (x0.size() != prog.n_vars || prog.lower.size() != prog.n_vars || prog.upper.size() != prog.n_vars) {
        throw std::invalid_argument("solve: dimension mismatch");
    }
    if (prog.eq_matrix.rows() > 0) {
        if (prog.eq_matrix.cols() != prog.n_vars || prog.eq_rhs.size() != prog.eq_matrix.rows()) {
            throw std::invalid_argument("solve: equality dimensions");
        }
        const double r = (prog.eq_matrix * x0 - prog.eq_rhs).cwiseAbs().maxCoeff();
        if (r > 1e-9 * (1.0 + prog.eq_rhs.cwiseAbs().maxCoeff())) {
            throw std::invalid_argument("solve: start point violates A x = b");
        }
    }

    SolveReport rep;
    Eigen::VectorXd x = x0;
    if (!strictly_feasible(prog, x)) {
        int used = 0;
        auto start = phase_one(prog, x, opts, used);
        rep.phase1_newton_iterations = used;
        if (!start) {
            rep.status = SolveStatus::Infeasible;
            rep.x_opt = x0;
            rep.max_violation = max_violation(prog, x0);
            return rep;
        }
        x = *start;
    }

    const CompiledProgram cp = compile(prog);
    Scratch s;
    const int m = cp.barrier_count();
    const double f0 = eval_value(cp.objective, x, s);
    double t = opts.t0 > 0 ? opts.t0 : (m > 0 ? m / std::max(std::abs(f0), 1e-8) : 1.0);
    auto never = [](const Eigen::VectorXd&) { return false; };

    rep.status = SolveStatus::MaxIter;
    double last_decrement = 0.0;
    while (true) {
        auto r = center(cp, x, t, opts, opts.max_newton - rep.newton_iterations, never, s);
        rep.newton_iterations += r.newton_steps;
        ++rep.barrier_iterations;
        last_decrement = r.decrement_sq;
        const double f = eval_value(cp.objective, x, s);
        const double gap = (m + std::max(last_decrement, 0.0)) / t;
        rep.gap_history.push_back(m / t);
        rep.kkt_residual = gap / std::max(1.0, std::abs(f));
        if (m == 0 || rep.kkt_residual <= opts.tol) {
            rep.status = (r.stalled && last_decrement > 1e-3) ? SolveStatus::MaxIter : SolveStatus::Optimal;
            break;
        }
        if (rep.newton_iterations >= opts.max_newton) {
            break;
        }
        if (r.stalled && last_decrement > 1.0) {
            // Line search cannot make progress far from the central path.
            break;
        }
        t *= opts.mu;
    }
    rep.x_opt = x;
    rep.objective_value = eval_value(cp.objective, x, s);
    rep.max_violation = max_violation(prog, x);
    return rep;
}

double check_function_derivatives(const Function& f, const Eigen::VectorXd& x, double h)
{
    const Compiled c = compile(f, static_cast<int>(x.size()));
    Scratch s;
    Eigen::VectorXd lg;
    eval_local(c, x, &lg, nullptr, s);
    const double scale = std::max(lg.cwiseAbs().maxCoeff(), 1e-300);
    // Linear coefficients are exact. For each variable only the callbacks
    // that read it are differenced, which keeps cancellation error small.
    Compiled nonlinear = c;
    nonlinear.constant = 0.0;
    nonlinear.linear.clear();
    Eigen::VectorXd exact = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.support.size()));
    for (const auto& [li, coef] : c.linear) {
        exact[li] += coef;
    }
    double worst = 0.0;
    for (std::size_t a = 0; a < c.support.size(); ++a) {
        const int j = c.support[a];
        nonlinear.terms.clear();
        for (const auto& t : c.terms) {
            if (std::find(t.local.begin(), t.local.end(), static_cast<int>(a)) != t.local.end()) {
                nonlinear.terms.push_back(t);
            }
        }
        // An absolute step suits variables that enter through sums, a relative
        // step suits small positive variables under a logarithm. Both are
        // tried and the closer estimate is kept; a wrong gradient misses both.
        std::vector<double> steps{h * std::max(1.0, std::abs(x[j]))};
        if (x[j] > 0 && steps[0] > 1e-3 * x[j]) {
            if (steps[0] >= x[j]) {
                steps[0] = 0.5 * x[j];
            }
            steps.push_back(h * x[j]);
        }
        double best = std::numeric_limits<double>::infinity();
        for (double step : steps) {
            Eigen::VectorXd xp = x, xm = x;
            xp[j] += step;
            xm[j] -= step;
            const double fd = exact[static_cast<Eigen::Index>(a)] +
                              (eval_value(nonlinear, xp, s) - eval_value(nonlinear, xm, s)) / (2.0 * step);
            const double err = std::abs(fd - lg[a]) / std::max(std::abs(lg[a]), scale);
            if (std::isfinite(err)) {
                best = std::min(best, err);
            }
        }
        worst = std::max(worst, best);
    }
    return worst;
}

double check_derivatives(const ConvexProgram& prog, const Eigen::VectorXd& x, double h)
{
    double worst = check_function_derivatives(prog.objective, x, h);
    for (const auto& g : prog.inequalities) {
        worst = std::max(worst, check_function_derivatives(g, x, h));
    }
    return worst;
}

}  // namespace flsched::convex
