// Copyright 2026 The vqfie Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file optimize.hpp
 * Classical outer-loop optimizers.
 *
 * cobyla is a derivative-free trust-region method over a simplex of n + 1
 * interpolation points with a linear model; nelder_mead is the usual
 * reflection/expansion/contraction simplex search; grad_descent follows a
 * caller-supplied gradient (typically the parameter-shift rule).
 *
 * All methods maximize. For the two simplex methods one iteration is one
 * objective evaluation; for grad_descent it is one step.
 */
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace vqfie {

using Objective = std::function<double(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

enum class Method { cobyla, nelder_mead, grad_descent };

inline const char *to_string(Method m) {
    switch (m) {
    case Method::cobyla:
        return "cobyla";
    case Method::nelder_mead:
        return "nelder_mead";
    case Method::grad_descent:
        return "grad_descent";
    }
    return "?";
}

inline Method parse_method(const std::string &s) {
    if (s == "cobyla") {
        return Method::cobyla;
    }
    if (s == "nelder_mead") {
        return Method::nelder_mead;
    }
    if (s == "grad_descent") {
        return Method::grad_descent;
    }
    throw InvalidArgument("unknown optimizer method '" + s + "'");
}

struct OptimizerConfig {
    Method method = Method::cobyla;
    int max_iters = 200;
    int restarts = 30;
    double initial_step = 0.5;   ///< trust radius / simplex edge, radians
    double shrink = 0.5;         ///< trust radius reduction factor
    double learning_rate = 0.1;  ///< grad_descent only
    double convergence_tol = 1e-8; ///< stop once the trust radius falls below this
    std::uint64_t seed = 0;
    int workers = 1;

    void validate() const {
        if (max_iters < 1) {
            throw InvalidArgument("optimizer.max_iters must be >= 1");
        }
        if (restarts < 1) {
            throw InvalidArgument("optimizer.restarts must be >= 1");
        }
        if (!(initial_step > 0.0) || !(shrink > 0.0 && shrink < 1.0)) {
            throw InvalidArgument("optimizer.initial_step must be > 0 and shrink in (0,1)");
        }
        if (workers < 1) {
            throw InvalidArgument("optimizer.workers must be >= 1");
        }
    }
};

/// Trajectory of one restart.
struct RestartTrace {
    std::vector<double> history; ///< best-so-far value after each iteration
    std::vector<double> best_params;
    double best_value = -std::numeric_limits<double>::infinity();
    std::uint64_t evaluations = 0;
};

struct OptResult {
    std::vector<double> best_params;
    double best_value = -std::numeric_limits<double>::infinity();
    std::vector<double> history; ///< winner's best-so-far trajectory
    int restart_index = 0;
    std::vector<RestartTrace> restarts;
    std::uint64_t objective_calls = 0; ///< summed over restarts
};

/// Seed for work unit `index`: splitmix64 of seed xor index.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = (seed ^ index) + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Run fn(i) for i in [0, count) on up to `workers` threads. The first
/// exception by unit index is rethrown after all threads finish.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn &&fn) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, workers));
    if (threads == 1 || count <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < std::min(threads, count); ++t) {
            pool.emplace_back(worker);
        }
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

/// Quantum-circuit calls of one parameter-shift gradient, 2p.
inline std::uint64_t grad_step_calls(int p) { return 2ULL * static_cast<std::uint64_t>(p); }

/// Calls to train VQSE for t steps with s shots per circuit, 2 s t p.
inline double vqse_training_calls(double shots, int t, int p) { return 2.0 * shots * t * p; }

/// One ascent step params + lr * grad (descent on -objective).
inline std::vector<double> grad_descent_step(const GradientFn &gradient,
                                             std::span<const double> params, double lr,
                                             std::uint64_t *calls = nullptr) {
    const std::vector<double> g = gradient(params);
    if (g.size() != params.size()) {
        throw ParamLengthMismatch("grad_descent_step: gradient length mismatch");
    }
    if (calls != nullptr) {
        *calls += grad_step_calls(static_cast<int>(params.size()));
    }
    std::vector<double> out(params.begin(), params.end());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] += lr * g[k];
    }
    return out;
}

/// Two-term shift rule applied to every coordinate of an objective whose
/// parameters are all rotation angles.
inline GradientFn shift_rule_gradient(Objective objective) {
    return [objective = std::move(objective)](std::span<const double> x) {
        std::vector<double> shifted(x.begin(), x.end());
        std::vector<double> g(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            shifted[k] = x[k] + std::numbers::pi / 2.0;
            const double plus = objective(shifted);
            shifted[k] = x[k] - std::numbers::pi / 2.0;
            const double minus = objective(shifted);
            shifted[k] = x[k];
            g[k] = 0.5 * (plus - minus);
        }
        return g;
    };
}

namespace detail {

class Tracker {
  public:
    Tracker(const Objective &f, RestartTrace &trace, int budget)
        : f_(f), trace_(trace), budget_(budget) {}

    bool exhausted() const { return static_cast<int>(trace_.history.size()) >= budget_; }

    double operator()(const Eigen::VectorXd &x) {
        const double v = f_(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        ++trace_.evaluations;
        if (!std::isfinite(v)) {
            throw ObjectiveEvaluationFailure("objective returned a non-finite value");
        }
        record(v, x);
        return v;
    }

    void record(double v, const Eigen::VectorXd &x) {
        if (v > trace_.best_value) {
            trace_.best_value = v;
            trace_.best_params.assign(x.data(), x.data() + x.size());
        }
        trace_.history.push_back(trace_.best_value);
    }

  private:
    const Objective &f_;
    RestartTrace &trace_;
    int budget_;
};

// Minimizes g = -objective.
inline void run_cobyla(Tracker &eval, Eigen::VectorXd x0, const OptimizerConfig &cfg) {
    const Eigen::Index n = x0.size();
    double rho = cfg.initial_step;
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    auto build_simplex = [&](const Eigen::VectorXd &base, double base_val) {
        pts.assign(1, base);
        vals.assign(1, base_val);
        for (Eigen::Index i = 0; i < n && !eval.exhausted(); ++i) {
            Eigen::VectorXd p = base;
            p[i] += rho;
            pts.push_back(p);
            vals.push_back(-eval(p));
        }
    };
    if (eval.exhausted()) {
        return;
    }
    build_simplex(x0, -eval(x0));
    while (!eval.exhausted() && rho >= cfg.convergence_tol) {
        if (static_cast<Eigen::Index>(pts.size()) != n + 1) {
            return;
        }
        const auto best = static_cast<std::size_t>(
            std::min_element(vals.begin(), vals.end()) - vals.begin());
        // Linear model through the simplex, anchored at the best vertex.
        Eigen::MatrixXd d(n, n);
        Eigen::VectorXd df(n);
        std::vector<std::size_t> others;
        for (std::size_t i = 0, r = 0; i < pts.size(); ++i) {
            if (i == best) {
                continue;
            }
            d.row(static_cast<Eigen::Index>(r)) = (pts[i] - pts[best]).transpose();
            df[static_cast<Eigen::Index>(r)] = vals[i] - vals[best];
            others.push_back(i);
            ++r;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(d);
        if (!lu.isInvertible() || lu.rcond() < 1e-10) {
            build_simplex(pts[best], vals[best]);
            continue;
        }
        const Eigen::VectorXd grad = lu.solve(df);
        const double gnorm = grad.norm();
        if (gnorm == 0.0) {
            rho *= cfg.shrink;
            build_simplex(pts[best], vals[best]);
            continue;
        }
        const Eigen::VectorXd step = -(rho / gnorm) * grad;
        const Eigen::VectorXd trial = pts[best] + step;
        const double trial_val = -eval(trial);
        // Coefficients of the step in the edge basis: replacing vertex j by
        // the trial scales the simplex volume by |lambda_j|.
        const Eigen::VectorXd lambda = lu.transpose().solve(step);
        auto replace_score = [&](std::size_t k) {
            const double dist = (pts[others[k]] - pts[best]).norm() / rho;
            return std::abs(lambda[static_cast<Eigen::Index>(k)]) * std::max(1.0, dist * dist);
        };
        std::size_t out_k = 0;
        for (std::size_t k = 1; k < others.size(); ++k) {
            if (replace_score(k) > replace_score(out_k)) {
                out_k = k;
            }
        }
        if (trial_val < vals[best]) {
            pts[others[out_k]] = trial;
            vals[others[out_k]] = trial_val;
            continue;
        }
        if (trial_val < vals[others[out_k]] && replace_score(out_k) > 0.1) {
            pts[others[out_k]] = trial;
            vals[others[out_k]] = trial_val;
        }
        // The step failed. If some vertex is far from the best one, move it
        // to distance rho along the dual direction that keeps the simplex
        // nondegenerate; otherwise the model is trustworthy and rho shrinks.
        std::size_t far_k = 0;
        double far_dist = -1.0;
        for (std::size_t k = 0; k < others.size(); ++k) {
            const double dist = (pts[others[k]] - pts[best]).norm();
            if (dist > far_dist) {
                far_dist = dist;
                far_k = k;
            }
        }
        if (far_dist <= 2.0 * rho) {
            rho *= cfg.shrink;
            continue;
        }
        if (eval.exhausted()) {
            return;
        }
        Eigen::VectorXd dir = lu.inverse().col(static_cast<Eigen::Index>(far_k));
        if (dir.dot(grad) > 0.0) {
            dir = -dir;
        }
        const Eigen::VectorXd p = pts[best] + (rho / dir.norm()) * dir;
        pts[others[far_k]] = p;
        vals[others[far_k]] = -eval(p);
    }
}

inline void run_nelder_mead(Tracker &eval, const Eigen::VectorXd &x0, const OptimizerConfig &cfg) {
    const Eigen::Index n = x0.size();
    std::vector<Eigen::VectorXd> pts{x0};
    std::vector<double> vals;
    if (eval.exhausted()) {
        return;
    }
    vals.push_back(-eval(x0));
    for (Eigen::Index i = 0; i < n && !eval.exhausted(); ++i) {
        Eigen::VectorXd p = x0;
        p[i] += cfg.initial_step;
        pts.push_back(p);
        vals.push_back(-eval(p));
    }
    if (static_cast<Eigen::Index>(pts.size()) != n + 1) {
        return;
    }
    std::vector<std::size_t> order(pts.size());
    while (!eval.exhausted()) {
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t lo = order.front();
        const std::size_t hi = order.back();
        const std::size_t second = order[order.size() - 2];
        if ((pts[hi] - pts[lo]).norm() < cfg.convergence_tol) {
            return;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i != hi) {
                centroid += pts[i];
            }
        }
        centroid /= static_cast<double>(n);
        const Eigen::VectorXd xr = centroid + (centroid - pts[hi]);
        const double fr = -eval(xr);
        if (fr < vals[lo]) {
            if (eval.exhausted()) {
                pts[hi] = xr;
                vals[hi] = fr;
                return;
            }
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[hi]);
            const double fe = -eval(xe);
            if (fe < fr) {
                pts[hi] = xe;
                vals[hi] = fe;
            } else {
                pts[hi] = xr;
                vals[hi] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[hi] = xr;
            vals[hi] = fr;
            continue;
        }
        if (eval.exhausted()) {
            return;
        }
        const bool outside = fr < vals[hi];
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                           : Eigen::VectorXd(centroid + 0.5 * (pts[hi] - centroid));
        const double fc = -eval(xc);
        if (fc < std::min(fr, vals[hi])) {
            pts[hi] = xc;
            vals[hi] = fc;
            continue;
        }
        for (std::size_t i = 0; i < pts.size() && !eval.exhausted(); ++i) {
            if (i == lo) {
                continue;
            }
            pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
            vals[i] = -eval(pts[i]);
        }
    }
}

inline void run_grad_descent(const Objective &f, const GradientFn &gradient, RestartTrace &trace,
                             Eigen::VectorXd x, const OptimizerConfig &cfg) {
    auto span_of = [](const Eigen::VectorXd &v) {
        return std::span<const double>(v.data(), static_cast<std::size_t>(v.size()));
    };
    double value = f(span_of(x));
    ++trace.evaluations;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const std::vector<double> next =
            grad_descent_step(gradient, span_of(x), cfg.learning_rate, &trace.evaluations);
        x = Eigen::Map<const Eigen::VectorXd>(next.data(), static_cast<Eigen::Index>(next.size()));
        value = f(span_of(x));
        ++trace.evaluations;
        if (!std::isfinite(value)) {
            throw ObjectiveEvaluationFailure("objective returned a non-finite value");
        }
        if (value > trace.best_value) {
            trace.best_value = value;
            trace.best_params = next;
        }
        trace.history.push_back(trace.best_value);
    }
}

} // namespace detail

/// Uniform [0, 2 pi) starting point for restart `index`.
inline std::vector<double> initial_params(std::size_t dim, std::uint64_t seed, std::uint64_t index) {
    std::mt19937_64 rng(derive_seed(seed, index));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::vector<double> x(dim);
    for (double &v : x) {
        v = angle(rng);
    }
    return x;
}

/// One restart from a given starting point.
inline RestartTrace maximize_from(const Objective &objective, std::span<const double> start,
                                  const OptimizerConfig &cfg, const GradientFn *gradient = nullptr) {
    RestartTrace trace;
    Eigen::VectorXd x0 =
        Eigen::Map<const Eigen::VectorXd>(start.data(), static_cast<Eigen::Index>(start.size()));
    switch (cfg.method) {
    case Method::cobyla: {
        detail::Tracker t(objective, trace, cfg.max_iters);
        detail::run_cobyla(t, x0, cfg);
        break;
    }
    case Method::nelder_mead: {
        detail::Tracker t(objective, trace, cfg.max_iters);
        detail::run_nelder_mead(t, x0, cfg);
        break;
    }
    case Method::grad_descent: {
        if (gradient == nullptr) {
            throw InvalidArgument("grad_descent needs a gradient function");
        }
        detail::run_grad_descent(objective, *gradient, trace, x0, cfg);
        break;
    }
    }
    if (trace.best_params.empty()) {
        trace.best_params.assign(start.begin(), start.end());
    }
    return trace;
}

/// Best of cfg.restarts independent runs. Restart k starts from
/// initial_params(dim, cfg.seed, k); ties go to the lowest restart index.
inline OptResult maximize(const Objective &objective, std::size_t dim, const OptimizerConfig &cfg,
                          const GradientFn *gradient = nullptr) {
    cfg.validate();
    if (dim == 0) {
        throw InvalidArgument("maximize: empty parameter vector");
    }
    OptResult result;
    result.restarts.resize(static_cast<std::size_t>(cfg.restarts));
    parallel_for(result.restarts.size(), cfg.workers, [&](std::size_t k) {
        const std::vector<double> start = initial_params(dim, cfg.seed, k);
        try {
            result.restarts[k] = maximize_from(objective, start, cfg, gradient);
        } catch (const ObjectiveEvaluationFailure &e) {
            throw ObjectiveEvaluationFailure("restart " + std::to_string(k) + ": " + e.what());
        } catch (const Error &) {
            throw;
        } catch (const std::exception &e) {
            throw ObjectiveEvaluationFailure("restart " + std::to_string(k) + ": " + e.what());
        }
    });
    for (std::size_t k = 0; k < result.restarts.size(); ++k) {
        const RestartTrace &t = result.restarts[k];
        result.objective_calls += t.evaluations;
        if (k == 0 || t.best_value > result.best_value) {
            result.best_value = t.best_value;
            result.best_params = t.best_params;
            result.history = t.history;
            result.restart_index = static_cast<int>(k);
        }
    }
    return result;
}

inline const char *history_csv_header() { return "restart,iteration,cost"; }

/// One row per (restart, iteration), iterations counted from 1.
inline std::string history_csv_rows(const OptResult &r) {
    std::ostringstream os;
    char buf[64];
    for (std::size_t k = 0; k < r.restarts.size(); ++k) {
        const auto &h = r.restarts[k].history;
        for (std::size_t i = 0; i < h.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", h[i]);
            os << k << ',' << (i + 1) << ',' << buf << '\n';
        }
    }
    return os.str();
}

} // namespace vqfie
