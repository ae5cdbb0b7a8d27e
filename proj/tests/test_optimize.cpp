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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "vqfie/experiments.hpp"
#include "vqfie/optimize.hpp"

namespace {

double bowl(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - 0.5 * static_cast<double>(k + 1);
        s += d * d;
    }
    return -s;
}

TEST(Optimize, MethodNames) {
    for (auto m : {vqfie::Method::cobyla, vqfie::Method::nelder_mead, vqfie::Method::grad_descent}) {
        EXPECT_EQ(vqfie::parse_method(vqfie::to_string(m)), m);
    }
    EXPECT_THROW(vqfie::parse_method("bfgs"), vqfie::InvalidArgument);
}

TEST(Optimize, ConfigValidation) {
    vqfie::OptimizerConfig c;
    c.restarts = 0;
    EXPECT_THROW(c.validate(), vqfie::InvalidArgument);
    c = {};
    c.shrink = 1.0;
    EXPECT_THROW(c.validate(), vqfie::InvalidArgument);
    EXPECT_THROW(vqfie::maximize(bowl, 0, vqfie::OptimizerConfig{}), vqfie::InvalidArgument);
}

TEST(Optimize, QuadraticBowl) {
    for (auto method : {vqfie::Method::cobyla, vqfie::Method::nelder_mead}) {
        vqfie::OptimizerConfig c;
        c.method = method;
        c.restarts = 3;
        c.max_iters = 2000;
        const auto r = vqfie::maximize(bowl, 3, c);
        for (std::size_t k = 0; k < 3; ++k) {
            EXPECT_NEAR(r.best_params[k], 0.5 * static_cast<double>(k + 1), 1e-4)
                << vqfie::to_string(method);
        }
    }
}

TEST(Optimize, GradientAscentOnBowl) {
    const vqfie::GradientFn grad = [](std::span<const double> x) {
        std::vector<double> g(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            g[k] = -2.0 * (x[k] - 0.5 * static_cast<double>(k + 1));
        }
        return g;
    };
    vqfie::OptimizerConfig c;
    c.method = vqfie::Method::grad_descent;
    c.restarts = 1;
    c.max_iters = 200;
    const auto r = vqfie::maximize(bowl, 3, c, &grad);
    EXPECT_NEAR(r.best_value, 0.0, 1e-12);
    EXPECT_EQ(r.history.size(), 200U);
    // One evaluation up front, then per step a gradient (2p) and a value.
    EXPECT_EQ(r.objective_calls, 1U + 200U * (2U * 3U + 1U));
    c.restarts = 1;
    EXPECT_THROW(vqfie::maximize(bowl, 3, c), vqfie::InvalidArgument);
}

TEST(Optimize, GradStep) {
    const vqfie::GradientFn grad = [](std::span<const double> x) {
        return std::vector<double>(x.size(), 2.0);
    };
    std::uint64_t calls = 0;
    const std::vector<double> p = {1.0, -1.0};
    const auto next = vqfie::grad_descent_step(grad, p, 0.25, &calls);
    EXPECT_EQ(next, (std::vector<double>{1.5, -0.5}));
    EXPECT_EQ(calls, 4U);
    EXPECT_EQ(vqfie::grad_step_calls(7), 14U);
    EXPECT_DOUBLE_EQ(vqfie::vqse_training_calls(1000, 200, 12), 4.8e6);
    const vqfie::GradientFn bad = [](std::span<const double>) { return std::vector<double>(1); };
    EXPECT_THROW(vqfie::grad_descent_step(bad, p, 0.1), vqfie::ParamLengthMismatch);
}

TEST(Optimize, ShiftRuleIsExactForSinusoids) {
    const vqfie::Objective f = [](std::span<const double> x) {
        return std::cos(x[0]) + 0.3 * std::sin(x[1]);
    };
    const auto g = vqfie::shift_rule_gradient(f)(std::vector<double>{0.4, -1.1});
    EXPECT_NEAR(g[0], -std::sin(0.4), 1e-14);
    EXPECT_NEAR(g[1], 0.3 * std::cos(-1.1), 1e-14);
}

TEST(Optimize, SingleQubitExpectationMaximum) {
    // <Z> after Ry(b) on |0> is cos b; the maximum is 1 at b = 0 mod 2 pi.
    const vqfie::Objective f = [](std::span<const double> b) { return std::cos(b[0]); };
    for (auto method : {vqfie::Method::cobyla, vqfie::Method::nelder_mead}) {
        vqfie::OptimizerConfig c;
        c.method = method;
        c.restarts = 4;
        const auto r = vqfie::maximize(f, 1, c);
        EXPECT_NEAR(r.best_value, 1.0, 1e-8);
    }
}

TEST(Optimize, HistoryIsBestSoFar) {
    const vqfie::Objective f = [](std::span<const double> b) {
        return std::cos(b[0]) * std::sin(b[1]) + 0.1 * std::cos(3.0 * b[2]);
    };
    vqfie::OptimizerConfig c;
    c.restarts = 5;
    c.max_iters = 150;
    const auto r = vqfie::maximize(f, 3, c);
    for (const auto &t : r.restarts) {
        EXPECT_LE(t.history.size(), 150U);
        for (std::size_t i = 1; i < t.history.size(); ++i) {
            EXPECT_GE(t.history[i], t.history[i - 1]);
        }
        EXPECT_LE(t.best_value, r.best_value);
    }
    EXPECT_EQ(r.history.back(), r.best_value);
    EXPECT_EQ(r.best_value, f(r.best_params));
}

TEST(Optimize, DeterministicAcrossWorkers) {
    const vqfie::Objective f = [](std::span<const double> b) {
        return std::cos(b[0] - 1.0) * std::cos(b[1]) + 0.2 * std::sin(b[0] + b[1]);
    };
    vqfie::OptimizerConfig c;
    c.restarts = 9;
    c.max_iters = 80;
    c.seed = 17;
    const auto one = vqfie::maximize(f, 2, c);
    const auto again = vqfie::maximize(f, 2, c);
    c.workers = 4;
    const auto four = vqfie::maximize(f, 2, c);
    EXPECT_EQ(vqfie::history_csv_rows(one), vqfie::history_csv_rows(again));
    EXPECT_EQ(vqfie::history_csv_rows(one), vqfie::history_csv_rows(four));
    EXPECT_EQ(one.best_params, four.best_params);
    EXPECT_EQ(one.restart_index, four.restart_index);
}

TEST(Optimize, SeedsAndStarts) {
    EXPECT_NE(vqfie::derive_seed(1, 0), vqfie::derive_seed(1, 1));
    EXPECT_NE(vqfie::derive_seed(1, 0), vqfie::derive_seed(2, 0));
    EXPECT_EQ(vqfie::initial_params(4, 3, 2), vqfie::initial_params(4, 3, 2));
    for (double x : vqfie::initial_params(50, 3, 2)) {
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, 2.0 * std::numbers::pi);
    }
}

TEST(Optimize, FailuresNameTheRestart) {
    const vqfie::Objective f = [](std::span<const double> b) {
        return b[0] > 3.0 ? std::nan("") : 0.0;
    };
    vqfie::OptimizerConfig c;
    c.restarts = 6;
    c.max_iters = 5;
    c.workers = 3;
    try {
        vqfie::maximize(f, 1, c);
        FAIL() << "expected a failure";
    } catch (const vqfie::ObjectiveEvaluationFailure &e) {
        EXPECT_NE(std::string(e.what()).find("restart "), std::string::npos);
    }
}

TEST(Optimize, ParallelForRethrowsLowestIndex) {
    try {
        vqfie::parallel_for(20, 4, [](std::size_t i) {
            if (i == 7 || i == 13) {
                throw std::runtime_error(std::to_string(i));
            }
        });
        FAIL() << "expected a throw";
    } catch (const std::runtime_error &e) {
        EXPECT_STREQ(e.what(), "7");
    }
}

TEST(Optimize, TwoQubitPureProbeNearsHeisenbergLimit) {
    vqfie::OptimizerConfig oc;
    oc.restarts = 10;
    oc.seed = 1;
    const auto run = vqfie::train_probe(vqfie::basis_state(2, 0), vqfie::collective_z(2), 3, 1, 0.3,
                                        0.1, oc);
    EXPECT_GE(run.opt.best_value, 0.95 * 16.0);
    EXPECT_LE(run.opt.best_value, 16.0 + 1e-9);
}

} // namespace
