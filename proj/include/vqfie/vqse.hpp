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
 * @file vqse.hpp
 * Variational state eigensolver.
 *
 * A circuit V is trained so that V rho V^dag is as close to diagonal as a
 * non-degenerate diagonal Hamiltonian can tell. The m most populated basis
 * states z_i then give eigenvalue estimates (their populations) and
 * eigenvector circuits V^dag |z_i>.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "circuits.hpp"
#include "fidelity.hpp"
#include "optimize.hpp"

namespace vqfie {

/// H = sum_i q_i z_i on bitstrings, z_i the bit of qubit i.
class DiagHamiltonian {
  public:
    static constexpr double kGolden = 0.6180339887;

    /// q_i = 1 + (i-1) g / n; checks that the m lowest energies are distinct.
    DiagHamiltonian(int n, int m) : n_(n) {
        dim_of(n);
        for (int i = 0; i < n; ++i) {
            weights_.push_back(1.0 + i * kGolden / n);
        }
        check_low_spectrum(m);
    }

    DiagHamiltonian(std::vector<double> weights, int m)
        : n_(static_cast<int>(weights.size())), weights_(std::move(weights)) {
        dim_of(n_);
        for (double q : weights_) {
            if (!(q > 0.0)) {
                throw InvalidArgument("DiagHamiltonian: weights must be positive");
            }
        }
        check_low_spectrum(m);
    }

    int n_qubits() const { return n_; }
    const std::vector<double> &weights() const { return weights_; }

    double energy(std::uint64_t z) const {
        double e = 0.0;
        for (int q = 0; q < n_; ++q) {
            if ((z >> (n_ - 1 - q)) & 1U) {
                e += weights_[static_cast<std::size_t>(q)];
            }
        }
        return e;
    }

    std::vector<double> energies() const {
        std::vector<double> e(std::size_t{1} << n_);
        for (std::size_t z = 0; z < e.size(); ++z) {
            e[z] = energy(z);
        }
        return e;
    }

  private:
    void check_low_spectrum(int m) {
        const std::uint64_t d = std::uint64_t{1} << n_;
        if (m < 1 || static_cast<std::uint64_t>(m) > d) {
            throw MOutOfRange("DiagHamiltonian: m outside [1, 2^n]");
        }
        // Beyond ten qubits only low Hamming weights can hold the m lowest
        // energies, since every weight is at least 1 and at most 1 + g.
        int max_weight = n_;
        if (n_ > 10) {
            max_weight = 1;
            while ((1 << (max_weight - 1)) < m) {
                ++max_weight;
            }
            max_weight = std::min(n_, max_weight + 1);
        }
        std::vector<double> e;
        for (std::uint64_t z = 0; z < d; ++z) {
            if (std::popcount(z) <= max_weight) {
                e.push_back(energy(z));
            }
        }
        std::sort(e.begin(), e.end());
        for (int k = 1; k < m && k < static_cast<int>(e.size()); ++k) {
            if (e[static_cast<std::size_t>(k)] - e[static_cast<std::size_t>(k - 1)] < 1e-9) {
                throw DegenerateLowSpectrum("DiagHamiltonian: energies " + std::to_string(k) +
                                            " and " + std::to_string(k + 1) + " coincide");
            }
        }
    }

    int n_;
    std::vector<double> weights_;
};

/// Tr[H V rho V^dag].
inline double vqse_cost(const DiagHamiltonian &h, const Ansatz &v, std::span<const double> beta,
                        const DensityMatrix &rho) {
    if (h.n_qubits() != rho.n_qubits() || v.n_qubits() != rho.n_qubits()) {
        throw DimMismatch("vqse_cost: qubit counts differ");
    }
    const DensityMatrix out = apply(v, beta, rho);
    double cost = 0.0;
    for (Eigen::Index z = 0; z < out.dim(); ++z) {
        cost += h.energy(static_cast<std::uint64_t>(z)) * out.mat()(z, z).real();
    }
    return cost;
}

enum class Readout { exact, shots };

struct VqseResult {
    std::vector<double> beta_opt;
    std::vector<double> eigenvalue_estimates; ///< descending
    std::vector<std::uint64_t> labels;        ///< z_i, most frequent first
    ComplexMatrix eigenvectors;               ///< columns V^dag |z_i>
    std::vector<double> cost_history;
    std::int64_t n_runs = 0;                  ///< 0 in exact readout
    double final_cost = 0.0;
};

struct VqseConfig {
    OptimizerConfig optimizer{Method::grad_descent, 200, 30, 0.5, 0.5, 0.1, 1e-8, 0, 1};
    Readout readout = Readout::exact;
    std::int64_t n_runs = 1000000;
};

/// Populations of V rho V^dag: exact diagonal or n_runs multinomial draws.
inline std::vector<double> vqse_populations(const DensityMatrix &rotated, Readout readout,
                                            std::int64_t n_runs, std::uint64_t seed) {
    const auto d = static_cast<std::size_t>(rotated.dim());
    std::vector<double> p(d);
    for (std::size_t z = 0; z < d; ++z) {
        p[z] = std::max(0.0, rotated.mat()(static_cast<Eigen::Index>(z),
                                           static_cast<Eigen::Index>(z)).real());
    }
    if (readout == Readout::exact) {
        return p;
    }
    if (n_runs < 1) {
        throw InvalidArgument("vqse: n_runs must be >= 1 in shots readout");
    }
    // Multinomial via a chain of conditional binomials.
    Rng rng(seed);
    std::vector<double> freq(d, 0.0);
    std::int64_t left = n_runs;
    double mass = std::accumulate(p.begin(), p.end(), 0.0);
    for (std::size_t z = 0; z < d && left > 0; ++z) {
        const double q = mass > 0.0 ? std::clamp(p[z] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::int64_t> draw(left, q);
        const std::int64_t c = z + 1 == d ? left : draw(rng);
        freq[z] = static_cast<double>(c) / static_cast<double>(n_runs);
        left -= c;
        mass -= p[z];
    }
    return freq;
}

/// Train V on rho and read out the m leading eigen-pairs.
inline VqseResult run_vqse(const DensityMatrix &rho, int m, const Ansatz &v, const VqseConfig &cfg,
                           std::uint64_t seed) {
    if (v.n_qubits() != rho.n_qubits()) {
        throw DimMismatch("run_vqse: ansatz and state qubit counts differ");
    }
    if (m < 1 || m > rho.dim()) {
        throw MOutOfRange("run_vqse: m outside [1, 2^n]");
    }
    const DiagHamiltonian h(rho.n_qubits(), m);
    const Objective neg_cost = [&](std::span<const double> beta) {
        return -vqse_cost(h, v, beta, rho);
    };
    const GradientFn grad = shift_rule_gradient(neg_cost);
    OptimizerConfig oc = cfg.optimizer;
    oc.seed = seed;
    const OptResult best = maximize(neg_cost, static_cast<std::size_t>(v.param_count()), oc,
                                    oc.method == Method::grad_descent ? &grad : nullptr);

    VqseResult r;
    r.beta_opt = best.best_params;
    r.final_cost = -best.best_value;
    for (double x : best.history) {
        r.cost_history.push_back(-x);
    }
    r.n_runs = cfg.readout == Readout::shots ? cfg.n_runs : 0;
    const DensityMatrix rotated = apply(v, r.beta_opt, rho);
    const std::vector<double> pop =
        vqse_populations(rotated, cfg.readout, cfg.n_runs, derive_seed(seed, 0xFFFFFFFFULL));
    const std::vector<double> energies = h.energies();
    std::vector<std::uint64_t> order(pop.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
        if (pop[a] != pop[b]) {
            return pop[a] > pop[b];
        }
        return energies[a] < energies[b];
    });
    const Ansatz inv = v.inverted();
    std::vector<double> neg_beta(r.beta_opt.size());
    for (std::size_t k = 0; k < neg_beta.size(); ++k) {
        neg_beta[k] = -r.beta_opt[k];
    }
    r.eigenvectors.resize(rho.dim(), m);
    for (int i = 0; i < m; ++i) {
        const std::uint64_t z = order[static_cast<std::size_t>(i)];
        r.labels.push_back(z);
        r.eigenvalue_estimates.push_back(pop[z]);
        ComplexVector basis = ComplexVector::Zero(rho.dim());
        basis[static_cast<Eigen::Index>(z)] = 1.0;
        r.eigenvectors.col(i) = apply(inv, neg_beta, basis);
    }
    return r;
}

/// T-matrix fidelity bounds built from a VQSE result and the error state.
inline FidelityBounds vqse_fidelity_bounds(const VqseResult &r, const DensityMatrix &rho_error) {
    return tmatrix_fidelity(build_tmatrix(r.eigenvalue_estimates, r.eigenvectors, rho_error));
}

inline std::string cost_history_csv(const VqseResult &r) {
    std::ostringstream os;
    os << "iteration,cost\n";
    char buf[64];
    for (std::size_t i = 0; i < r.cost_history.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g", r.cost_history[i]);
        os << (i + 1) << ',' << buf << '\n';
    }
    return os.str();
}

} // namespace vqfie
