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
 * @file states.hpp
 * Density matrices and probe-state constructors.
 *
 * Qubit q corresponds to bit (n - 1 - q) of a basis index, so qubit 0 is the
 * most significant bit and |q0 q1 ... q_{n-1}> reads left to right.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace vqfie {

using Rng = std::mt19937_64;

/// Eigenvalues above this count towards the rank.
inline constexpr double kRankTol = 1e-10;

inline std::size_t dim_of(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 13) {
        throw InvalidArgument("qubit count must be in [1, 13], got " + std::to_string(n_qubits));
    }
    return std::size_t{1} << n_qubits;
}

/// A (possibly sub-normalized) n-qubit density matrix.
///
/// Construction checks Hermiticity (1e-10) and the trace; positivity is
/// checked on demand by spectrum() since it costs an eigendecomposition.
class DensityMatrix {
  public:
    DensityMatrix() = default;

    DensityMatrix(int n_qubits, ComplexMatrix mat, bool normalized = true)
        : n_qubits_(n_qubits), mat_(std::move(mat)), normalized_(normalized) {
        const auto d = static_cast<Eigen::Index>(dim_of(n_qubits_));
        if (mat_.rows() != d || mat_.cols() != d) {
            throw DimMismatch("DensityMatrix: expected " + std::to_string(d) + "x" +
                              std::to_string(d));
        }
        if (!mat_.allFinite() || hermiticity_defect(mat_) > 1e-10) {
            throw NonHermitianInput("DensityMatrix: not Hermitian to 1e-10");
        }
        const double tr = real_trace(mat_);
        if (normalized_ && std::abs(tr - 1.0) > 1e-10) {
            throw InvalidArgument("DensityMatrix: trace " + std::to_string(tr) + " != 1");
        }
        // A projection can annihilate a state entirely, so zero trace is allowed.
        if (!normalized_ && (tr < -1e-12 || tr > 1.0 + 1e-10)) {
            throw InvalidArgument("DensityMatrix: sub-normalized trace " + std::to_string(tr) +
                                  " outside [0, 1]");
        }
    }

    int n_qubits() const { return n_qubits_; }
    Eigen::Index dim() const { return mat_.rows(); }
    const ComplexMatrix &mat() const { return mat_; }
    bool normalized() const { return normalized_; }
    double trace() const { return real_trace(mat_); }

  private:
    int n_qubits_ = 0;
    ComplexMatrix mat_;
    bool normalized_ = true;
};

/// Descending, clamped spectrum with matching eigenvectors.
struct SpectralDecomposition {
    RealVector eigenvalues;
    ComplexMatrix eigenvectors;
    int rank = 0;

    /// Sum of the eigenvalues past the first m (exact tail, not 1 - head).
    double tail_weight(int m) const {
        return eigenvalues.tail(eigenvalues.size() - m).sum();
    }
};

inline SpectralDecomposition spectrum(const ComplexMatrix &rho) {
    const HermitianEig eig = eig_hermitian(rho);
    SpectralDecomposition out;
    out.eigenvalues = clamp_psd_spectrum(eig.values, "spectrum");
    out.eigenvectors = eig.vectors;
    out.rank = static_cast<int>((out.eigenvalues.array() > kRankTol).count());
    return out;
}

inline SpectralDecomposition spectrum(const DensityMatrix &rho) { return spectrum(rho.mat()); }

/// Tr[rho^2].
inline double purity(const DensityMatrix &rho) { return rho.mat().squaredNorm(); }

inline DensityMatrix maximally_mixed(int n) {
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    return {n, ComplexMatrix::Identity(d, d) / static_cast<double>(d)};
}

inline DensityMatrix pure_state(int n, const ComplexVector &psi) {
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    if (psi.size() != d) {
        throw DimMismatch("pure_state: vector length mismatch");
    }
    const ComplexVector v = psi / psi.norm();
    return {n, v * v.adjoint()};
}

inline DensityMatrix basis_state(int n, std::uint64_t index) {
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    ComplexVector v = ComplexVector::Zero(d);
    v[static_cast<Eigen::Index>(index)] = 1.0;
    return pure_state(n, v);
}

/// (|0...0> + e^{i phase}|1...1>)/sqrt(2).
inline DensityMatrix ghz(int n, double phase = 0.0) {
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    ComplexVector v = ComplexVector::Zero(d);
    v[0] = 1.0 / std::sqrt(2.0);
    v[d - 1] = std::polar(1.0 / std::sqrt(2.0), phase);
    return pure_state(n, v);
}

/// Haar-random unitary: QR of a Ginibre matrix with phase-fixed R diagonal.
inline ComplexMatrix haar_unitary(Eigen::Index d, Rng &rng) {
    std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(2.0));
    ComplexMatrix z(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            z(i, j) = Complex(re, im);
        }
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(z);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix &r = qr.matrixQR();
    for (Eigen::Index k = 0; k < d; ++k) {
        const Complex rkk = r(k, k);
        const double mag = std::abs(rkk);
        if (mag > 0.0) {
            q.col(k) *= rkk / mag;
        }
    }
    return q;
}

/// Symmetric Dirichlet(1) sample of length k, sorted descending.
inline std::vector<double> dirichlet_spectrum(std::size_t k, Rng &rng) {
    std::exponential_distribution<double> expo(1.0);
    std::vector<double> p(k);
    double total = 0.0;
    for (auto &x : p) {
        x = expo(rng);
        total += x;
    }
    for (auto &x : p) {
        x /= total;
    }
    std::sort(p.begin(), p.end(), std::greater<>());
    return p;
}

inline double spectrum_purity(std::span<const double> p) {
    double s = 0.0;
    for (double x : p) {
        s += x * x;
    }
    return s;
}

/// Descending spectrum of length d with sum 1 and sum of squares == target.
///
/// A Dirichlet draw is interpolated linearly towards (1, 0, ..., 0) or
/// towards the uniform spectrum; the weight is found by bisection.
inline std::vector<double> spectrum_with_purity(std::size_t d, double target, Rng &rng) {
    const double lo = 1.0 / static_cast<double>(d);
    if (!(target >= lo - 1e-12 && target <= 1.0 + 1e-12)) {
        throw PurityOutOfRange("target purity " + std::to_string(target) + " outside [1/d, 1]");
    }
    std::vector<double> base = dirichlet_spectrum(d, rng);
    std::vector<double> anchor(d, 0.0);
    if (target >= spectrum_purity(base)) {
        anchor[0] = 1.0;
    } else {
        std::fill(anchor.begin(), anchor.end(), lo);
    }
    std::vector<double> mix(d);
    auto blend = [&](double w) {
        for (std::size_t i = 0; i < d; ++i) {
            mix[i] = (1.0 - w) * base[i] + w * anchor[i];
        }
        return spectrum_purity(mix);
    };
    // purity(w) is monotone on [0, 1] in both directions.
    const bool increasing = anchor[0] == 1.0;
    double a = 0.0;
    double b = 1.0;
    if (std::abs(blend(1.0) - target) <= 1e-14) {
        a = b = 1.0;
    }
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double w = 0.5 * (a + b);
        const double val = blend(w);
        if ((val < target) == increasing) {
            a = w;
        } else {
            b = w;
        }
        if (std::abs(val - target) <= 1e-14) {
            a = b = w;
        }
    }
    blend(0.5 * (a + b));
    return mix;
}

inline DensityMatrix state_from_spectrum(int n, std::span<const double> values,
                                         const ComplexMatrix &basis) {
    RealVector lam(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        lam[static_cast<Eigen::Index>(i)] = values[i];
    }
    ComplexMatrix rho = reconstruct(lam, basis);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return {n, rho};
}

/// Random n-qubit state with exactly the requested purity and a
/// Haar-random eigenbasis. Deterministic for a fixed seed.
inline DensityMatrix random_state_with_purity(int n, double target_purity, std::uint64_t seed) {
    const std::size_t d = dim_of(n);
    Rng rng(seed);
    const std::vector<double> lam = spectrum_with_purity(d, target_purity, rng);
    const ComplexMatrix u = haar_unitary(static_cast<Eigen::Index>(d), rng);
    return state_from_spectrum(n, lam, u);
}

/// Random state of exact rank r: Dirichlet spectrum on r levels, Haar basis.
inline DensityMatrix random_state_with_rank(int n, int rank, std::uint64_t seed) {
    const std::size_t d = dim_of(n);
    if (rank < 1 || static_cast<std::size_t>(rank) > d) {
        throw InvalidArgument("random_state_with_rank: rank out of range");
    }
    Rng rng(seed);
    std::vector<double> lam = dirichlet_spectrum(static_cast<std::size_t>(rank), rng);
    lam.resize(d, 0.0);
    const ComplexMatrix u = haar_unitary(static_cast<Eigen::Index>(d), rng);
    return state_from_spectrum(n, lam, u);
}

inline void validate_probability_spectrum(std::span<const double> spectrum, std::size_t d) {
    if (spectrum.size() != d) {
        throw SpectrumInvalid("expected " + std::to_string(d) + " eigenvalues");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        if (!std::isfinite(spectrum[k]) || spectrum[k] < -1e-12) {
            throw SpectrumInvalid("negative or non-finite eigenvalue");
        }
        if (k > 0 && spectrum[k] > spectrum[k - 1] + 1e-12) {
            throw SpectrumInvalid("spectrum must be descending");
        }
        total += spectrum[k];
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw SpectrumInvalid("spectrum sums to " + std::to_string(total));
    }
}

/// State of the given spectrum that maximizes the QFI for generator g.
///
/// With g's eigenvectors |g_k> in descending eigenvalue order, lambda_k goes
/// to (|g_k> + |g_{d-k+1}>)/sqrt(2), lambda_{d-k+1} to the orthogonal
/// partner (|g_k> - |g_{d-k+1}>)/sqrt(2), and a middle index keeps |g_k>.
inline DensityMatrix optimal_mixed_probe(std::span<const double> spectrum_values,
                                         const ComplexMatrix &g) {
    require_hermitian(g, "optimal_mixed_probe");
    const auto d = static_cast<std::size_t>(g.rows());
    validate_probability_spectrum(spectrum_values, d);
    int n = 0;
    while ((std::size_t{1} << n) < d) {
        ++n;
    }
    if ((std::size_t{1} << n) != d) {
        throw DimMismatch("optimal_mixed_probe: generator dimension is not a power of two");
    }
    const HermitianEig eig = eig_hermitian(g);
    ComplexMatrix basis(g.rows(), g.cols());
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < d; ++k) {
        const std::size_t partner = d - 1 - k;
        const auto kk = static_cast<Eigen::Index>(k);
        const auto pp = static_cast<Eigen::Index>(partner);
        if (k < partner) {
            basis.col(kk) = s * (eig.vectors.col(kk) + eig.vectors.col(pp));
        } else if (k > partner) {
            basis.col(kk) = s * (eig.vectors.col(pp) - eig.vectors.col(kk));
        } else {
            basis.col(kk) = eig.vectors.col(kk);
        }
    }
    std::vector<double> lam(spectrum_values.begin(), spectrum_values.end());
    for (double &x : lam) {
        x = std::max(x, 0.0);
    }
    return state_from_spectrum(n, lam, basis);
}

} // namespace vqfie
