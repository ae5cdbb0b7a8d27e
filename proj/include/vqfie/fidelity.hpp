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
 * @file fidelity.hpp
 * Fidelity-type quantities between an exact state rho_theta and an error
 * state rho_{theta+delta}:
 *
 *  - the Uhlmann fidelity F;
 *  - truncated and truncated-generalized fidelities on the top-m eigenspace
 *    of the exact state, through the full-dimension projections or through
 *    the m x m T-matrix;
 *  - sub- and super-fidelities E and R, with sqrt(E) <= F <= sqrt(R);
 *  - shot-sampled swap-test estimators for the trace functionals.
 *
 * The error state is never diagonalized; only the exact state's eigenbasis
 * defines the truncation.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "states.hpp"

namespace vqfie {

inline void require_same_dim(const DensityMatrix &a, const DensityMatrix &b, const char *who) {
    if (a.dim() != b.dim()) {
        throw DimMismatch(std::string(who) + ": states have different dimensions");
    }
}

/// Uhlmann fidelity ||sqrt(rho) sqrt(sigma)||_1 of two normalized states.
inline double fidelity(const DensityMatrix &rho, const DensityMatrix &sigma) {
    require_same_dim(rho, sigma, "fidelity");
    return std::clamp(trace_norm_product(rho.mat(), sigma.mat()), 0.0, 1.0);
}

/// Projections of the exact and error states onto the exact state's top-m
/// eigenspace.
struct TruncationResult {
    int m = 0;
    DensityMatrix truncated_exact; ///< Pi rho_theta Pi
    DensityMatrix truncated_error; ///< Pi rho_{theta+delta} Pi
    std::vector<double> kept_eigenvalues;
    ComplexMatrix projector_basis; ///< d x m, columns |lambda_1> ... |lambda_m>
    double exact_deficit = 0.0;    ///< 1 - Tr(truncated_exact), summed from the tail
    double error_deficit = 0.0;    ///< 1 - Tr(truncated_error)
};

inline TruncationResult truncate(const DensityMatrix &rho_exact, const SpectralDecomposition &spec,
                                 const DensityMatrix &rho_error, int m) {
    require_same_dim(rho_exact, rho_error, "truncate");
    const Eigen::Index d = rho_exact.dim();
    if (m < 1 || m > d) {
        throw MOutOfRange("m = " + std::to_string(m) + " outside [1, " + std::to_string(d) + "]");
    }
    TruncationResult t;
    t.m = m;
    t.projector_basis = spec.eigenvectors.leftCols(m);
    t.kept_eigenvalues.assign(spec.eigenvalues.data(), spec.eigenvalues.data() + m);
    const RealVector lam = spec.eigenvalues.head(m);
    ComplexMatrix sig = t.projector_basis * lam.cast<Complex>().asDiagonal() *
                        t.projector_basis.adjoint();
    const ComplexMatrix proj = t.projector_basis * t.projector_basis.adjoint();
    ComplexMatrix tau = proj * rho_error.mat() * proj;
    sig = 0.5 * (sig + sig.adjoint()).eval();
    tau = 0.5 * (tau + tau.adjoint()).eval();
    t.exact_deficit = std::max(0.0, spec.tail_weight(m));
    t.error_deficit = std::max(0.0, 1.0 - real_trace(tau));
    const int n = rho_exact.n_qubits();
    t.truncated_exact = DensityMatrix(n, std::move(sig), /*normalized=*/false);
    t.truncated_error = DensityMatrix(n, std::move(tau), /*normalized=*/false);
    return t;
}

/// Top-m truncation; the projector comes from rho_exact's eigenvectors.
inline TruncationResult truncate(const DensityMatrix &rho_exact, const DensityMatrix &rho_error,
                                 int m) {
    return truncate(rho_exact, spectrum(rho_exact), rho_error, m);
}

/// ||sqrt(sigma) sqrt(tau)||_1 on the truncated states; never exceeds F.
inline double truncated_fidelity(const TruncationResult &t) {
    return trace_norm_product(t.truncated_exact.mat(), t.truncated_error.mat());
}

/// Truncated fidelity plus sqrt((1 - Tr sigma)(1 - Tr tau)); never below F.
inline double generalized_fidelity(const TruncationResult &t) {
    return truncated_fidelity(t) + std::sqrt(t.exact_deficit * t.error_deficit);
}

/// T_ij = sqrt(l_i l_j) <l_i| rho_err |l_j> for estimated eigenpairs.
struct TMatrix {
    ComplexMatrix t;
    ComplexMatrix overlaps; ///< <l_i| rho_err |l_j>
    std::vector<double> kept;
    std::vector<double> diag_overlaps;
    double exact_deficit = 0.0; ///< 1 - sum(kept)
    double error_deficit = 0.0; ///< 1 - sum(diag_overlaps)
};

/// Builds T from eigenvalue estimates and the corresponding vectors.
///
/// exact_deficit overrides 1 - sum(kept) when the caller knows the tail
/// weight more precisely (e.g. from an exact spectrum).
inline TMatrix build_tmatrix(std::span<const double> kept, const ComplexMatrix &vectors,
                             const DensityMatrix &rho_error, double exact_deficit = -1.0) {
    const auto m = static_cast<Eigen::Index>(kept.size());
    if (m < 1 || vectors.cols() != m || vectors.rows() != rho_error.dim()) {
        throw DimMismatch("build_tmatrix: need one d-vector per kept eigenvalue");
    }
    TMatrix tm;
    tm.kept.assign(kept.begin(), kept.end());
    tm.overlaps = vectors.adjoint() * rho_error.mat() * vectors;
    tm.overlaps = 0.5 * (tm.overlaps + tm.overlaps.adjoint()).eval();
    tm.t.resize(m, m);
    double kept_sum = 0.0;
    double diag_sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double li = std::max(kept[static_cast<std::size_t>(i)], 0.0);
        kept_sum += li;
        diag_sum += tm.overlaps(i, i).real();
        tm.diag_overlaps.push_back(tm.overlaps(i, i).real());
        for (Eigen::Index j = 0; j < m; ++j) {
            const double lj = std::max(kept[static_cast<std::size_t>(j)], 0.0);
            tm.t(i, j) = std::sqrt(li * lj) * tm.overlaps(i, j);
        }
    }
    tm.exact_deficit = exact_deficit >= 0.0 ? exact_deficit : std::max(0.0, 1.0 - kept_sum);
    tm.error_deficit = std::max(0.0, 1.0 - diag_sum);
    return tm;
}

/// T-matrix built from the exact spectrum of rho_exact.
inline TMatrix build_tmatrix(const SpectralDecomposition &spec, const DensityMatrix &rho_error,
                             int m) {
    if (m < 1 || m > spec.eigenvalues.size()) {
        throw MOutOfRange("m = " + std::to_string(m) + " outside [1, d]");
    }
    const std::span<const double> kept(spec.eigenvalues.data(), static_cast<std::size_t>(m));
    return build_tmatrix(kept, spec.eigenvectors.leftCols(m), rho_error, spec.tail_weight(m));
}

struct FidelityBounds {
    double lower = 0.0; ///< truncated fidelity Tr sqrt(T)
    double upper = 0.0; ///< truncated generalized fidelity
};

/// Tr sqrt(T) and Tr sqrt(T) + sqrt(exact_deficit * error_deficit).
///
/// Tr sqrt(T) is the nuclear norm of diag(sqrt(l)) sqrt(B), B the overlap
/// matrix, since T = X X^dag for that X.
inline FidelityBounds tmatrix_fidelity(const TMatrix &tm) {
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> check(tm.t, Eigen::EigenvaluesOnly);
    if (check.eigenvalues().minCoeff() < -kNegativeSpectrumTol) {
        throw NonPSDTMatrix("T-matrix eigenvalue " + std::to_string(check.eigenvalues().minCoeff()));
    }
    ComplexMatrix root;
    try {
        root = sqrt_psd(tm.overlaps);
    } catch (const NegativeSpectrum &e) {
        throw NonPSDTMatrix(e.what());
    }
    RealVector scale(static_cast<Eigen::Index>(tm.kept.size()));
    for (std::size_t i = 0; i < tm.kept.size(); ++i) {
        scale[static_cast<Eigen::Index>(i)] = std::sqrt(std::max(tm.kept[i], 0.0));
    }
    FidelityBounds out;
    out.lower = nuclear_norm(scale.cast<Complex>().asDiagonal() * root);
    out.upper = out.lower + std::sqrt(tm.exact_deficit * tm.error_deficit);
    return out;
}

/// Trace functionals behind the sub- and super-fidelity.
struct TraceFunctionals {
    double overlap = 0.0;     ///< Tr[rho sigma]
    double quartic = 0.0;     ///< Tr[rho sigma rho sigma]
    double purity_rho = 0.0;  ///< Tr[rho^2]
    double purity_sigma = 0.0;
    /// (Tr[rho sigma])^2 - Tr[rho sigma rho sigma], from the spectrum of
    /// sqrt(rho) sigma sqrt(rho) when available (no cancellation).
    double sub_radicand = 0.0;
    double mixedness_rho = 0.0; ///< 1 - Tr[rho^2]
    double mixedness_sigma = 0.0;
};

namespace detail {

// 2 e_2(a) = (sum a)^2 - sum a^2, accumulated without cancellation.
inline double twice_e2(const RealVector &a) {
    double prefix = 0.0;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        acc += a[i] * prefix;
        prefix += a[i];
    }
    return 2.0 * acc;
}

} // namespace detail

/// Exact trace functionals computed from spectra.
inline TraceFunctionals trace_functionals(const DensityMatrix &rho, const DensityMatrix &sigma) {
    require_same_dim(rho, sigma, "trace_functionals");
    const SpectralDecomposition sr = spectrum(rho);
    const SpectralDecomposition ss = spectrum(sigma);
    const ComplexMatrix root = reconstruct(sr.eigenvalues.cwiseSqrt(), sr.eigenvectors);
    ComplexMatrix a = root * sigma.mat() * root;
    a = 0.5 * (a + a.adjoint()).eval();
    const RealVector av = clamp_psd_spectrum(eig_hermitian(a).values, "trace_functionals");
    TraceFunctionals f;
    f.overlap = trace_product(rho.mat(), sigma.mat()).real();
    f.quartic = av.squaredNorm();
    f.purity_rho = sr.eigenvalues.squaredNorm();
    f.purity_sigma = ss.eigenvalues.squaredNorm();
    f.sub_radicand = detail::twice_e2(av);
    f.mixedness_rho = detail::twice_e2(sr.eigenvalues);
    f.mixedness_sigma = detail::twice_e2(ss.eigenvalues);
    return f;
}

/// Functionals from raw trace values (e.g. swap-test estimates).
inline TraceFunctionals trace_functionals_from_values(double overlap, double quartic,
                                                      double purity_rho, double purity_sigma) {
    TraceFunctionals f;
    f.overlap = overlap;
    f.quartic = quartic;
    f.purity_rho = purity_rho;
    f.purity_sigma = purity_sigma;
    f.sub_radicand = overlap * overlap - quartic;
    f.mixedness_rho = 1.0 - purity_rho;
    f.mixedness_sigma = 1.0 - purity_sigma;
    return f;
}

/// Sub-fidelity E = Tr[rs] + sqrt(2((Tr[rs])^2 - Tr[rsrs])).
inline double sub_fidelity(const TraceFunctionals &f) {
    double rad = f.sub_radicand;
    if (rad < -1e-10) {
        throw NumericalInconsistency("sub-fidelity radicand " + std::to_string(rad));
    }
    rad = std::max(rad, 0.0);
    return f.overlap + std::sqrt(2.0 * rad);
}

/// Super-fidelity R = Tr[rs] + sqrt((1 - Tr r^2)(1 - Tr s^2)).
inline double super_fidelity(const TraceFunctionals &f) {
    const double a = std::max(f.mixedness_rho, 0.0);
    const double b = std::max(f.mixedness_sigma, 0.0);
    return f.overlap + std::sqrt(a * b);
}

inline double sub_fidelity(const DensityMatrix &rho, const DensityMatrix &sigma) {
    return sub_fidelity(trace_functionals(rho, sigma));
}

inline double super_fidelity(const DensityMatrix &rho, const DensityMatrix &sigma) {
    return super_fidelity(trace_functionals(rho, sigma));
}

enum class SwapKind { pair, purity, quartic };

inline const char *to_string(SwapKind k) {
    switch (k) {
    case SwapKind::pair:
        return "pair";
    case SwapKind::purity:
        return "purity";
    case SwapKind::quartic:
        return "quartic";
    }
    return "?";
}

/// The trace functional a swap test of the given kind measures.
inline double swap_functional(SwapKind kind, const DensityMatrix &rho, const DensityMatrix &sigma) {
    require_same_dim(rho, sigma, "swap_functional");
    switch (kind) {
    case SwapKind::pair:
        return trace_product(rho.mat(), sigma.mat()).real();
    case SwapKind::purity:
        return rho.mat().squaredNorm();
    case SwapKind::quartic: {
        const ComplexMatrix rs = rho.mat() * sigma.mat();
        return trace_product(rs, rs).real();
    }
    }
    return 0.0;
}

struct SwapEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Samples the ancilla outcome of a generalized swap test.
///
/// p(0) = 1/2 + f/2; the estimate is 2 * freq(0) - 1 and the standard error
/// is the binomial error of freq(0) scaled by 2.
inline SwapEstimate swap_test_estimate(SwapKind kind, const DensityMatrix &rho,
                                       const DensityMatrix &sigma, std::int64_t shots,
                                       std::uint64_t seed) {
    if (shots < 1) {
        throw InvalidArgument("swap_test_estimate: shots must be >= 1");
    }
    const double f = swap_functional(kind, rho, sigma);
    const double p0 = std::clamp(0.5 + 0.5 * f, 0.0, 1.0);
    Rng rng(seed);
    std::binomial_distribution<std::int64_t> draw(shots, p0);
    const double freq = static_cast<double>(draw(rng)) / static_cast<double>(shots);
    SwapEstimate out;
    out.estimate = 2.0 * freq - 1.0;
    out.std_error = 2.0 * std::sqrt(freq * (1.0 - freq) / static_cast<double>(shots));
    return out;
}

/// Ancilla p(0) of the generalized swap test, simulated gate by gate.
///
/// The register is |0><0| (x) rho (x) sigma [(x) rho (x) sigma]; the circuit
/// is H, controlled cyclic shift of the copies, H. Only meant for n <= 2,
/// where it cross-checks p(0) = 1/2 + f/2.
inline double swap_test_circuit_probability(SwapKind kind, const DensityMatrix &rho,
                                            const DensityMatrix &sigma) {
    require_same_dim(rho, sigma, "swap_test_circuit_probability");
    std::vector<const ComplexMatrix *> copies;
    switch (kind) {
    case SwapKind::pair:
        copies = {&rho.mat(), &sigma.mat()};
        break;
    case SwapKind::purity:
        copies = {&rho.mat(), &rho.mat()};
        break;
    case SwapKind::quartic:
        copies = {&rho.mat(), &sigma.mat(), &rho.mat(), &sigma.mat()};
        break;
    }
    const int n = rho.n_qubits();
    const auto k = static_cast<int>(copies.size());
    if (n * k + 1 > 11) {
        throw InvalidArgument("swap_test_circuit_probability: register too large");
    }
    ComplexMatrix reg = ComplexMatrix::Zero(2, 2);
    reg(0, 0) = 1.0;
    for (const ComplexMatrix *c : copies) {
        ComplexMatrix next(reg.rows() * c->rows(), reg.cols() * c->cols());
        for (Eigen::Index i = 0; i < reg.rows(); ++i) {
            for (Eigen::Index j = 0; j < reg.cols(); ++j) {
                next.block(i * c->rows(), j * c->cols(), c->rows(), c->cols()) = reg(i, j) * *c;
            }
        }
        reg = std::move(next);
    }
    const Eigen::Index block = Eigen::Index{1} << n;
    const Eigen::Index sys = Eigen::Index{1} << (n * k);
    // S|p_1, ..., p_k> = |p_k, p_1, ..., p_{k-1}> on the k copies.
    auto shift = [&](Eigen::Index idx) {
        const Eigen::Index anc = idx / sys;
        if (anc == 0) {
            return idx;
        }
        Eigen::Index rest = idx % sys;
        std::vector<Eigen::Index> parts(static_cast<std::size_t>(k));
        for (int c = k - 1; c >= 0; --c) {
            parts[static_cast<std::size_t>(c)] = rest % block;
            rest /= block;
        }
        Eigen::Index out = 0;
        for (int c = 0; c < k; ++c) {
            const int src = (c + k - 1) % k;
            out = out * block + parts[static_cast<std::size_t>(src)];
        }
        return anc * sys + out;
    };
    Eigen::Matrix2cd h;
    h << 1.0, 1.0, 1.0, -1.0;
    h /= std::sqrt(2.0);
    auto hadamard = [&](ComplexMatrix &m) {
        const Eigen::Index d = m.rows();
        const Eigen::Index half = d / 2;
        ComplexMatrix left(d, d);
        left.topRows(half) = h(0, 0) * m.topRows(half) + h(0, 1) * m.bottomRows(half);
        left.bottomRows(half) = h(1, 0) * m.topRows(half) + h(1, 1) * m.bottomRows(half);
        m.leftCols(half) = left.leftCols(half) * h(0, 0) + left.rightCols(half) * h(0, 1);
        m.rightCols(half) = left.leftCols(half) * h(1, 0) + left.rightCols(half) * h(1, 1);
    };
    hadamard(reg);
    {
        const Eigen::Index d = reg.rows();
        std::vector<Eigen::Index> image(static_cast<std::size_t>(d));
        for (Eigen::Index i = 0; i < d; ++i) {
            image[static_cast<std::size_t>(shift(i))] = i;
        }
        ComplexMatrix next(d, d);
        for (Eigen::Index j = 0; j < d; ++j) {
            for (Eigen::Index i = 0; i < d; ++i) {
                next(i, j) = reg(image[static_cast<std::size_t>(i)], image[static_cast<std::size_t>(j)]);
            }
        }
        reg = std::move(next);
    }
    hadamard(reg);
    return reg.diagonal().head(sys).real().sum();
}

} // namespace vqfie
