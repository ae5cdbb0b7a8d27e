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
 * @file numerics.hpp
 * Dense complex-matrix kernels: Hermitian eigendecomposition, PSD square
 * roots, the fidelity trace norm and unitary exponentials.
 *
 * Dimensions up to 2^13 are representable; anything that needs an O(d^3)
 * eigendecomposition is practical only up to roughly ten qubits.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace vqfie {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr std::size_t kMaxDim = std::size_t{1} << 13;

/// Eigenvalues closer than this are treated as one degenerate cluster.
inline constexpr double kDegeneracyGap = 1e-10;
/// Below this a negative eigenvalue is reported as a genuine error.
inline constexpr double kNegativeSpectrumTol = 1e-8;

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
struct HermitianEig {
    RealVector values;
    ComplexMatrix vectors; ///< column k belongs to values[k]
};

inline double max_abs(const ComplexMatrix &a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const ComplexMatrix &a) {
    return max_abs(a - a.adjoint());
}

inline bool is_hermitian(const ComplexMatrix &a, double rel_tol = 1e-12) {
    if (a.rows() != a.cols()) {
        return false;
    }
    const double scale = max_abs(a);
    return hermiticity_defect(a) <= rel_tol * std::max(scale, 1e-300);
}

inline void require_square(const ComplexMatrix &a, const char *who) {
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw DimMismatch(std::string(who) + ": matrix must be square and non-empty");
    }
    if (static_cast<std::size_t>(a.rows()) > kMaxDim) {
        throw DimMismatch(std::string(who) + ": dimension exceeds 2^13");
    }
}

inline void require_hermitian(const ComplexMatrix &a, const char *who) {
    require_square(a, who);
    if (!a.allFinite()) {
        throw NonHermitianInput(std::string(who) + ": non-finite entries");
    }
    if (!is_hermitian(a)) {
        throw NonHermitianInput(std::string(who) + ": max|A - A^dag| = " +
                                std::to_string(hermiticity_defect(a)));
    }
}

namespace detail {

// First component with |v_i| > 1e-10.
inline Eigen::Index leading_index(const ComplexVector &v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > 1e-10) {
            return i;
        }
    }
    return v.size();
}

// Lexicographic order on sign-fixed vectors: earlier leading component
// first, then larger magnitudes first.
inline bool lex_less(const ComplexVector &a, const ComplexVector &b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double x = std::abs(a[i]);
        const double y = std::abs(b[i]);
        if (std::abs(x - y) > 1e-10) {
            return x > y;
        }
    }
    return false;
}

/// Round-off floor for eigenvalues of a d x d matrix with spectral scale s.
inline double noise_floor(Eigen::Index dim, double scale) {
    const double eps = std::numeric_limits<double>::epsilon();
    return std::max(1e-13, 16.0 * static_cast<double>(dim) * eps) * scale;
}

} // namespace detail

/// Hermitian eigendecomposition with descending eigenvalues.
///
/// Each eigenvector is phase-fixed so its first non-negligible component is
/// real and positive. Inside a degenerate cluster the vectors are ordered
/// lexicographically, which makes the output reproducible.
inline HermitianEig eig_hermitian(const ComplexMatrix &a) {
    require_hermitian(a, "eig_hermitian");
    const ComplexMatrix sym = 0.5 * (a + a.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw NumericalInconsistency("eig_hermitian: eigensolver did not converge");
    }
    const Eigen::Index d = a.rows();
    HermitianEig out;
    out.values.resize(d);
    out.vectors.resize(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        out.values[k] = solver.eigenvalues()[d - 1 - k];
        ComplexVector v = solver.eigenvectors().col(d - 1 - k);
        const Eigen::Index lead = detail::leading_index(v);
        if (lead < d) {
            v *= std::conj(v[lead]) / std::abs(v[lead]);
        }
        out.vectors.col(k) = v;
    }
    // Order vectors inside each degenerate cluster.
    Eigen::Index start = 0;
    while (start < d) {
        Eigen::Index stop = start + 1;
        while (stop < d && out.values[stop - 1] - out.values[stop] < kDegeneracyGap) {
            ++stop;
        }
        if (stop - start > 1) {
            std::vector<Eigen::Index> order(static_cast<std::size_t>(stop - start));
            std::iota(order.begin(), order.end(), start);
            std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
                return detail::lex_less(out.vectors.col(i), out.vectors.col(j));
            });
            const ComplexMatrix block = out.vectors.middleCols(start, stop - start);
            for (std::size_t k = 0; k < order.size(); ++k) {
                out.vectors.col(start + static_cast<Eigen::Index>(k)) = block.col(order[k] - start);
            }
        }
        start = stop;
    }
    return out;
}

/// Clamp round-off negatives and sub-noise positives of a PSD spectrum to
/// zero. Anything below -1e-8 is a genuinely negative eigenvalue.
inline RealVector clamp_psd_spectrum(const RealVector &values, const char *who) {
    RealVector out = values;
    const double scale = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
    const double floor = detail::noise_floor(values.size(), scale);
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        if (out[k] < -kNegativeSpectrumTol) {
            throw NegativeSpectrum(std::string(who) + ": eigenvalue " + std::to_string(out[k]));
        }
        if (out[k] < floor) {
            out[k] = 0.0;
        }
    }
    return out;
}

inline ComplexMatrix reconstruct(const RealVector &values, const ComplexMatrix &vectors) {
    return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
}

/// Principal square root of a Hermitian PSD matrix.
inline ComplexMatrix sqrt_psd(const ComplexMatrix &a) {
    const HermitianEig eig = eig_hermitian(a);
    const RealVector roots = clamp_psd_spectrum(eig.values, "sqrt_psd").cwiseSqrt();
    return reconstruct(roots, eig.vectors);
}

/// Sum of singular values.
inline double nuclear_norm(const ComplexMatrix &a) {
    if (a.size() == 0) {
        return 0.0;
    }
    Eigen::BDCSVD<ComplexMatrix> svd(a);
    return svd.singularValues().sum();
}

/// ||sqrt(rho) sqrt(sigma)||_1 = Tr sqrt(sqrt(rho) sigma sqrt(rho)).
///
/// Evaluated as the nuclear norm of sqrt(rho) sqrt(sigma): singular values
/// keep absolute accuracy near rank deficiency, whereas square roots of the
/// eigenvalues of sqrt(rho) sigma sqrt(rho) amplify round-off to ~1e-8.
inline double trace_norm_product(const ComplexMatrix &rho, const ComplexMatrix &sigma) {
    require_hermitian(rho, "trace_norm_product");
    require_hermitian(sigma, "trace_norm_product");
    if (rho.rows() != sigma.rows()) {
        throw DimMismatch("trace_norm_product: dimensions differ");
    }
    return nuclear_norm(sqrt_psd(rho) * sqrt_psd(sigma));
}

/// exp(-i t G) for Hermitian G.
inline ComplexMatrix exp_i_hermitian(const ComplexMatrix &g, double t) {
    const HermitianEig eig = eig_hermitian(g);
    const Eigen::Index d = g.rows();
    ComplexVector phases(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        phases[k] = std::polar(1.0, -t * eig.values[k]);
    }
    return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

inline double real_trace(const ComplexMatrix &a) { return a.trace().real(); }

/// Tr[A B] without forming the product.
inline Complex trace_product(const ComplexMatrix &a, const ComplexMatrix &b) {
    return (a.transpose().cwiseProduct(b)).sum();
}

} // namespace vqfie
