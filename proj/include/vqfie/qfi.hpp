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
 * @file qfi.hpp
 * Quantum Fisher information and its bounds.
 *
 * Every fidelity-type quantity f maps to a QFI-scale number through the
 * induced map 8 (1 - f) / delta^2. Fidelity lower bounds become QFI upper
 * bounds and vice versa:
 *
 *   TQFI:   I(F_gen)  <= I_delta <= I(F_trunc)
 *   SSQFI:  I(sqrt R) <= I_delta <= I(sqrt E)
 *   H_delta = max of the lower bounds, J_delta = min of the upper bounds.
 *
 * None of these need the generator. The exact QFI, the generator-aware
 * literature bounds and the purity-loss bound do.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "circuits.hpp"
#include "fidelity.hpp"

namespace vqfie {

/// 8 (1 - f) / delta^2, clamped at zero for round-off above f = 1.
inline double induced_bound(double f_value, double delta) {
    if (delta == 0.0) {
        throw ZeroDelta("induced_bound: delta must be nonzero");
    }
    if (!std::isfinite(f_value) || f_value > 1.0 + 1e-9) {
        throw NumericalInconsistency("fidelity-type value " + std::to_string(f_value) +
                                     " exceeds 1");
    }
    return std::max(0.0, 8.0 * (1.0 - f_value) / (delta * delta));
}

/// Generator matrix in the eigenbasis of a state.
inline ComplexMatrix generator_in_basis(const SpectralDecomposition &spec, const ComplexMatrix &g) {
    return spec.eigenvectors.adjoint() * g * spec.eigenvectors;
}

/// 2 sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<i|G|j>|^2, skipping pairs whose
/// weights sum to at most 1e-12.
inline double exact_qfi(const SpectralDecomposition &spec, const ComplexMatrix &g) {
    const ComplexMatrix gb = generator_in_basis(spec, g);
    const RealVector &lam = spec.eigenvalues;
    double total = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        for (Eigen::Index j = i + 1; j < lam.size(); ++j) {
            const double s = lam[i] + lam[j];
            if (s <= 1e-12) {
                continue;
            }
            const double diff = lam[i] - lam[j];
            total += 4.0 * diff * diff / s * std::norm(gb(i, j));
        }
    }
    return total;
}

inline double exact_qfi(const DensityMatrix &rho, const Generator &g) {
    if (g.matrix.rows() != rho.dim()) {
        throw DimMismatch("exact_qfi: generator dimension mismatch");
    }
    return exact_qfi(spectrum(rho), g.matrix);
}

struct QfiBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Full record of one (exact, error) state pair.
struct BoundsReport {
    double delta = 0.0;
    int m = 0;
    int rank = 0;
    double F = 0.0;
    double F_trunc = 0.0;
    double F_gen = 0.0;
    double sqrtE = 0.0;
    double sqrtR = 0.0;
    double I_delta = 0.0;
    double tqfi_lower = 0.0;
    double tqfi_upper = 0.0;
    double ssqfi_lower = 0.0;
    double ssqfi_upper = 0.0;
    double H_delta = 0.0;
    double J_delta = 0.0;
    std::optional<double> exact_qfi;

    /// H <= I <= J within tol, the three fidelity sandwiches included.
    bool sandwich_holds(double tol = 1e-8) const {
        return H_delta <= I_delta + tol && I_delta <= J_delta + tol &&
               tqfi_lower <= I_delta + tol && I_delta <= tqfi_upper + tol &&
               ssqfi_lower <= I_delta + tol && I_delta <= ssqfi_upper + tol;
    }
};

/// TQFI bounds from the exact spectrum of rho_theta via the T-matrix.
inline QfiBounds tqfi_bounds(const SpectralDecomposition &spec, const DensityMatrix &rho_error,
                             int m, double delta) {
    const FidelityBounds fb = tmatrix_fidelity(build_tmatrix(spec, rho_error, m));
    return {induced_bound(fb.upper, delta), induced_bound(fb.lower, delta)};
}

inline QfiBounds tqfi_bounds(const DensityMatrix &rho_theta, const DensityMatrix &rho_error, int m,
                             double delta) {
    require_same_dim(rho_theta, rho_error, "tqfi_bounds");
    return tqfi_bounds(spectrum(rho_theta), rho_error, m, delta);
}

/// TQFI bounds from externally supplied fidelity bounds (e.g. VQSE output).
inline QfiBounds tqfi_bounds(const FidelityBounds &fb, double delta) {
    return {induced_bound(fb.upper, delta), induced_bound(fb.lower, delta)};
}

inline QfiBounds ssqfi_bounds(const TraceFunctionals &f, double delta) {
    const double sqrt_e = std::sqrt(std::max(sub_fidelity(f), 0.0));
    const double sqrt_r = std::sqrt(std::max(super_fidelity(f), 0.0));
    return {induced_bound(std::min(sqrt_r, 1.0 + 1e-9), delta), induced_bound(sqrt_e, delta)};
}

inline QfiBounds ssqfi_bounds(const DensityMatrix &rho_theta, const DensityMatrix &rho_error,
                              double delta) {
    return ssqfi_bounds(trace_functionals(rho_theta, rho_error), delta);
}

/// (H_delta, J_delta): the tighter lower and upper bound of the two families.
inline QfiBounds dynamics_agnostic_bounds(const QfiBounds &tqfi, const QfiBounds &ssqfi) {
    return {std::max(tqfi.lower, ssqfi.lower), std::min(tqfi.upper, ssqfi.upper)};
}

/// Assemble a report from precomputed fidelity-type inputs.
inline BoundsReport make_report(double delta, int m, int rank, double exact_fidelity,
                                const FidelityBounds &tmatrix, const TraceFunctionals &tf) {
    BoundsReport r;
    r.delta = delta;
    r.m = m;
    r.rank = rank;
    r.F = exact_fidelity;
    r.F_trunc = tmatrix.lower;
    r.F_gen = tmatrix.upper;
    r.sqrtE = std::sqrt(std::max(sub_fidelity(tf), 0.0));
    r.sqrtR = std::sqrt(std::max(super_fidelity(tf), 0.0));
    r.I_delta = induced_bound(r.F, delta);
    const QfiBounds tq = tqfi_bounds(tmatrix, delta);
    const QfiBounds ss = ssqfi_bounds(tf, delta);
    r.tqfi_lower = tq.lower;
    r.tqfi_upper = tq.upper;
    r.ssqfi_lower = ss.lower;
    r.ssqfi_upper = ss.upper;
    const QfiBounds hj = dynamics_agnostic_bounds(tq, ss);
    r.H_delta = hj.lower;
    r.J_delta = hj.upper;
    return r;
}

/// Every bound for one state pair. exact_qfi is filled in when g is given.
inline BoundsReport compute_bounds(const DensityMatrix &rho_theta, const DensityMatrix &rho_error,
                                   int m, double delta, const Generator *g = nullptr) {
    require_same_dim(rho_theta, rho_error, "compute_bounds");
    const SpectralDecomposition spec = spectrum(rho_theta);
    BoundsReport r = make_report(delta, m, spec.rank, fidelity(rho_theta, rho_error),
                                 tmatrix_fidelity(build_tmatrix(spec, rho_error, m)),
                                 trace_functionals(rho_theta, rho_error));
    if (g != nullptr) {
        r.exact_qfi = exact_qfi(spec, g->matrix);
    }
    return r;
}

/// H_delta alone, skipping the exact fidelity. This is the variational cost.
inline double h_delta(const DensityMatrix &rho_theta, const DensityMatrix &rho_error, int m,
                      double delta) {
    const SpectralDecomposition spec = spectrum(rho_theta);
    const QfiBounds tq = tqfi_bounds(tmatrix_fidelity(build_tmatrix(spec, rho_error, m)), delta);
    const QfiBounds ss = ssqfi_bounds(trace_functionals(rho_theta, rho_error), delta);
    return std::max(tq.lower, ss.lower);
}

/// TQFI lower bound alone.
inline double tqfi_lower(const DensityMatrix &rho_theta, const DensityMatrix &rho_error, int m,
                         double delta) {
    return tqfi_bounds(rho_theta, rho_error, m, delta).lower;
}

/// delta -> 0 limit of the TQFI lower bound:
///
///   4 Tr[rho_m G^2] - sum_{i,j<=m} 8 l_i l_j / (l_i + l_j) |G_ij|^2
///     - 4 Tr[Pi_rest G rho_m G]
///
/// The last term is present only while the truncation discards weight
/// (m < rank). At m >= rank the bound equals the QFI and the term drops.
inline double tqfi_limit_analytic(const SpectralDecomposition &spec, const ComplexMatrix &g, int m) {
    const Eigen::Index d = spec.eigenvalues.size();
    if (m < 1 || m > d) {
        throw MOutOfRange("tqfi_limit_analytic: m outside [1, d]");
    }
    const ComplexMatrix gb = generator_in_basis(spec, g);
    const RealVector &lam = spec.eigenvalues;
    double first = 0.0;
    double middle = 0.0;
    double last = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double w = lam[i] * std::norm(gb(i, j));
            first += w;
            if (j >= m) {
                last += w;
            }
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            const double s = lam[i] + lam[j];
            if (s > 1e-12) {
                middle += lam[i] * lam[j] / s * std::norm(gb(i, j));
            }
        }
    }
    const bool discards_weight = m < spec.rank;
    return 4.0 * first - 8.0 * middle - (discards_weight ? 4.0 * last : 0.0);
}

inline double tqfi_limit_analytic(const DensityMatrix &rho_theta, const Generator &g, int m) {
    return tqfi_limit_analytic(spectrum(rho_theta), g.matrix, m);
}

/// Heisenberg limit 4 n^2 for sum_i Z_i.
inline double max_qfi_pure(int n) {
    if (n < 1) {
        throw InvalidArgument("max_qfi_pure: n must be >= 1");
    }
    return 4.0 * n * n;
}

/// Largest QFI over states with the given spectrum:
/// 1/2 sum_k l_{k,d-k+1} (g_k - g_{d-k+1})^2, l_{k,l} = (l_k-l_l)^2/(l_k+l_l).
inline double max_qfi_mixed(std::span<const double> spectrum_values, const ComplexMatrix &g) {
    require_hermitian(g, "max_qfi_mixed");
    const auto d = static_cast<std::size_t>(g.rows());
    validate_probability_spectrum(spectrum_values, d);
    const RealVector gv = eig_hermitian(g).values;
    double total = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const std::size_t l = d - 1 - k;
        const double s = spectrum_values[k] + spectrum_values[l];
        if (s <= 0.0) {
            continue;
        }
        const double diff = spectrum_values[k] - spectrum_values[l];
        const double gap = gv[static_cast<Eigen::Index>(k)] - gv[static_cast<Eigen::Index>(l)];
        total += 0.5 * diff * diff / s * gap * gap;
    }
    return total;
}

/// Generator-aware bounds: lower 4(Tr[r^2 G^2] - Tr[(rG)^2]) and upper
/// 4(Tr[r G^2] - Tr[r G]^2).
inline QfiBounds generator_aware_bounds(const DensityMatrix &rho, const Generator &g) {
    if (g.matrix.rows() != rho.dim()) {
        throw DimMismatch("generator_aware_bounds: generator dimension mismatch");
    }
    const ComplexMatrix &r = rho.mat();
    const ComplexMatrix &gm = g.matrix;
    const ComplexMatrix g2 = gm * gm;
    const ComplexMatrix rg = r * gm;
    const double lower = 4.0 * (trace_product(r * r, g2).real() - trace_product(rg, rg).real());
    const double mean = rg.trace().real();
    const double upper = 4.0 * (trace_product(r, g2).real() - mean * mean);
    return {lower, upper};
}

enum class StrataPlacement { median, jittered };

struct PurityLossReport {
    double L_exact = 0.0;      ///< 4(Tr[r^2 G^2] - Tr[r G r G])
    double delta_nu = 0.0;     ///< Tr[r^2] - Tr[r_ave^2]
    double variance_dx2 = 0.0; ///< (Delta x)^2
    int strata = 1;
    double L_stratified = 0.0; ///< 2 delta_nu / (Delta x)^2
    double rho_ave_purity = 0.0;
};

/// Angles of K equal-probability strata of N(theta, dx2).
///
/// median places each angle at its stratum's probability midpoint
/// (j - 1/2)/K; jittered draws a uniform point inside each stratum.
inline std::vector<double> stratified_angles(double theta, double dx2, int strata,
                                             StrataPlacement placement = StrataPlacement::median,
                                             std::uint64_t seed = 0) {
    if (!(dx2 > 0.0) || strata < 1) {
        throw InvalidArgument("stratified_angles: need dx2 > 0 and K >= 1");
    }
    const boost::math::normal_distribution<double> normal(theta, std::sqrt(dx2));
    Rng rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(strata));
    for (int j = 0; j < strata; ++j) {
        double u = 0.5;
        if (placement == StrataPlacement::jittered) {
            u = unit(rng);
            u = std::clamp(u, 1e-12, 1.0 - 1e-12);
        }
        const double p = (static_cast<double>(j) + u) / static_cast<double>(strata);
        out.push_back(boost::math::quantile(normal, p));
    }
    return out;
}

/// Purity-loss lower bound for the probe rho encoded at theta.
inline PurityLossReport purity_loss_bound(const DensityMatrix &rho, const Generator &g, double theta,
                                          double dx2, int strata,
                                          StrataPlacement placement = StrataPlacement::median,
                                          std::uint64_t seed = 0) {
    const std::vector<double> angles = stratified_angles(theta, dx2, strata, placement, seed);
    const DensityMatrix rho_theta = encode_phase(rho, g, theta);
    ComplexMatrix ave = ComplexMatrix::Zero(rho.dim(), rho.dim());
    for (double a : angles) {
        ave += encode_phase(rho, g, a).mat();
    }
    ave /= static_cast<double>(angles.size());
    PurityLossReport rep;
    rep.variance_dx2 = dx2;
    rep.strata = strata;
    rep.rho_ave_purity = ave.squaredNorm();
    rep.delta_nu = purity(rho_theta) - rep.rho_ave_purity;
    rep.L_stratified = 2.0 * rep.delta_nu / dx2;
    rep.L_exact = generator_aware_bounds(rho_theta, g).lower;
    return rep;
}

enum class LogBase { natural, two };

inline double log_in(double x, LogBase base) {
    return base == LogBase::natural ? std::log(x) : std::log2(x);
}

inline const char *to_string(LogBase base) { return base == LogBase::natural ? "e" : "2"; }

/// Quantum-computer calls for the TQFI lower bound per VQFIE iteration,
/// s (2 t n log n + n + (n + n^2)/2).
inline double tqfi_call_budget(int n, int t, double shots, LogBase base = LogBase::natural) {
    const double nn = n;
    return shots * (2.0 * t * nn * log_in(nn, base) + nn + (nn + nn * nn) / 2.0);
}

/// Calls for the purity-loss bound with K strata, s ((K^2 + K)/2 + 1).
inline double purity_call_budget(int strata, double shots) {
    const double k = strata;
    return shots * ((k * k + k) / 2.0 + 1.0);
}

/// Smallest K whose purity-loss budget matches the TQFI budget.
inline int strata_count(int n, int t, LogBase base = LogBase::natural) {
    if (n < 2 || t < 0) {
        throw InvalidArgument("strata_count: need n >= 2 and t >= 0");
    }
    const double rhs = tqfi_call_budget(n, t, 1.0, base);
    // Positive root of (K^2 + K)/2 + 1 = rhs, then fix up rounding.
    int k = std::max(1, static_cast<int>(std::ceil((-1.0 + std::sqrt(1.0 + 8.0 * (rhs - 1.0))) / 2.0)));
    while (k > 1 && purity_call_budget(k - 1, 1.0) >= rhs) {
        --k;
    }
    while (purity_call_budget(k, 1.0) < rhs) {
        ++k;
    }
    return k;
}

namespace csv {

inline std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace csv

inline const char *bounds_csv_header() {
    return "delta,m,rank,F,F_trunc,F_gen,sqrtE,sqrtR,I_delta,tqfi_lower,tqfi_upper,"
           "ssqfi_lower,ssqfi_upper,H_delta,J_delta,exact_qfi";
}

inline std::string to_csv_row(const BoundsReport &r) {
    std::ostringstream os;
    os << csv::num(r.delta) << ',' << r.m << ',' << r.rank << ',' << csv::num(r.F) << ','
       << csv::num(r.F_trunc) << ',' << csv::num(r.F_gen) << ',' << csv::num(r.sqrtE) << ','
       << csv::num(r.sqrtR) << ',' << csv::num(r.I_delta) << ',' << csv::num(r.tqfi_lower) << ','
       << csv::num(r.tqfi_upper) << ',' << csv::num(r.ssqfi_lower) << ','
       << csv::num(r.ssqfi_upper) << ',' << csv::num(r.H_delta) << ',' << csv::num(r.J_delta)
       << ',' << (r.exact_qfi ? csv::num(*r.exact_qfi) : std::string());
    return os.str();
}

inline const char *purity_loss_csv_header() {
    return "L_exact,delta_nu,variance_dx2,strata,L_stratified,rho_ave_purity";
}

inline std::string to_csv_row(const PurityLossReport &r) {
    std::ostringstream os;
    os << csv::num(r.L_exact) << ',' << csv::num(r.delta_nu) << ',' << csv::num(r.variance_dx2)
       << ',' << r.strata << ',' << csv::num(r.L_stratified) << ',' << csv::num(r.rho_ave_purity);
    return os.str();
}

} // namespace vqfie
