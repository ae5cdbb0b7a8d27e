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

#include "oracles.hpp"
#include "vqfie/qfi.hpp"

namespace {

using vqfie::ComplexMatrix;
using vqfie::DensityMatrix;

ComplexMatrix random_generator(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const ComplexMatrix a = oracle::random_density(1 << n, rng);
    return (a + a.adjoint()) * static_cast<double>(1 << n);
}

TEST(Qfi, InducedBound) {
    EXPECT_EQ(vqfie::induced_bound(1.0, 0.3), 0.0);
    EXPECT_DOUBLE_EQ(vqfie::induced_bound(0.0, 1.0), 8.0);
    EXPECT_NEAR(vqfie::induced_bound(0.995, 0.1), 4.0, 1e-12);
    EXPECT_EQ(vqfie::induced_bound(1.0 + 5e-10, 0.1), 0.0);
    EXPECT_THROW(vqfie::induced_bound(0.5, 0.0), vqfie::ZeroDelta);
    EXPECT_THROW(vqfie::induced_bound(1.1, 0.1), vqfie::NumericalInconsistency);
    EXPECT_GT(vqfie::induced_bound(0.5, 0.1), vqfie::induced_bound(0.6, 0.1));
}

TEST(Qfi, HeisenbergLimitOnGhz) {
    for (int n = 1; n <= 6; ++n) {
        const vqfie::Generator g = vqfie::collective_z(n);
        EXPECT_NEAR(vqfie::exact_qfi(vqfie::ghz(n), g), 4.0 * n * n, 1e-8);
        EXPECT_EQ(vqfie::max_qfi_pure(n), 4.0 * n * n);
    }
    EXPECT_THROW(vqfie::max_qfi_pure(0), vqfie::InvalidArgument);
}

TEST(Qfi, MaximallyMixedHasZeroQfi) {
    EXPECT_NEAR(vqfie::exact_qfi(vqfie::maximally_mixed(3), vqfie::collective_z(3)), 0.0, 1e-12);
}

TEST(Qfi, MatchesSldOracle) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        std::mt19937_64 rng(s);
        const ComplexMatrix rho = oracle::random_density(4, rng);
        const ComplexMatrix g = random_generator(2, 50 + s);
        const double want = oracle::sld_qfi(rho, g);
        EXPECT_NEAR(vqfie::exact_qfi(vqfie::spectrum(rho), g), want, 1e-8 * std::max(1.0, want));
    }
}

TEST(Qfi, InvariantUnderEncoding) {
    const vqfie::Generator g = vqfie::collective_z(3);
    const DensityMatrix rho = vqfie::random_state_with_purity(3, 0.7, 3);
    const double ref = vqfie::exact_qfi(rho, g);
    for (double theta : {0.3, 1.7, -2.2}) {
        EXPECT_NEAR(vqfie::exact_qfi(vqfie::encode_phase(rho, g, theta), g), ref, 1e-9);
    }
}

TEST(Qfi, FiniteDeltaConverges) {
    const vqfie::Generator g = vqfie::collective_z(3);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const DensityMatrix rho = vqfie::random_state_with_purity(3, 0.8, 10 + s);
        const double qfi = vqfie::exact_qfi(rho, g);
        double previous = INFINITY;
        for (double delta : {0.1, 0.05, 0.025, 0.0125}) {
            const DensityMatrix a = vqfie::encode_phase(rho, g, 0.3);
            const DensityMatrix b = vqfie::encode_phase(rho, g, 0.3 + delta);
            const double err =
                std::abs(vqfie::induced_bound(oracle::fidelity(a.mat(), b.mat()), delta) - qfi);
            EXPECT_LT(err, previous);
            previous = err;
        }
    }
}

TEST(Qfi, SandwichOnRandomStates) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const int n = 1 + static_cast<int>(s % 3);
        const vqfie::Generator g = vqfie::collective_z(n);
        const double p = 0.3 + 0.7 * static_cast<double>(s) / 100.0;
        const DensityMatrix rho = vqfie::random_state_with_purity(n, std::max(p, 1.0 / (1 << n)), s);
        const DensityMatrix a = vqfie::encode_phase(rho, g, 0.3);
        const DensityMatrix b = vqfie::encode_phase(rho, g, 0.4);
        for (int m : {1, 2, 4}) {
            if (m > (1 << n)) {
                continue;
            }
            const auto r = vqfie::compute_bounds(a, b, m, 0.1, &g);
            const double i_oracle = vqfie::induced_bound(oracle::fidelity(a.mat(), b.mat()), 0.1);
            EXPECT_NEAR(r.I_delta, i_oracle, 1e-7);
            EXPECT_TRUE(r.sandwich_holds(1e-8)) << "seed " << s << " m " << m;
            EXPECT_EQ(r.H_delta, std::max(r.tqfi_lower, r.ssqfi_lower));
            EXPECT_EQ(r.J_delta, std::min(r.tqfi_upper, r.ssqfi_upper));
        }
    }
}

TEST(Qfi, SaturationAtFullTruncation) {
    const vqfie::Generator g = vqfie::collective_z(4);
    for (int rank = 1; rank <= 4; ++rank) {
        const DensityMatrix rho = vqfie::random_state_with_rank(4, rank, 40 + rank);
        const DensityMatrix a = vqfie::encode_phase(rho, g, 0.3);
        const DensityMatrix b = vqfie::encode_phase(rho, g, 0.4);
        const auto r = vqfie::compute_bounds(a, b, rank, 0.1);
        EXPECT_NEAR(r.tqfi_lower, r.I_delta, 1e-8);
        EXPECT_NEAR(r.tqfi_upper, r.I_delta, 1e-8);
    }
}

TEST(Qfi, PureStatesCollapseAllBounds) {
    const vqfie::Generator g = vqfie::collective_z(3);
    const DensityMatrix psi = vqfie::random_state_with_rank(3, 1, 9);
    const auto r = vqfie::compute_bounds(vqfie::encode_phase(psi, g, 0.3),
                                         vqfie::encode_phase(psi, g, 0.4), 1, 0.1);
    EXPECT_NEAR(r.H_delta, r.I_delta, 1e-7);
    EXPECT_NEAR(r.J_delta, r.I_delta, 1e-7);
    EXPECT_NEAR(r.ssqfi_lower, r.ssqfi_upper, 1e-6);
}

TEST(Qfi, MaximallyMixedBoundsStraddleZero) {
    const vqfie::Generator g = vqfie::collective_z(2);
    const DensityMatrix mm = vqfie::maximally_mixed(2);
    const auto r = vqfie::compute_bounds(vqfie::encode_phase(mm, g, 0.3),
                                         vqfie::encode_phase(mm, g, 0.4), 2, 0.1);
    EXPECT_NEAR(r.I_delta, 0.0, 1e-9);
    EXPECT_LE(r.ssqfi_lower, 1e-9);
    EXPECT_GE(r.ssqfi_upper, -1e-9);
}

TEST(Qfi, TqfiLowerTightensWithM) {
    const vqfie::Generator g = vqfie::collective_z(4);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const DensityMatrix rho = vqfie::random_state_with_purity(4, 0.95, 60 + s);
        const DensityMatrix a = vqfie::encode_phase(rho, g, 0.3);
        const DensityMatrix b = vqfie::encode_phase(rho, g, 0.4);
        double previous = -1.0;
        for (int m = 1; m <= 4; ++m) {
            const double lower = vqfie::tqfi_bounds(a, b, m, 0.1).lower;
            EXPECT_GE(lower, previous - 1e-10);
            previous = lower;
        }
    }
}

TEST(Qfi, AnalyticLimitSpecialCases) {
    const vqfie::Generator g = vqfie::collective_z(3);
    const DensityMatrix psi = vqfie::random_state_with_rank(3, 1, 70);
    Eigen::VectorXcd v = vqfie::spectrum(psi).eigenvectors.col(0);
    EXPECT_NEAR(vqfie::tqfi_limit_analytic(psi, g, 1), oracle::pure_qfi(v, g.matrix), 1e-10);
    for (int m : {1, 4, 8}) {
        EXPECT_NEAR(vqfie::tqfi_limit_analytic(vqfie::maximally_mixed(3), g, m), 0.0, 1e-10);
    }
    const DensityMatrix rho = vqfie::random_state_with_purity(3, 0.6, 71);
    EXPECT_NEAR(vqfie::tqfi_limit_analytic(rho, g, 8), vqfie::exact_qfi(rho, g), 1e-9);
    EXPECT_THROW(vqfie::tqfi_limit_analytic(rho, g, 9), vqfie::MOutOfRange);
}

TEST(Qfi, AnalyticLimitIsSmallDeltaLimit) {
    // For complex states the truncated fidelity carries a delta^3 term, so
    // the finite-delta bound approaches the limit linearly in delta.
    const vqfie::Generator g = vqfie::collective_z(3);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const DensityMatrix rho = vqfie::random_state_with_purity(3, 0.5 + 0.02 * s, 80 + s);
        const double qfi = vqfie::exact_qfi(rho, g);
        for (int m : {2, 4, 8}) {
            const double analytic = vqfie::tqfi_limit_analytic(rho, g, m);
            EXPECT_LE(analytic, qfi + 1e-8);
            for (double delta : {1e-2, 1e-3, 1e-4}) {
                const double finite =
                    vqfie::tqfi_bounds(vqfie::encode_phase(rho, g, 0.3),
                                       vqfie::encode_phase(rho, g, 0.3 + delta), m, delta)
                        .lower;
                EXPECT_LT(std::abs(finite - analytic), 10.0 * delta) << "seed " << s << " m " << m;
            }
        }
    }
}

TEST(Qfi, AnalyticLimitQuadraticForRealStates) {
    // Real rho and real G make the bound even in delta.
    const vqfie::Generator g = vqfie::collective_z(3);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd a(8, 8);
    for (Eigen::Index i = 0; i < 8; ++i) {
        for (Eigen::Index j = 0; j < 8; ++j) {
            a(i, j) = n01(rng);
        }
    }
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
    const std::vector<double> lam = {0.5, 0.2, 0.1, 0.08, 0.05, 0.04, 0.02, 0.01};
    const DensityMatrix rho = vqfie::state_from_spectrum(3, lam, q.cast<vqfie::Complex>());
    for (int m : {2, 4}) {
        const double analytic = vqfie::tqfi_limit_analytic(rho, g, m);
        const double at = vqfie::tqfi_bounds(rho, vqfie::encode_phase(rho, g, 1e-3), m, 1e-3).lower;
        EXPECT_LT(std::abs(at - analytic), 1e-4);
    }
}

TEST(Qfi, MixedCeiling) {
    const vqfie::Generator z1 = vqfie::collective_z(1);
    const double l1 = 0.5 * (1.0 + std::sqrt(2.0 * 0.95 - 1.0));
    EXPECT_NEAR(vqfie::max_qfi_mixed(std::vector<double>{l1, 1.0 - l1}, z1.matrix), 3.6, 1e-12);
    const vqfie::Generator g = vqfie::collective_z(3);
    std::vector<double> pure(8, 0.0);
    pure[0] = 1.0;
    EXPECT_NEAR(vqfie::max_qfi_mixed(pure, g.matrix), 36.0, 1e-12);
    EXPECT_NEAR(vqfie::max_qfi_mixed(std::vector<double>(8, 0.125), g.matrix), 0.0, 1e-15);
    EXPECT_THROW(vqfie::max_qfi_mixed(std::vector<double>{0.5, 0.5}, g.matrix),
                 vqfie::SpectrumInvalid);
    for (std::uint64_t s = 0; s < 10; ++s) {
        vqfie::Rng rng(90 + s);
        const auto lam = vqfie::spectrum_with_purity(8, 0.6, rng);
        const double ceiling = vqfie::max_qfi_mixed(lam, g.matrix);
        const DensityMatrix probe = vqfie::optimal_mixed_probe(lam, g.matrix);
        EXPECT_NEAR(vqfie::exact_qfi(probe, g), ceiling, 1e-8);
        const DensityMatrix other =
            vqfie::state_from_spectrum(3, lam, vqfie::haar_unitary(8, rng));
        EXPECT_LE(vqfie::exact_qfi(other, g), ceiling + 1e-8);
    }
}

TEST(Qfi, GeneratorAwareBounds) {
    const vqfie::Generator g = vqfie::collective_z(3);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const DensityMatrix rho = vqfie::random_state_with_purity(3, 0.4 + 0.03 * s, 100 + s);
        const auto b = vqfie::generator_aware_bounds(rho, g);
        const double q = vqfie::exact_qfi(rho, g);
        EXPECT_LE(b.lower, q + 1e-8);
        EXPECT_GE(b.upper, q - 1e-8);
    }
    const DensityMatrix psi = vqfie::random_state_with_rank(3, 1, 5);
    const auto b = vqfie::generator_aware_bounds(psi, g);
    EXPECT_NEAR(b.lower, b.upper, 1e-10);
    EXPECT_NEAR(b.lower, vqfie::exact_qfi(psi, g), 1e-10);
    EXPECT_NEAR(vqfie::generator_aware_bounds(vqfie::maximally_mixed(3), g).lower, 0.0, 1e-12);
}

TEST(Qfi, GeneratorAwareRankLaw) {
    // L = I exactly when every pair coupled by G has lambda_i + lambda_j = 1.
    for (std::uint64_t s = 0; s < 20; ++s) {
        // One qubit: any rank-2 state qualifies.
        const vqfie::Generator g1 = vqfie::Generator::from_matrix(random_generator(1, 500 + s));
        const DensityMatrix q = vqfie::random_state_with_rank(1, 2, 600 + s);
        EXPECT_NEAR(vqfie::generator_aware_bounds(q, g1).lower, vqfie::exact_qfi(q, g1), 1e-8);

        // Two qubits, rank 2, G block diagonal on support and kernel.
        vqfie::ComplexMatrix block = vqfie::ComplexMatrix::Zero(4, 4);
        block.topLeftCorner(2, 2) = random_generator(1, 700 + s);
        block.bottomRightCorner(2, 2) = random_generator(1, 800 + s);
        std::mt19937_64 rng(900 + s);
        const vqfie::ComplexMatrix u = vqfie::haar_unitary(4, rng);
        const double l1 = 0.55 + 0.4 * static_cast<double>(s) / 20.0;
        const std::vector<double> lam = {l1, 1.0 - l1, 0.0, 0.0};
        const DensityMatrix r2 = vqfie::state_from_spectrum(2, lam, u);
        const auto g2 = vqfie::Generator::from_matrix(u * block * u.adjoint());
        EXPECT_NEAR(vqfie::generator_aware_bounds(r2, g2).lower, vqfie::exact_qfi(r2, g2), 1e-8);

        // Generic rank 2 and rank 3 on two qubits: strictly below.
        const vqfie::Generator g = vqfie::Generator::from_matrix(random_generator(2, 200 + s));
        for (int rank : {2, 3}) {
            const DensityMatrix r = vqfie::random_state_with_rank(2, rank, 300 + 10 * s + rank);
            EXPECT_LT(vqfie::generator_aware_bounds(r, g).lower, vqfie::exact_qfi(r, g) - 1e-6);
        }
    }
}

TEST(Qfi, PurityLossDegenerateCases) {
    const vqfie::Generator g = vqfie::collective_z(2);
    const DensityMatrix diag = vqfie::basis_state(2, 1);
    EXPECT_NEAR(vqfie::purity_loss_bound(diag, g, 0.3, 0.1, 16).L_stratified, 0.0, 1e-12);
    const DensityMatrix rho = vqfie::random_state_with_purity(2, 0.8, 3);
    const auto one = vqfie::purity_loss_bound(rho, g, 0.3, 0.1, 1);
    EXPECT_NEAR(one.delta_nu, 0.0, 1e-12);
    EXPECT_EQ(one.strata, 1);
    EXPECT_THROW(vqfie::purity_loss_bound(rho, g, 0.3, 0.0, 4), vqfie::InvalidArgument);
}

TEST(Qfi, StratifiedAnglesAreNormalQuantiles) {
    const auto a = vqfie::stratified_angles(0.3, 0.04, 4);
    // Standard normal quantiles at 1/8, 3/8, 5/8, 7/8.
    const double z[] = {-1.1503493803760083, -0.3186393639643752, 0.3186393639643752,
                        1.1503493803760083};
    for (int k = 0; k < 4; ++k) {
        EXPECT_NEAR(a[static_cast<std::size_t>(k)], 0.3 + 0.2 * z[k], 1e-12);
    }
    const auto j1 = vqfie::stratified_angles(0.0, 1.0, 8, vqfie::StrataPlacement::jittered, 5);
    const auto j2 = vqfie::stratified_angles(0.0, 1.0, 8, vqfie::StrataPlacement::jittered, 5);
    EXPECT_EQ(j1, j2);
}

TEST(Qfi, PurityLossApproachesGeneratorAwareLowerBound) {
    const vqfie::Generator g = vqfie::collective_z(2);
    const DensityMatrix rho = vqfie::random_state_with_purity(2, 0.85, 12);
    double previous = INFINITY;
    for (int k : {8, 16, 32, 64}) {
        const auto r = vqfie::purity_loss_bound(rho, g, 0.3, 1e-4, k);
        const double gap = std::abs(r.L_stratified - r.L_exact);
        EXPECT_LT(gap, previous);
        previous = gap;
    }
    EXPECT_LT(previous / vqfie::generator_aware_bounds(rho, g).lower, 0.05);
}

TEST(Qfi, StrataCount) {
    auto scan = [](int n, int t) {
        const double rhs = 2.0 * t * n * std::log(n) + n + (n + n * n) / 2.0;
        int k = 1;
        while ((k * k + k) / 2.0 + 1.0 < rhs) {
            ++k;
        }
        return k;
    };
    EXPECT_EQ(vqfie::strata_count(2, 200), 33);
    EXPECT_EQ(vqfie::strata_count(2, 200), scan(2, 200));
    EXPECT_EQ(vqfie::strata_count(8, 200), scan(8, 200));
    EXPECT_EQ(vqfie::strata_count(4, 0), scan(4, 0));
    EXPECT_THROW(vqfie::strata_count(1, 200), vqfie::InvalidArgument);
    EXPECT_LT(vqfie::strata_count(8, 200, vqfie::LogBase::natural),
              vqfie::strata_count(8, 200, vqfie::LogBase::two));
}

TEST(Qfi, CsvRowHasHeaderArity) {
    const vqfie::Generator g = vqfie::collective_z(2);
    const DensityMatrix rho = vqfie::random_state_with_purity(2, 0.7, 1);
    const auto r = vqfie::compute_bounds(vqfie::encode_phase(rho, g, 0.3),
                                         vqfie::encode_phase(rho, g, 0.4), 2, 0.1, &g);
    const std::string row = vqfie::to_csv_row(r);
    const std::string header = vqfie::bounds_csv_header();
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), std::count(header.begin(), header.end(), ','));
}

} // namespace
