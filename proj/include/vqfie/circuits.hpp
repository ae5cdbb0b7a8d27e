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
 * @file circuits.hpp
 * Layered hardware-efficient ansatz, phase encoding and parameter-shift
 * gradients.
 *
 * Rotations follow R_a(x) = exp(-i x sigma_a / 2), so the parameter-shift
 * rule with +-pi/2 shifts is exact. Gates act on density matrices through
 * two-sided per-gate kernels; the full 2^n x 2^n unitary is never formed.
 */
#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "states.hpp"

namespace vqfie {

enum class Axis { y, z };

struct Rotation {
    int qubit = 0;
    Axis axis = Axis::y;
    int param = 0;
};

struct Cnot {
    int control = 0;
    int target = 1;
};

using Gate = std::variant<Rotation, Cnot>;

/// Parameterized circuit layout. Immutable after construction.
class Ansatz {
  public:
    Ansatz(int n_qubits, int layers, std::vector<Gate> gates)
        : n_qubits_(n_qubits), layers_(layers), gates_(std::move(gates)) {
        dim_of(n_qubits_);
        std::vector<int> uses;
        for (const Gate &g : gates_) {
            if (const auto *r = std::get_if<Rotation>(&g)) {
                check_qubit(r->qubit);
                if (r->param < 0) {
                    throw InvalidArgument("Ansatz: negative parameter index");
                }
                if (static_cast<std::size_t>(r->param) >= uses.size()) {
                    uses.resize(static_cast<std::size_t>(r->param) + 1, 0);
                }
                ++uses[static_cast<std::size_t>(r->param)];
            } else {
                const auto &c = std::get<Cnot>(g);
                check_qubit(c.control);
                check_qubit(c.target);
                if (c.control == c.target) {
                    throw InvalidArgument("Ansatz: CNOT control equals target");
                }
            }
        }
        for (int u : uses) {
            if (u != 1) {
                throw InvalidArgument("Ansatz: every parameter index must be used exactly once");
            }
        }
        param_count_ = static_cast<int>(uses.size());
    }

    int n_qubits() const { return n_qubits_; }
    int layers() const { return layers_; }
    int param_count() const { return param_count_; }
    const std::vector<Gate> &gates() const { return gates_; }

    /// Same gates in reverse order; apply it with negated parameters to
    /// undo apply().
    Ansatz inverted() const {
        return {n_qubits_, layers_, std::vector<Gate>(gates_.rbegin(), gates_.rend())};
    }

    bool is_rotation_param(int index) const {
        for (const Gate &g : gates_) {
            if (const auto *r = std::get_if<Rotation>(&g); r && r->param == index) {
                return true;
            }
        }
        return false;
    }

    /// One record per slot, e.g. "rot qubit=0 axis=y param=3" or
    /// "cnot control=0 target=1", preceded by a header record.
    std::string to_text() const {
        std::ostringstream os;
        os << "ansatz n_qubits=" << n_qubits_ << " layers=" << layers_
           << " params=" << param_count_ << '\n';
        for (const Gate &g : gates_) {
            if (const auto *r = std::get_if<Rotation>(&g)) {
                os << "rot qubit=" << r->qubit << " axis=" << (r->axis == Axis::y ? 'y' : 'z')
                   << " param=" << r->param << '\n';
            } else {
                const auto &c = std::get<Cnot>(g);
                os << "cnot control=" << c.control << " target=" << c.target << '\n';
            }
        }
        return os.str();
    }

    static Ansatz from_text(const std::string &text) {
        std::istringstream is(text);
        std::string line;
        int n = 0;
        int layers = 0;
        std::vector<Gate> gates;
        auto field = [](const std::string &rec, const std::string &key) -> std::string {
            const auto pos = rec.find(key + "=");
            if (pos == std::string::npos) {
                throw InvalidArgument("Ansatz::from_text: missing " + key);
            }
            const auto start = pos + key.size() + 1;
            return rec.substr(start, rec.find(' ', start) - start);
        };
        while (std::getline(is, line)) {
            if (line.empty()) {
                continue;
            }
            const std::string kind = line.substr(0, line.find(' '));
            if (kind == "ansatz") {
                n = std::stoi(field(line, "n_qubits"));
                layers = std::stoi(field(line, "layers"));
            } else if (kind == "rot") {
                gates.emplace_back(Rotation{std::stoi(field(line, "qubit")),
                                            field(line, "axis") == "y" ? Axis::y : Axis::z,
                                            std::stoi(field(line, "param"))});
            } else if (kind == "cnot") {
                gates.emplace_back(
                    Cnot{std::stoi(field(line, "control")), std::stoi(field(line, "target"))});
            } else {
                throw InvalidArgument("Ansatz::from_text: unknown record '" + kind + "'");
            }
        }
        return {n, layers, std::move(gates)};
    }

  private:
    void check_qubit(int q) const {
        if (q < 0 || q >= n_qubits_) {
            throw InvalidArgument("Ansatz: qubit index " + std::to_string(q) + " out of range");
        }
    }

    int n_qubits_;
    int layers_;
    std::vector<Gate> gates_;
    int param_count_ = 0;
};

/// Per layer: Ry on every qubit, Rz on every qubit, then CNOTs on
/// (0,1),(2,3),... followed by (1,2),(3,4),... . p = 2 n L.
inline Ansatz build_hw_efficient(int n, int layers) {
    if (n < 2 || layers < 1) {
        throw InvalidArgument("build_hw_efficient: need n >= 2 and layers >= 1");
    }
    std::vector<Gate> gates;
    int p = 0;
    for (int l = 0; l < layers; ++l) {
        for (int q = 0; q < n; ++q) {
            gates.emplace_back(Rotation{q, Axis::y, p++});
        }
        for (int q = 0; q < n; ++q) {
            gates.emplace_back(Rotation{q, Axis::z, p++});
        }
        for (int q = 0; q + 1 < n; q += 2) {
            gates.emplace_back(Cnot{q, q + 1});
        }
        for (int q = 1; q + 1 < n; q += 2) {
            gates.emplace_back(Cnot{q, q + 1});
        }
    }
    return {n, layers, std::move(gates)};
}

/// ceil(log2 n), at least 1.
inline int log2_layers(int n) {
    int layers = 0;
    while ((1 << layers) < n) {
        ++layers;
    }
    return std::max(layers, 1);
}

namespace detail {

using Mat2 = Eigen::Matrix2cd;

inline Mat2 rotation_matrix(Axis axis, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    Mat2 u;
    if (axis == Axis::y) {
        u << c, -s, s, c;
    } else {
        u << std::polar(1.0, -angle / 2.0), 0.0, 0.0, std::polar(1.0, angle / 2.0);
    }
    return u;
}

inline Eigen::Index bit_mask(int n, int qubit) {
    return Eigen::Index{1} << (n - 1 - qubit);
}

// rho <- U rho U^dag for U acting on one qubit.
inline void apply_one_qubit(ComplexMatrix &rho, int n, int qubit, const Mat2 &u) {
    const Eigen::Index mask = bit_mask(n, qubit);
    const Eigen::Index d = rho.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
        if (i & mask) {
            continue;
        }
        const Eigen::Index i1 = i | mask;
        for (Eigen::Index j = 0; j < d; ++j) {
            const Complex a = rho(i, j);
            const Complex b = rho(i1, j);
            rho(i, j) = u(0, 0) * a + u(0, 1) * b;
            rho(i1, j) = u(1, 0) * a + u(1, 1) * b;
        }
    }
    for (Eigen::Index j = 0; j < d; ++j) {
        if (j & mask) {
            continue;
        }
        const Eigen::Index j1 = j | mask;
        for (Eigen::Index i = 0; i < d; ++i) {
            const Complex a = rho(i, j);
            const Complex b = rho(i, j1);
            rho(i, j) = a * std::conj(u(0, 0)) + b * std::conj(u(0, 1));
            rho(i, j1) = a * std::conj(u(1, 0)) + b * std::conj(u(1, 1));
        }
    }
}

inline Eigen::Index cnot_image(Eigen::Index i, Eigen::Index cmask, Eigen::Index tmask) {
    return (i & cmask) ? (i ^ tmask) : i;
}

inline void apply_cnot(ComplexMatrix &rho, int n, const Cnot &g) {
    const Eigen::Index cmask = bit_mask(n, g.control);
    const Eigen::Index tmask = bit_mask(n, g.target);
    const Eigen::Index d = rho.rows();
    ComplexMatrix out(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const Eigen::Index pj = cnot_image(j, cmask, tmask);
        for (Eigen::Index i = 0; i < d; ++i) {
            out(i, j) = rho(cnot_image(i, cmask, tmask), pj);
        }
    }
    rho = std::move(out);
}

inline void apply_one_qubit(ComplexVector &psi, int n, int qubit, const Mat2 &u) {
    const Eigen::Index mask = bit_mask(n, qubit);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        if (i & mask) {
            continue;
        }
        const Eigen::Index i1 = i | mask;
        const Complex a = psi[i];
        const Complex b = psi[i1];
        psi[i] = u(0, 0) * a + u(0, 1) * b;
        psi[i1] = u(1, 0) * a + u(1, 1) * b;
    }
}

inline void apply_cnot(ComplexVector &psi, int n, const Cnot &g) {
    const Eigen::Index cmask = bit_mask(n, g.control);
    const Eigen::Index tmask = bit_mask(n, g.target);
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        if ((i & cmask) && !(i & tmask)) {
            std::swap(psi[i], psi[i | tmask]);
        }
    }
}

template <typename State>
void run_circuit(State &state, const Ansatz &ansatz, std::span<const double> params) {
    if (params.size() != static_cast<std::size_t>(ansatz.param_count())) {
        throw ParamLengthMismatch("expected " + std::to_string(ansatz.param_count()) +
                                  " parameters, got " + std::to_string(params.size()));
    }
    const int n = ansatz.n_qubits();
    for (const Gate &g : ansatz.gates()) {
        if (const auto *r = std::get_if<Rotation>(&g)) {
            apply_one_qubit(state, n, r->qubit,
                            rotation_matrix(r->axis, params[static_cast<std::size_t>(r->param)]));
        } else {
            apply_cnot(state, n, std::get<Cnot>(g));
        }
    }
}

} // namespace detail

/// U_params rho U_params^dag.
inline DensityMatrix apply(const Ansatz &ansatz, std::span<const double> params,
                           const DensityMatrix &rho) {
    if (rho.n_qubits() != ansatz.n_qubits()) {
        throw DimMismatch("apply: ansatz and state qubit counts differ");
    }
    ComplexMatrix m = rho.mat();
    detail::run_circuit(m, ansatz, params);
    m = 0.5 * (m + m.adjoint()).eval();
    return {rho.n_qubits(), std::move(m), rho.normalized()};
}

/// U_params |psi>.
inline ComplexVector apply(const Ansatz &ansatz, std::span<const double> params,
                           const ComplexVector &psi) {
    if (psi.size() != static_cast<Eigen::Index>(dim_of(ansatz.n_qubits()))) {
        throw DimMismatch("apply: vector length does not match the ansatz");
    }
    ComplexVector out = psi;
    detail::run_circuit(out, ansatz, params);
    return out;
}

/// Hermitian generator of the phase encoding exp(-i theta G).
struct Generator {
    ComplexMatrix matrix;
    std::string locality_note;
    bool diagonal = false;

    static Generator from_matrix(ComplexMatrix m, std::string note = "dense") {
        require_square(m, "Generator");
        if (!m.allFinite() || hermiticity_defect(m) > 1e-10) {
            throw NonHermitianInput("Generator: not Hermitian to 1e-10");
        }
        Generator g;
        g.diagonal = (m - ComplexMatrix(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
        g.matrix = std::move(m);
        g.locality_note = std::move(note);
        return g;
    }
};

/// Pauli Z on one qubit of n.
inline ComplexMatrix pauli_z(int n, int qubit) {
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    ComplexMatrix z = ComplexMatrix::Zero(d, d);
    const Eigen::Index mask = detail::bit_mask(n, qubit);
    for (Eigen::Index i = 0; i < d; ++i) {
        z(i, i) = (i & mask) ? -1.0 : 1.0;
    }
    return z;
}

/// Magnetometry generator sum_i Z_i.
inline Generator collective_z(int n) {
    const auto d = static_cast<Eigen::Index>(dim_of(n));
    ComplexMatrix g = ComplexMatrix::Zero(d, d);
    for (int q = 0; q < n; ++q) {
        g += pauli_z(n, q);
    }
    return Generator::from_matrix(std::move(g), "1-local");
}

namespace detail {

inline ComplexMatrix encode_dense(const ComplexMatrix &rho, const ComplexMatrix &g, double theta) {
    const ComplexMatrix w = exp_i_hermitian(g, theta);
    return w * rho * w.adjoint();
}

} // namespace detail

/// W rho W^dag with W = exp(-i theta G). A diagonal G takes the elementwise
/// phase path.
inline DensityMatrix encode_phase(const DensityMatrix &rho, const Generator &g, double theta) {
    if (g.matrix.rows() != rho.dim()) {
        throw DimMismatch("encode_phase: generator and state dimensions differ");
    }
    ComplexMatrix out;
    if (g.diagonal) {
        const Eigen::Index d = rho.dim();
        out.resize(d, d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double gj = g.matrix(j, j).real();
            for (Eigen::Index i = 0; i < d; ++i) {
                out(i, j) = rho.mat()(i, j) * std::polar(1.0, -theta * (g.matrix(i, i).real() - gj));
            }
        }
    } else {
        out = detail::encode_dense(rho.mat(), g.matrix, theta);
        out = 0.5 * (out + out.adjoint()).eval();
    }
    return {rho.n_qubits(), std::move(out), rho.normalized()};
}

using CostFunction = std::function<double(std::span<const double>)>;

/// d cost / d params[index] by the two-term shift rule.
inline double param_shift_grad(const Ansatz &ansatz, const CostFunction &cost,
                               std::span<const double> params, int index) {
    if (params.size() != static_cast<std::size_t>(ansatz.param_count())) {
        throw ParamLengthMismatch("param_shift_grad: parameter vector length mismatch");
    }
    if (index < 0 || index >= ansatz.param_count() || !ansatz.is_rotation_param(index)) {
        throw NonRotationSlot("parameter " + std::to_string(index) + " is not a rotation angle");
    }
    std::vector<double> shifted(params.begin(), params.end());
    const auto k = static_cast<std::size_t>(index);
    shifted[k] = params[k] + std::numbers::pi / 2.0;
    const double plus = cost(shifted);
    shifted[k] = params[k] - std::numbers::pi / 2.0;
    const double minus = cost(shifted);
    return 0.5 * (plus - minus);
}

/// Full gradient; 2p cost evaluations.
inline std::vector<double> param_shift_gradient(const Ansatz &ansatz, const CostFunction &cost,
                                                std::span<const double> params) {
    std::vector<double> grad(params.size());
    for (int k = 0; k < ansatz.param_count(); ++k) {
        grad[static_cast<std::size_t>(k)] = param_shift_grad(ansatz, cost, params, k);
    }
    return grad;
}

} // namespace vqfie
