// Copyright 2026 The mdisc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Distance and fidelity measures between projective measurements.
//
// D_max compares outcome distributions p_m = tr(rho P_m), q_m = tr(rho Q_m)
// by total variation. The stabilized measures let the input be entangled
// with a d-dimensional ancilla and compare the full quantum-classical outputs
// sum_m A_m ⊗ |m><m| where A_m = tr_sys[(P_m ⊗ I) rho] is the ancilla state
// left behind with outcome m.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mdisc/apparatus.hpp"
#include "mdisc/numkit.hpp"
#include "mdisc/optimize.hpp"
#include "mdisc/schemes.hpp"

namespace mdisc {

struct DistanceReport {
    std::string measure;  // "dmax", "dstab", "fmin" or "fstab"
    double value = 0.0;
    Matrix witness;       // extremal input state as a density matrix
    bool certified = false;
    std::optional<double> cross_check;  // optimizer value when a closed form was reported
};

struct DistanceOptions {
    int k_max = 16;        // sign enumeration refuses beyond this many outcomes
    int starts = 32;       // multistart points for the local optimizers
    std::uint64_t seed = 20061;
    double ftol = 1e-8;
    Tolerances tol{};
};

namespace detail {

inline Hypotheses distance_inputs(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n,
                                  const DistanceOptions &opt) {
    require_valid(m, opt.tol);
    require_valid(n, opt.tol);
    auto hyp = make_hypotheses(m, n);
    if (static_cast<int>(hyp.m.size()) > opt.k_max) {
        throw PreconditionError("distance: " + std::to_string(hyp.m.size()) + " outcomes exceed k_max = " +
                                std::to_string(opt.k_max));
    }
    return hyp;
}

inline std::optional<QubitPair> qubit_pair_of(const Hypotheses &hyp, const Tolerances &tol) {
    if (!is_qubit_von_neumann(hyp.m) || !is_qubit_von_neumann(hyp.n)) {
        return std::nullopt;
    }
    try {
        return canonicalize_qubit_pair(*as_von_neumann(hyp.m), *as_von_neumann(hyp.n), tol);
    } catch (const PreconditionError &) {
        return QubitPair::from_theta(0.0);
    }
}

/// Ancilla operator tr_sys[(X ⊗ I)|v><v|] for v on d * anc dims (system first).
inline Matrix ancilla_block(const Matrix &x, const Vector &v, Eigen::Index d, Eigen::Index anc) {
    using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Matrix vm = Eigen::Map<const RowMajor>(v.data(), d, anc);
    return (x * vm).transpose() * vm.conjugate();
}

inline double trace_norm_hermitian(const Matrix &x) {
    return hermitian_eigen(x).eigenvalues().cwiseAbs().sum();
}

inline double trace_norm(const Matrix &x) {
    Eigen::JacobiSVD<Matrix> svd(x);
    return svd.singularValues().sum();
}

inline double stabilized_distance_at(const Hypotheses &hyp, const Vector &v) {
    double total = 0.0;
    for (std::size_t k = 0; k < hyp.m.size(); ++k) {
        const Matrix delta = hyp.m.outcomes[k].projector - hyp.n.outcomes[k].projector;
        total += trace_norm_hermitian(ancilla_block(delta, v, hyp.m.dim, hyp.m.dim));
    }
    return 0.5 * total;
}

inline Vector random_state(Eigen::Index dim, std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        v(i) = Complex(g(rng), g(rng));
    }
    return v / v.norm();
}

/// Alternating maximization of sum_m tr(Y_m A_m) over contractions Y_m and
/// pure inputs; each half-step can only increase the objective.
inline std::pair<double, Vector> seesaw(const Hypotheses &hyp, Vector v) {
    const Eigen::Index d = hyp.m.dim;
    std::vector<Matrix> deltas;
    for (std::size_t k = 0; k < hyp.m.size(); ++k) {
        deltas.push_back(hyp.m.outcomes[k].projector - hyp.n.outcomes[k].projector);
    }
    double value = stabilized_distance_at(hyp, v);
    for (int iter = 0; iter < 2000; ++iter) {
        Matrix h = Matrix::Zero(d * d, d * d);
        for (const auto &delta : deltas) {
            auto eig = hermitian_eigen(ancilla_block(delta, v, d, d));
            RealVector signs = eig.eigenvalues().unaryExpr([](double x) { return x >= 0.0 ? 1.0 : -1.0; });
            const Matrix y = eig.eigenvectors() * signs.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
            h += kron(delta, y);
        }
        auto top = hermitian_eigen(h);
        Vector next = top.eigenvectors().col(d * d - 1);
        const double next_value = stabilized_distance_at(hyp, next);
        if (next_value <= value + 1e-15) {
            break;
        }
        v = next;
        value = next_value;
    }
    return {value, v};
}

/// Minimizes f over unit vectors of dimension `dim` by multistart Nelder-Mead
/// on real and imaginary parts.
template <typename F>
std::pair<double, Vector> minimize_over_states(F &&f, Eigen::Index dim, const DistanceOptions &opt,
                                               std::vector<Vector> seeds) {
    auto unpack = [dim](const std::vector<double> &x) {
        Vector v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            v(i) = Complex(x[static_cast<std::size_t>(2 * i)], x[static_cast<std::size_t>(2 * i + 1)]);
        }
        const double n = v.norm();
        return n > 0.0 ? Vector(v / n) : Vector(basis_vector(dim, 0));
    };
    auto objective = [&](const std::vector<double> &x) { return f(unpack(x)); };
    std::mt19937_64 rng(opt.seed);
    for (int s = 0; s < opt.starts; ++s) {
        seeds.push_back(random_state(dim, rng));
    }
    double best = std::numeric_limits<double>::infinity();
    Vector best_v;
    for (const auto &seed : seeds) {
        std::vector<double> x(static_cast<std::size_t>(2 * dim));
        for (Eigen::Index i = 0; i < dim; ++i) {
            x[static_cast<std::size_t>(2 * i)] = seed(i).real();
            x[static_cast<std::size_t>(2 * i + 1)] = seed(i).imag();
        }
        double step = 0.3;
        double last = std::numeric_limits<double>::infinity();
        // Restart from the current best with a shrinking simplex until the
        // value stops moving.
        for (int round = 0; round < 6; ++round) {
            auto r = optimize::nelder_mead(objective, x, step, opt.ftol * 1e-2, 4000 * static_cast<int>(dim));
            x = r.x;
            const Vector unit = unpack(x);
            for (Eigen::Index i = 0; i < dim; ++i) {
                x[static_cast<std::size_t>(2 * i)] = unit(i).real();
                x[static_cast<std::size_t>(2 * i + 1)] = unit(i).imag();
            }
            if (std::abs(last - r.value) <= opt.ftol) {
                last = r.value;
                break;
            }
            last = r.value;
            step *= 0.3;
        }
        if (last < best) {
            best = last;
            best_v = unpack(x);
        }
    }
    return {best, best_v};
}

inline double fidelity_at(const Hypotheses &hyp, const Vector &v) {
    double total = 0.0;
    for (std::size_t k = 0; k < hyp.m.size(); ++k) {
        const double p = std::max(0.0, v.dot(hyp.m.outcomes[k].projector * v).real());
        const double q = std::max(0.0, v.dot(hyp.n.outcomes[k].projector * v).real());
        total += std::sqrt(p * q);
    }
    return total;
}

inline double stabilized_fidelity_at(const Hypotheses &hyp, const Vector &v, const Tolerances &tol) {
    const Eigen::Index d = hyp.m.dim;
    double total = 0.0;
    Tolerances loose = tol;
    loose.proj = 1e-6;
    for (std::size_t k = 0; k < hyp.m.size(); ++k) {
        const Matrix a = ancilla_block(hyp.m.outcomes[k].projector, v, d, d);
        const Matrix b = ancilla_block(hyp.n.outcomes[k].projector, v, d, d);
        total += trace_norm(psd_sqrt(0.5 * (a + a.adjoint()), loose) * psd_sqrt(0.5 * (b + b.adjoint()), loose));
    }
    return total;
}

}  // namespace detail

/// Exact D_max by sign enumeration: (1/2) max_s lambda_max(sum_m s_m (P_m - Q_m)).
inline DistanceReport dmax(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n,
                           const DistanceOptions &opt = {}) {
    const auto hyp = detail::distance_inputs(m, n, opt);
    const std::size_t k = hyp.m.size();
    std::vector<Matrix> deltas;
    for (std::size_t i = 0; i < k; ++i) {
        deltas.push_back(hyp.m.outcomes[i].projector - hyp.n.outcomes[i].projector);
    }
    DistanceReport out{"dmax", -1.0, {}, true, std::nullopt};
    // Bit i of `mask` set means s_i = -1; masks are visited in increasing
    // order and only a strictly larger value replaces the incumbent.
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
        Matrix h = Matrix::Zero(hyp.m.dim, hyp.m.dim);
        for (std::size_t i = 0; i < k; ++i) {
            h += ((mask >> i) & 1) ? Matrix(-deltas[i]) : deltas[i];
        }
        auto eig = hermitian_eigen(h);
        const double top = 0.5 * eig.eigenvalues()(hyp.m.dim - 1);
        if (top > out.value) {
            out.value = top;
            out.witness = outer(eig.eigenvectors().col(hyp.m.dim - 1));
        }
    }
    out.value = std::clamp(out.value, 0.0, 1.0);
    return out;
}

/// Stabilized distance with a d-dimensional ancilla. Computed by seesaw from
/// the D_max witness and random starts; certified when it reaches the upper
/// bound 1 or when the qubit closed form sin(theta/2) applies.
inline DistanceReport dstab(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n,
                            const DistanceOptions &opt = {}) {
    const auto hyp = detail::distance_inputs(m, n, opt);
    const Eigen::Index d = hyp.m.dim;
    const auto base = dmax(hyp.m, hyp.n, opt);
    std::vector<Vector> starts;
    {
        auto eig = hermitian_eigen(base.witness);
        starts.push_back(kron(Matrix(eig.eigenvectors().col(d - 1)), Matrix(basis_vector(d, 0))));
    }
    std::mt19937_64 rng(opt.seed);
    for (int s = 0; s < opt.starts; ++s) {
        starts.push_back(detail::random_state(d * d, rng));
    }
    DistanceReport out{"dstab", -1.0, {}, false, std::nullopt};
    for (const auto &s : starts) {
        auto [value, v] = detail::seesaw(hyp, s);
        if (value > out.value) {
            out.value = value;
            out.witness = outer(v);
        }
    }
    out.value = std::clamp(out.value, 0.0, 1.0);
    out.certified = out.value >= 1.0 - opt.tol.norm;
    if (auto pair = detail::qubit_pair_of(hyp, opt.tol)) {
        out.cross_check = out.value;
        out.value = pair->b;
        out.certified = std::abs(*out.cross_check - pair->b) <= 1e-6;
    }
    return out;
}

/// Minimum fidelity sum_m sqrt(p_m q_m) over pure inputs (stabilized: over
/// pure inputs on system ⊗ ancilla, with the fidelity of the ancilla blocks).
/// Local optimization; certified only for qubit pairs, where the closed form
/// cos(theta/2) is reported and checked against the optimizer.
inline DistanceReport fidelity(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n, bool stabilized,
                               const DistanceOptions &opt = {}) {
    const auto hyp = detail::distance_inputs(m, n, opt);
    const Eigen::Index d = hyp.m.dim;
    DistanceReport out{stabilized ? "fstab" : "fmin", 0.0, {}, false, std::nullopt};
    std::pair<double, Vector> best;
    if (stabilized) {
        const auto tol = opt.tol;
        best = detail::minimize_over_states(
            [&](const Vector &v) { return detail::stabilized_fidelity_at(hyp, v, tol); }, d * d, opt, {});
    } else {
        best = detail::minimize_over_states([&](const Vector &v) { return detail::fidelity_at(hyp, v); }, d, opt,
                                            {});
    }
    out.value = std::clamp(best.first, 0.0, 1.0);
    out.witness = outer(best.second);
    if (auto pair = detail::qubit_pair_of(hyp, opt.tol)) {
        out.cross_check = out.value;
        out.value = pair->a;
        out.certified = std::abs(*out.cross_check - pair->a) <= 1e-6;
    }
    return out;
}

}  // namespace mdisc
