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

// Dense complex linear algebra on top of Eigen.
//
// States are column vectors, operators are square matrices, and composite
// spaces are ordered with slot 0 as the most significant index (the same
// order a left fold of kron produces). When a space is split into a system
// and an ancilla the system is always the leading slot.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mdisc/errors.hpp"
#include "mdisc/tolerances.hpp"

namespace mdisc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

/// Left fold of kron over `factors`; the empty product is the 1x1 identity.
inline Matrix kron_all(std::span<const Matrix> factors) {
    Matrix out = Matrix::Identity(1, 1);
    for (const auto &f : factors) {
        out = kron(out, f);
    }
    return out;
}

inline Matrix kron_power(const Matrix &a, int n) {
    Matrix out = Matrix::Identity(1, 1);
    for (int k = 0; k < n; ++k) {
        out = kron(out, a);
    }
    return out;
}

inline Matrix outer(const Vector &v) { return v * v.adjoint(); }

inline Vector basis_vector(Eigen::Index dim, Eigen::Index index) {
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return v;
}

/// Largest singular value.
inline double operator_norm(const Matrix &a) {
    if (a.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

/// Smallest singular value of a square matrix.
inline double smallest_singular(const Matrix &a) {
    if (a.rows() != a.cols()) {
        throw PreconditionError("smallest_singular: matrix is not square");
    }
    if (a.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

inline double max_abs(const Matrix &a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double hermitian_deviation(const Matrix &a) {
    return max_abs(a - a.adjoint());
}

/// max |W^dagger W - I| entrywise.
inline double unitary_deviation(const Matrix &w) {
    if (w.rows() != w.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    return max_abs(w.adjoint() * w - Matrix::Identity(w.rows(), w.cols()));
}

/// Eigen-decomposition of a Hermitian matrix (ascending eigenvalues). The
/// input is symmetrized first so round-off asymmetry does not leak in.
inline Eigen::SelfAdjointEigenSolver<Matrix> hermitian_eigen(const Matrix &a) {
    Matrix sym = 0.5 * (a + a.adjoint());
    return Eigen::SelfAdjointEigenSolver<Matrix>(sym);
}

/// Square root of a Hermitian positive semidefinite matrix. Eigenvalues in
/// (-tol.proj, 0) are clamped to zero.
inline Matrix psd_sqrt(const Matrix &a, const Tolerances &tol = {}) {
    if (a.rows() != a.cols()) {
        throw PreconditionError("psd_sqrt: matrix is not square");
    }
    if (hermitian_deviation(a) > tol.proj) {
        throw PreconditionError("psd_sqrt: matrix is not Hermitian");
    }
    if (a.size() == 0) {
        return a;
    }
    auto eig = hermitian_eigen(a);
    RealVector vals = eig.eigenvalues();
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (vals(i) < -tol.proj) {
            throw PreconditionError("psd_sqrt: matrix has a negative eigenvalue " +
                                    std::to_string(vals(i)));
        }
        vals(i) = std::sqrt(std::max(vals(i), 0.0));
    }
    const Matrix &vecs = eig.eigenvectors();
    Matrix out = vecs * vals.cast<Complex>().asDiagonal() * vecs.adjoint();
    return 0.5 * (out + out.adjoint());
}

/// Gram-Schmidt with one re-orthogonalization pass. Columns whose residual
/// norm falls below `drop` are discarded.
inline Matrix orthonormalize(const Matrix &cols, double drop = 1e-8) {
    std::vector<Vector> kept;
    for (Eigen::Index j = 0; j < cols.cols(); ++j) {
        Vector v = cols.col(j);
        const double original = v.norm();
        if (original == 0.0) {
            continue;
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto &q : kept) {
                v -= q.dot(v) * q;
            }
        }
        const double n = v.norm();
        if (n > drop * std::max(1.0, original)) {
            kept.push_back(v / n);
        }
    }
    Matrix out(cols.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) {
        out.col(static_cast<Eigen::Index>(j)) = kept[j];
    }
    return out;
}

/// Extends orthonormal columns to a full unitary whose leading columns are
/// exactly `cols`.
inline Matrix orthonormal_completion(const Matrix &cols) {
    const Eigen::Index d = cols.rows();
    Matrix candidates(d, cols.cols() + d);
    candidates << cols, Matrix::Identity(d, d);
    Matrix out = orthonormalize(candidates, 1e-6);
    if (out.cols() != d) {
        throw PreconditionError("orthonormal_completion: columns are not independent");
    }
    return out;
}

/// Orthonormal basis (as columns) of the range of a projector: eigenvectors
/// with eigenvalue above 1/2.
inline Matrix range_basis(const Matrix &p) {
    if (p.size() == 0) {
        return Matrix(0, 0);
    }
    auto eig = hermitian_eigen(p);
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = p.rows() - 1; i >= 0; --i) {
        if (eig.eigenvalues()(i) > 0.5) {
            idx.push_back(i);
        }
    }
    Matrix out(p.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = eig.eigenvectors().col(idx[k]);
    }
    return out;
}

inline int projector_rank(const Matrix &p) {
    return static_cast<int>(std::lround(p.trace().real()));
}

/// Projector onto range(P) ∩ range(Q): eigenvectors of PQP with eigenvalue
/// within tol.eig of 1.
inline Matrix subspace_meet(const Matrix &p, const Matrix &q, const Tolerances &tol = {}) {
    if (p.rows() != q.rows() || p.cols() != q.cols()) {
        throw PreconditionError("subspace_meet: dimension mismatch");
    }
    auto eig = hermitian_eigen(p * q * p);
    Matrix out = Matrix::Zero(p.rows(), p.cols());
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        if (eig.eigenvalues()(i) > 1.0 - tol.eig) {
            const Vector v = eig.eigenvectors().col(i);
            out += outer(v);
        }
    }
    return out;
}

/// Unitary of size target_dim whose leading r x r block is the contraction V:
///   [[V, (I - V V^dagger)^{1/2}], [(I - V^dagger V)^{1/2}, -V^dagger]] ⊕ I.
inline Matrix unitary_dilation(const Matrix &v, Eigen::Index target_dim,
                               const Tolerances &tol = {}) {
    const Eigen::Index r = v.rows();
    if (v.cols() != r) {
        throw PreconditionError("unitary_dilation: block is not square");
    }
    if (target_dim < 2 * r) {
        throw PreconditionError("unitary_dilation: target dimension " +
                                std::to_string(target_dim) + " is below 2r = " +
                                std::to_string(2 * r));
    }
    const double norm = operator_norm(v);
    if (norm > 1.0 + tol.norm) {
        throw PreconditionError("unitary_dilation: block norm " + std::to_string(norm) +
                                " exceeds 1");
    }
    // Rescale tiny overshoots so the defect operators stay PSD.
    Matrix vv = norm > 1.0 ? Matrix(v / norm) : v;
    const Matrix id = Matrix::Identity(r, r);
    Matrix out = Matrix::Identity(target_dim, target_dim);
    out.block(0, 0, r, r) = vv;
    out.block(0, r, r, r) = psd_sqrt(id - vv * vv.adjoint(), tol);
    out.block(r, 0, r, r) = psd_sqrt(id - vv.adjoint() * vv, tol);
    out.block(r, r, r, r) = -vv.adjoint();
    return out;
}

/// Traces out the trailing ancilla of an operator on (d_sys * d_anc) dims.
inline Matrix partial_trace_ancilla(const Matrix &rho, Eigen::Index d_sys, Eigen::Index d_anc) {
    if (rho.rows() != d_sys * d_anc || rho.cols() != d_sys * d_anc) {
        throw PreconditionError("partial_trace_ancilla: dimension mismatch");
    }
    Matrix out = Matrix::Zero(d_sys, d_sys);
    for (Eigen::Index i = 0; i < d_sys; ++i) {
        for (Eigen::Index j = 0; j < d_sys; ++j) {
            Complex s = 0.0;
            for (Eigen::Index k = 0; k < d_anc; ++k) {
                s += rho(i * d_anc + k, j * d_anc + k);
            }
            out(i, j) = s;
        }
    }
    return out;
}

/// Traces out the leading system of an operator on (d_sys * d_anc) dims.
inline Matrix partial_trace_system(const Matrix &rho, Eigen::Index d_sys, Eigen::Index d_anc) {
    if (rho.rows() != d_sys * d_anc || rho.cols() != d_sys * d_anc) {
        throw PreconditionError("partial_trace_system: dimension mismatch");
    }
    Matrix out = Matrix::Zero(d_anc, d_anc);
    for (Eigen::Index k = 0; k < d_sys; ++k) {
        out += rho.block(k * d_anc, k * d_anc, d_anc, d_anc);
    }
    return out;
}

/// Checks that rho is a density matrix; returns a description of the first
/// violation or an empty string.
inline std::string density_violation(const Matrix &rho, const Tolerances &tol = {}) {
    if (rho.rows() != rho.cols() || rho.rows() == 0) {
        return "not a nonempty square matrix";
    }
    if (hermitian_deviation(rho) > tol.proj) {
        return "not Hermitian";
    }
    if (std::abs(rho.trace() - Complex(1.0)) > tol.norm) {
        return "trace is not 1";
    }
    if (hermitian_eigen(rho).eigenvalues()(0) < -tol.proj) {
        return "not positive semidefinite";
    }
    return {};
}

/// Purification of a density matrix on d dims: a unit vector on d * rank(rho)
/// dims, system first, whose ancilla partial trace is rho.
inline Vector purify(const Matrix &rho, const Tolerances &tol = {}) {
    if (auto why = density_violation(rho, tol); !why.empty()) {
        throw PreconditionError("purify: input is not a density matrix (" + why + ")");
    }
    auto eig = hermitian_eigen(rho);
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = rho.rows() - 1; i >= 0; --i) {
        if (eig.eigenvalues()(i) > tol.num) {
            kept.push_back(i);
        }
    }
    const auto d = rho.rows();
    const auto anc = static_cast<Eigen::Index>(kept.size());
    Vector out = Vector::Zero(d * anc);
    for (Eigen::Index k = 0; k < anc; ++k) {
        const double w = std::sqrt(eig.eigenvalues()(kept[static_cast<std::size_t>(k)]));
        const Vector e = eig.eigenvectors().col(kept[static_cast<std::size_t>(k)]);
        for (Eigen::Index i = 0; i < d; ++i) {
            out(i * anc + k) = w * e(i);
        }
    }
    return out / out.norm();
}

inline Eigen::Index product_of(std::span<const Eigen::Index> dims) {
    return std::accumulate(dims.begin(), dims.end(), Eigen::Index{1}, std::multiplies<>());
}

/// Applies `op` (dims[slot] x dims[slot]) to one tensor slot of `state`.
inline Vector apply_on_slot(const Matrix &op, const Vector &state,
                            std::span<const Eigen::Index> dims, std::size_t slot) {
    if (slot >= dims.size()) {
        throw PreconditionError("apply_on_slot: slot out of range");
    }
    const Eigen::Index mid = dims[slot];
    if (op.rows() != mid || op.cols() != mid || state.size() != product_of(dims)) {
        throw PreconditionError("apply_on_slot: dimension mismatch");
    }
    const Eigen::Index left = product_of(dims.subspan(0, slot));
    const Eigen::Index right = product_of(dims.subspan(slot + 1));
    using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Vector out(state.size());
    for (Eigen::Index l = 0; l < left; ++l) {
        Eigen::Map<const RowMajor> in(state.data() + l * mid * right, mid, right);
        Eigen::Map<RowMajor> dst(out.data() + l * mid * right, mid, right);
        dst.noalias() = op * in;
    }
    return out;
}

/// U^{⊗n} v without forming the Kronecker power.
inline Vector apply_tensor_power(const Matrix &u, const Vector &v, int n) {
    std::vector<Eigen::Index> dims(static_cast<std::size_t>(n), u.rows());
    Vector out = v;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        out = apply_on_slot(u, out, dims, s);
    }
    return out;
}

}  // namespace mdisc
