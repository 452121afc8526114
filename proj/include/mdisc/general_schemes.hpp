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

// Identification of arbitrary projective measurements: separation unitaries,
// the M-U-M scheme, and the reductions used when its preconditions fail
// (unequal ranks, overlaps too large or dimensions too small, intersecting
// ranges).

#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "mdisc/apparatus.hpp"
#include "mdisc/numkit.hpp"
#include "mdisc/schemes.hpp"

namespace mdisc {

/// Largest dimension for which lifted (tensor power) apparatus are built.
inline constexpr Eigen::Index kMaxLiftedDim = 128;  // one d^L x d^L unitary per outcome tuple

inline const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

/// Witness data for U P* U^dagger = P and U Q* U^dagger ⊥ Q.
///
/// In the basis {phi_i} of range(P) completed by {xi_i} to a basis of
/// span(P, Q), the eigenvectors of Q are psi_j = sum_i a_ij phi_i + b_ij xi_i.
/// `v` is the block <xi_i|U|xi_j*>.
struct SeparationCertificate {
    Matrix p;
    Matrix q;
    int rank = 0;
    Matrix a;
    Matrix b;
    Matrix v;
    Matrix u;
    double pq_norm = 0.0;
};

inline SeparationCertificate separation_unitary(const Matrix &p, const Matrix &q, const Tolerances &tol = {}) {
    const Eigen::Index d = p.rows();
    if (q.rows() != d || p.cols() != d || q.cols() != d) {
        throw PreconditionError("separation_unitary: dimension mismatch");
    }
    const int r = projector_rank(p);
    if (projector_rank(q) != r) {
        throw PreconditionError("separation_unitary: rank mismatch (" + std::to_string(r) + " vs " +
                                std::to_string(projector_rank(q)) + ")");
    }
    SeparationCertificate cert;
    cert.p = p;
    cert.q = q;
    cert.rank = r;
    cert.pq_norm = operator_norm(p * q);
    if (cert.pq_norm > kInvSqrt2 + tol.norm) {
        throw PreconditionError("separation_unitary: norm bound violated, ||PQ|| = " +
                                std::to_string(cert.pq_norm) + " > 1/sqrt(2)");
    }
    if (d < 3 * r) {
        throw PreconditionError("separation_unitary: dimension bound violated, d = " + std::to_string(d) +
                                " < 3r = " + std::to_string(3 * r));
    }
    if (r == 0) {
        cert.u = Matrix::Identity(d, d);
        return cert;
    }
    const Matrix phi = range_basis(p);
    const Matrix psi = range_basis(q);
    const Matrix xi = orthonormalize((Matrix::Identity(d, d) - p) * psi);
    if (xi.cols() != r) {
        throw PreconditionError("separation_unitary: ranges of P and Q intersect");
    }
    cert.a = phi.adjoint() * psi;
    cert.b = xi.adjoint() * psi;
    if (smallest_singular(cert.b) < tol.sing) {
        throw PreconditionError("separation_unitary: complement block is numerically singular");
    }
    const Matrix b_adj_inv = cert.b.adjoint().inverse();
    const Matrix b_conj_inv = cert.b.conjugate().inverse();
    cert.v = -b_adj_inv * cert.a.adjoint() * cert.a.conjugate() * b_conj_inv;

    // Output basis omega = (phi, xi, completion); input basis is omega*.
    Matrix head(d, 2 * r);
    head << phi, xi;
    const Matrix omega = orthonormal_completion(head);
    Matrix x = Matrix::Zero(d, d);
    x.topLeftCorner(r, r).setIdentity();
    x.bottomRightCorner(d - r, d - r) = unitary_dilation(cert.v, d - r, tol);
    cert.u = omega * x * omega.transpose();
    return cert;
}

/// Maximally entangled state sum_i |ii> / sqrt(d).
inline Vector maximally_entangled(Eigen::Index d) {
    Vector out = Vector::Zero(d * d);
    for (Eigen::Index i = 0; i < d; ++i) {
        out(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
    }
    return out;
}

/// Reasons the separation-unitary preconditions fail for one outcome, or an
/// empty string.
inline std::string mum_obstruction(const Matrix &p, const Matrix &q, const Tolerances &tol = {}) {
    const int r = projector_rank(p);
    if (projector_rank(q) != r) {
        return "rank mismatch";
    }
    if (operator_norm(p * q) > kInvSqrt2 + tol.norm) {
        return "norm bound";
    }
    if (p.rows() < 3 * r) {
        return "dimension bound";
    }
    return {};
}

inline MUMScheme build_mum(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n,
                           const Tolerances &tol = {}) {
    require_valid(m, tol);
    require_valid(n, tol);
    MUMScheme s;
    s.apparatus = make_hypotheses(m, n);
    s.dim = m.dim;
    s.probe = maximally_entangled(m.dim);
    for (std::size_t k = 0; k < m.size(); ++k) {
        const Matrix &p = s.apparatus.m.outcomes[k].projector;
        const Matrix &q = s.apparatus.n.outcomes[k].projector;
        if (auto why = mum_obstruction(p, q, tol); !why.empty()) {
            throw PreconditionError("build_mum: outcome '" + m.outcomes[k].label + "' violates the " + why);
        }
        s.unitaries.push_back(separation_unitary(p, q, tol).u);
    }
    return s;
}

/// Exact probability that the second measurement repeats the first.
inline double mum_repeat_probability(const MUMScheme &s, Hypothesis truth) {
    const auto &app = s.apparatus[truth];
    double total = 0.0;
    for (std::size_t k = 0; k < app.size(); ++k) {
        const Matrix &r = app.outcomes[k].projector;
        const Matrix op = kron(r, r * s.unitaries[k]);
        total += (op * s.probe).squaredNorm();
    }
    return total;
}

/// Unit vector in range(P) orthogonal to range(Q); needs rank(P) > rank(Q).
inline Vector rank_mismatch_probe(const Matrix &p, const Matrix &q, const Tolerances &tol = {}) {
    if (projector_rank(p) <= projector_rank(q)) {
        throw PreconditionError("rank_mismatch_probe: rank(P) must exceed rank(Q)");
    }
    const Matrix id = Matrix::Identity(p.rows(), p.cols());
    auto eig = hermitian_eigen(p * (id - q) * p);
    const Eigen::Index top = p.rows() - 1;
    if (eig.eigenvalues()(top) < 1.0 - tol.eig) {
        throw PreconditionError("rank_mismatch_probe: no vector of P is orthogonal to Q");
    }
    return eig.eigenvectors().col(top);
}

struct LiftResult {
    int copies = 1;
    ProjectiveMeasurement m;
    ProjectiveMeasurement n;
};

/// Smallest L with (max_m ||P_m Q_m||)^L <= 1/sqrt(2) and d^L >= 3 (max_m r_m)^L,
/// which bounds every outcome tuple of M^{⊗L} and N^{⊗L}.
inline int minimal_lift(double max_overlap, Eigen::Index d, int max_rank, const Tolerances &tol = {}) {
    for (int copies = 1;; ++copies) {
        const double overlap = std::pow(max_overlap, copies);
        const double dims = std::pow(static_cast<double>(d), copies);
        if (dims > static_cast<double>(kMaxLiftedDim)) {
            throw PreconditionError("lift_tensor_power: lifted dimension exceeds " + std::to_string(kMaxLiftedDim));
        }
        if (overlap <= kInvSqrt2 + tol.norm && dims >= 3.0 * std::pow(static_cast<double>(max_rank), copies)) {
            return copies;
        }
    }
}

inline LiftResult lift_tensor_power(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n,
                                    const Tolerances &tol = {}) {
    const auto hyp = make_hypotheses(m, n);
    double max_overlap = 0.0;
    int max_rank = 0;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const Matrix &p = hyp.m.outcomes[k].projector;
        const Matrix &q = hyp.n.outcomes[k].projector;
        if (projector_rank(p) != projector_rank(q)) {
            throw PreconditionError("lift_tensor_power: outcome '" + m.outcomes[k].label + "' has unequal ranks");
        }
        const double overlap = operator_norm(p * q);
        if (overlap >= 1.0 - tol.overlap_one) {
            throw PreconditionError("lift_tensor_power: outcome '" + m.outcomes[k].label +
                                    "' has intersecting ranges; no finite lift exists");
        }
        max_overlap = std::max(max_overlap, overlap);
        max_rank = std::max(max_rank, projector_rank(p));
    }
    if (max_rank >= m.dim) {
        throw PreconditionError("lift_tensor_power: a full-rank outcome leaves no room to lift");
    }
    LiftResult out;
    out.copies = minimal_lift(max_overlap, m.dim, max_rank, tol);
    out.m = tensor_power(hyp.m, out.copies);
    out.n = tensor_power(hyp.n, out.copies);
    return out;
}

/// Data of the intersection-dropping reduction. The reduced measurements act
/// on range(restriction) in the coordinates given by `isometry`.
struct ReductionData {
    std::vector<Matrix> meets;  // C_m, indexed like the original outcomes
    Matrix restriction;         // R = I - sum_m C_m
    Matrix isometry;            // d x d_R, orthonormal basis of range(R)
    ProjectiveMeasurement reduced_m;
    ProjectiveMeasurement reduced_n;
    std::vector<std::string> dropped_labels;
};

inline ReductionData degenerate_reduce(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n,
                                       const Tolerances &tol = {}) {
    const auto hyp = make_hypotheses(m, n);
    ReductionData out;
    const Eigen::Index d = m.dim;
    out.restriction = Matrix::Identity(d, d);
    for (std::size_t k = 0; k < m.size(); ++k) {
        out.meets.push_back(subspace_meet(hyp.m.outcomes[k].projector, hyp.n.outcomes[k].projector, tol));
        out.restriction -= out.meets.back();
    }
    out.isometry = range_basis(out.restriction);
    const Eigen::Index dr = out.isometry.cols();
    if (dr == 0) {
        throw PreconditionError("degenerate_reduce: measurements are identical");
    }
    const Matrix &w = out.isometry;
    out.reduced_m.dim = dr;
    out.reduced_n.dim = dr;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const Matrix pr = w.adjoint() * (hyp.m.outcomes[k].projector - out.meets[k]) * w;
        const Matrix qr = w.adjoint() * (hyp.n.outcomes[k].projector - out.meets[k]) * w;
        const int rp = projector_rank(pr);
        const int rq = projector_rank(qr);
        if (rp == 0 && rq == 0) {
            out.dropped_labels.push_back(hyp.m.outcomes[k].label);
            continue;
        }
        if (rp == 0 || rq == 0) {
            throw PreconditionError("degenerate_reduce: outcome '" + hyp.m.outcomes[k].label +
                                    "' vanishes on one side only; use the rank-mismatch path");
        }
        out.reduced_m.outcomes.push_back({hyp.m.outcomes[k].label, 0.5 * (pr + pr.adjoint())});
        out.reduced_n.outcomes.push_back({hyp.n.outcomes[k].label, 0.5 * (qr + qr.adjoint())});
    }
    return out;
}

/// Single use: prepare `state`, measure, and decide `if_observed` when the
/// outcome is `label` (the other hypothesis otherwise).
struct OrthogonalProbe {
    Vector state;
    std::string label;
    Hypothesis if_observed = Hypothesis::M;
    SimpleScheme scheme;
};

struct DirectMum {
    MUMScheme scheme;
};

struct LiftedMum {
    int copies = 1;
    MUMScheme scheme;
};

/// Reduction followed by an M-U-M plan on the reduced pair. `scheme` is the
/// inner scheme embedded back into the original space and run against the
/// original apparatus.
struct ReducedThenPlan {
    ReductionData reduction;
    std::variant<DirectMum, LiftedMum> inner;
    MUMScheme scheme;
};

using GeneralPlan = std::variant<OrthogonalProbe, DirectMum, LiftedMum, ReducedThenPlan>;

inline std::string_view plan_kind(const GeneralPlan &p) {
    static constexpr std::string_view names[] = {"orthogonal-probe", "direct-mum", "lifted-mum",
                                                 "reduced-then-plan"};
    return names[p.index()];
}

inline Scheme executable(const GeneralPlan &plan) {
    return std::visit([](const auto &p) -> Scheme { return p.scheme; }, plan);
}

namespace detail {

inline bool mum_ready(const Hypotheses &hyp, const Tolerances &tol) {
    for (std::size_t k = 0; k < hyp.m.size(); ++k) {
        if (!mum_obstruction(hyp.m.outcomes[k].projector, hyp.n.outcomes[k].projector, tol).empty()) {
            return false;
        }
    }
    return true;
}

inline std::variant<DirectMum, LiftedMum> mum_plan(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n,
                                                   const Tolerances &tol) {
    if (mum_ready(make_hypotheses(m, n), tol)) {
        return DirectMum{build_mum(m, n, tol)};
    }
    auto lifted = lift_tensor_power(m, n, tol);
    MUMScheme s = build_mum(lifted.m, lifted.n, tol);
    s.copies = lifted.copies;
    return LiftedMum{lifted.copies, std::move(s)};
}

/// Embeds a scheme built on range(R) (in isometry coordinates) into the
/// original space and points it at the original apparatus.
inline MUMScheme embed_reduced(const MUMScheme &inner, const Matrix &isometry, const Hypotheses &original) {
    const int copies = inner.copies;
    const Matrix e = kron_power(isometry, copies);
    MUMScheme out;
    out.copies = copies;
    out.apparatus = copies == 1 ? original
                                : Hypotheses{tensor_power(original.m, copies), tensor_power(original.n, copies)};
    out.dim = out.apparatus.m.dim;
    out.probe = kron(e, e) * inner.probe;
    const Matrix outside = Matrix::Identity(out.dim, out.dim) - e * e.adjoint();
    for (const auto &o : out.apparatus.m.outcomes) {
        auto idx = inner.apparatus.m.index_of(o.label);
        if (idx) {
            out.unitaries.push_back(e * inner.unitaries[*idx] * e.adjoint() + outside);
        } else {
            out.unitaries.push_back(Matrix::Identity(out.dim, out.dim));
        }
    }
    return out;
}

}  // namespace detail

/// Chooses and builds an identification plan for two different projective
/// measurements with identical label sets.
inline GeneralPlan plan_general(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n,
                                const Tolerances &tol = {}) {
    require_valid(m, tol);
    require_valid(n, tol);
    const auto hyp = make_hypotheses(m, n);
    if (identical(hyp.m, hyp.n, tol)) {
        throw PreconditionError("plan_general: measurements are identical; no identification exists");
    }
    for (std::size_t k = 0; k < hyp.m.size(); ++k) {
        const Matrix &p = hyp.m.outcomes[k].projector;
        const Matrix &q = hyp.n.outcomes[k].projector;
        const int rp = projector_rank(p);
        const int rq = projector_rank(q);
        if (rp == rq) {
            continue;
        }
        OrthogonalProbe probe;
        probe.label = hyp.m.outcomes[k].label;
        probe.if_observed = rp > rq ? Hypothesis::M : Hypothesis::N;
        probe.state = rp > rq ? rank_mismatch_probe(p, q, tol) : rank_mismatch_probe(q, p, tol);
        probe.scheme = make_simple_scheme(probe.state, 1, hyp, tol);
        return probe;
    }
    for (std::size_t k = 0; k < hyp.m.size(); ++k) {
        if (operator_norm(hyp.m.outcomes[k].projector * hyp.n.outcomes[k].projector) >= 1.0 - tol.overlap_one) {
            ReducedThenPlan plan;
            plan.reduction = degenerate_reduce(hyp.m, hyp.n, tol);
            plan.inner = detail::mum_plan(plan.reduction.reduced_m, plan.reduction.reduced_n, tol);
            const MUMScheme &inner = std::visit([](const auto &p) -> const MUMScheme & { return p.scheme; },
                                                plan.inner);
            plan.scheme = detail::embed_reduced(inner, plan.reduction.isometry, hyp);
            return plan;
        }
    }
    auto inner = detail::mum_plan(hyp.m, hyp.n, tol);
    return std::visit([](auto &&p) -> GeneralPlan { return std::move(p); }, std::move(inner));
}

}  // namespace mdisc
