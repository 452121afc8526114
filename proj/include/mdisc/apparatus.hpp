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

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mdisc/errors.hpp"
#include "mdisc/numkit.hpp"
#include "mdisc/tolerances.hpp"

namespace mdisc {

/// Separator used when outcome labels of product measurements are joined.
inline constexpr char kLabelSeparator = ',';

struct Outcome {
    std::string label;
    Matrix projector;
};

/// Outcome-labelled complete family of orthogonal projectors on `dim` dims.
struct ProjectiveMeasurement {
    Eigen::Index dim = 0;
    std::vector<Outcome> outcomes;

    std::size_t size() const { return outcomes.size(); }

    std::optional<std::size_t> index_of(const std::string &label) const {
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            if (outcomes[i].label == label) {
                return i;
            }
        }
        return std::nullopt;
    }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto &o : outcomes) {
            out.push_back(o.label);
        }
        return out;
    }

    int rank(std::size_t i) const { return projector_rank(outcomes[i].projector); }
};

struct Violation {
    std::string kind;    // e.g. "not-idempotent", "incomplete"
    std::string detail;  // which outcome(s)
    double deviation = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }

    bool has(const std::string &kind) const {
        for (const auto &v : violations) {
            if (v.kind == kind) {
                return true;
            }
        }
        return false;
    }

    std::string summary() const {
        std::ostringstream os;
        for (const auto &v : violations) {
            os << v.kind;
            if (!v.detail.empty()) {
                os << " (" << v.detail << ")";
            }
            os << ": max deviation " << v.deviation << "\n";
        }
        return os.str();
    }
};

inline ValidationReport validate(const ProjectiveMeasurement &m, const Tolerances &tol = {}) {
    ValidationReport report;
    auto flag = [&](std::string kind, std::string detail, double dev) {
        report.violations.push_back({std::move(kind), std::move(detail), dev});
    };
    if (m.outcomes.empty()) {
        flag("empty", "no outcomes", 0.0);
        return report;
    }
    for (const auto &o : m.outcomes) {
        if (o.projector.rows() != m.dim || o.projector.cols() != m.dim) {
            flag("dimension", o.label, 0.0);
        }
    }
    if (!report.ok()) {
        return report;
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            if (m.outcomes[i].label == m.outcomes[j].label) {
                flag("duplicate-label", m.outcomes[i].label, 0.0);
            }
        }
    }
    Matrix total = Matrix::Zero(m.dim, m.dim);
    for (const auto &o : m.outcomes) {
        const Matrix &p = o.projector;
        if (double dev = hermitian_deviation(p); dev > tol.proj) {
            flag("not-hermitian", o.label, dev);
        }
        if (double dev = max_abs(p * p - p); dev > tol.proj) {
            flag("not-idempotent", o.label, dev);
        }
        total += p;
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            const double dev = max_abs(m.outcomes[i].projector * m.outcomes[j].projector);
            if (dev > tol.proj) {
                flag("non-orthogonal", m.outcomes[i].label + "/" + m.outcomes[j].label, dev);
            }
        }
    }
    if (double dev = max_abs(total - Matrix::Identity(m.dim, m.dim)); dev > tol.proj) {
        flag("incomplete", "sum of projectors differs from identity", dev);
    }
    return report;
}

inline void require_valid(const ProjectiveMeasurement &m, const Tolerances &tol = {}) {
    auto report = validate(m, tol);
    if (!report.ok()) {
        throw ValidationError("invalid projective measurement:\n" + report.summary());
    }
}

/// Returns `n` with its outcomes reordered to follow the labels of `m`.
/// Label sets must be identical; correspondences are never inferred.
inline ProjectiveMeasurement align_labels(const ProjectiveMeasurement &m,
                                          const ProjectiveMeasurement &n) {
    if (m.dim != n.dim) {
        throw PreconditionError("measurements act on different dimensions");
    }
    if (m.size() != n.size()) {
        throw PreconditionError("measurements have different outcome label sets");
    }
    ProjectiveMeasurement out{n.dim, {}};
    for (const auto &o : m.outcomes) {
        auto idx = n.index_of(o.label);
        if (!idx) {
            throw PreconditionError("outcome label '" + o.label + "' missing from second measurement");
        }
        out.outcomes.push_back(n.outcomes[*idx]);
    }
    return out;
}

/// Product measurement M^{⊗L}; labels are the component labels joined by
/// kLabelSeparator, ordered lexicographically by outcome index.
inline ProjectiveMeasurement tensor_power(const ProjectiveMeasurement &m, int copies) {
    if (copies < 1) {
        throw PreconditionError("tensor_power: copies must be at least 1");
    }
    ProjectiveMeasurement out = m;
    for (int c = 1; c < copies; ++c) {
        ProjectiveMeasurement next{out.dim * m.dim, {}};
        for (const auto &a : out.outcomes) {
            for (const auto &b : m.outcomes) {
                next.outcomes.push_back({a.label + kLabelSeparator + b.label, kron(a.projector, b.projector)});
            }
        }
        out = std::move(next);
    }
    return out;
}

inline bool identical(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n,
                      const Tolerances &tol = {}) {
    auto aligned = align_labels(m, n);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (max_abs(m.outcomes[i].projector - aligned.outcomes[i].projector) > tol.proj) {
            return false;
        }
    }
    return true;
}

/// Nondegenerate observable given by an ordered orthonormal eigenbasis.
struct VonNeumannMeasurement {
    std::vector<std::string> labels;
    Matrix basis;  // column m is |phi_m>

    Eigen::Index dim() const { return basis.rows(); }

    Vector vector(std::size_t m) const { return basis.col(static_cast<Eigen::Index>(m)); }

    ProjectiveMeasurement to_projective() const {
        ProjectiveMeasurement out{dim(), {}};
        for (std::size_t m = 0; m < labels.size(); ++m) {
            out.outcomes.push_back({labels[m], outer(vector(m))});
        }
        return out;
    }
};

inline ValidationReport validate(const VonNeumannMeasurement &m, const Tolerances &tol = {}) {
    ValidationReport report;
    if (static_cast<Eigen::Index>(m.labels.size()) != m.basis.cols() || m.basis.cols() != m.basis.rows()) {
        report.violations.push_back({"dimension", "basis must be square with one label per vector", 0.0});
        return report;
    }
    if (double dev = unitary_deviation(m.basis); dev > tol.proj) {
        report.violations.push_back({"non-orthonormal", "eigenvectors", dev});
    }
    return report;
}

/// Recovers the eigenbasis of a measurement whose projectors all have rank 1.
inline std::optional<VonNeumannMeasurement> as_von_neumann(const ProjectiveMeasurement &m) {
    if (static_cast<Eigen::Index>(m.size()) != m.dim) {
        return std::nullopt;
    }
    VonNeumannMeasurement out{{}, Matrix(m.dim, m.dim)};
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Matrix &p = m.outcomes[i].projector;
        if (projector_rank(p) != 1) {
            return std::nullopt;
        }
        auto eig = hermitian_eigen(p);
        Vector v = eig.eigenvectors().col(m.dim - 1);
        // Fix the phase so the largest component is real and positive.
        Eigen::Index k = 0;
        v.cwiseAbs().maxCoeff(&k);
        v *= std::polar(1.0, -std::arg(v(k)));
        out.labels.push_back(m.outcomes[i].label);
        out.basis.col(static_cast<Eigen::Index>(i)) = v;
    }
    return out;
}

inline bool is_qubit_von_neumann(const ProjectiveMeasurement &m) {
    return m.dim == 2 && m.size() == 2 && as_von_neumann(m).has_value();
}

struct CorrelationUnitary {
    Matrix u;  // u(i, j) = <phi_i | psi_j>
    std::vector<std::string> labels;
};

/// U = U_M^dagger U_N, with N's eigenvectors taken in M's label order.
inline CorrelationUnitary correlation_unitary(const VonNeumannMeasurement &m,
                                              const VonNeumannMeasurement &n,
                                              const Tolerances &tol = {}) {
    if (m.dim() != n.dim()) {
        throw PreconditionError("correlation_unitary: dimension mismatch");
    }
    for (const auto *x : {&m, &n}) {
        if (auto r = validate(*x, tol); !r.ok()) {
            throw ValidationError("correlation_unitary: " + r.summary());
        }
    }
    Matrix aligned(n.dim(), n.dim());
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        auto it = std::find(n.labels.begin(), n.labels.end(), m.labels[i]);
        if (it == n.labels.end()) {
            throw PreconditionError("correlation_unitary: label '" + m.labels[i] + "' missing");
        }
        aligned.col(static_cast<Eigen::Index>(i)) =
            n.basis.col(static_cast<Eigen::Index>(it - n.labels.begin()));
    }
    return {m.basis.adjoint() * aligned, m.labels};
}

/// Qubit observable pair reduced to its Bloch angle.
struct QubitPair {
    double theta = 0.0;
    double phi = 0.0;  // provenance only; canonical constructions use phi = 0
    double a = 1.0;    // cos(theta / 2)
    double b = 0.0;    // sin(theta / 2)

    static QubitPair from_theta(double theta, double phi = 0.0) {
        return {theta, phi, std::cos(theta / 2), std::sin(theta / 2)};
    }

    /// Canonical correlation unitary [[a, b], [b, -a]].
    Matrix correlation() const {
        Matrix u(2, 2);
        u << a, b, b, -a;
        return u;
    }
};

namespace detail {

/// Canonical frame of a physical qubit pair: the M eigenvectors rephased so
/// their overlaps with (rephased) N eigenvectors equal the canonical
/// correlation unitary of `pair`.
struct QubitFrame {
    QubitPair pair;
    Matrix m_basis;  // columns |phi'_0>, |phi'_1>
};

inline QubitFrame qubit_frame(const VonNeumannMeasurement &s, const VonNeumannMeasurement &t,
                              const Tolerances &tol) {
    if (s.dim() != 2 || t.dim() != 2) {
        throw PreconditionError("canonicalize_qubit_pair: observables must act on a qubit");
    }
    const Matrix u = correlation_unitary(s, t, tol).u;
    const double overlap = std::min(1.0, std::abs(u(0, 0)));
    const double theta = 2.0 * std::acos(overlap);
    if (theta < tol.angle) {
        throw PreconditionError("canonicalize_qubit_pair: observables are identical");
    }
    auto arg_or = [](Complex z, double fallback) { return std::abs(z) > 1e-14 ? std::arg(z) : fallback; };
    // Phases chosen so that e^{-i alpha_i} u_ij e^{i beta_j} = [[a, b], [b, -a]].
    const double beta0 = -arg_or(u(0, 0), 0.0);
    const double beta1 = -arg_or(u(0, 1), 0.0);
    const double alpha1 = std::abs(u(1, 0)) > 1e-14 ? std::arg(u(1, 0)) + beta0
                                                    : std::arg(-u(1, 1)) + beta1;
    QubitFrame frame;
    const double phi = std::abs(u(1, 0)) > 1e-14 && std::abs(u(0, 0)) > 1e-14
                           ? std::remainder(std::arg(u(1, 0)) - std::arg(u(0, 0)), 2 * std::numbers::pi)
                           : 0.0;
    frame.pair = QubitPair::from_theta(theta, phi);
    frame.m_basis = s.basis;
    frame.m_basis.col(1) *= std::polar(1.0, alpha1);
    return frame;
}

}  // namespace detail

/// Reduces (S, T) to the Bloch angle between their eigenbases. Outcome labels
/// are matched by name and never re-paired, so theta ranges over (0, pi].
inline QubitPair canonicalize_qubit_pair(const VonNeumannMeasurement &s, const VonNeumannMeasurement &t,
                                         const Tolerances &tol = {}) {
    return detail::qubit_frame(s, t, tol).pair;
}

/// S = sigma_z and T with |psi_0> = cos(theta/2)|0> + sin(theta/2) e^{i phi}|1>.
/// Labels are "+1" and "-1".
inline std::pair<VonNeumannMeasurement, VonNeumannMeasurement> qubit_observables(double theta,
                                                                                 double phi = 0.0) {
    const double a = std::cos(theta / 2);
    const double b = std::sin(theta / 2);
    const Complex e = std::polar(1.0, phi);
    VonNeumannMeasurement s{{"+1", "-1"}, Matrix::Identity(2, 2)};
    VonNeumannMeasurement t{{"+1", "-1"}, Matrix(2, 2)};
    t.basis << a, b, b * e, -a * e;
    return {s, t};
}

inline std::pair<VonNeumannMeasurement, VonNeumannMeasurement> canonical_observables(const QubitPair &pair) {
    return qubit_observables(pair.theta, 0.0);
}

inline int hamming_weight(std::uint64_t i) { return std::popcount(i); }

inline int hamming_distance(std::uint64_t i, std::uint64_t j) { return std::popcount(i ^ j); }

/// Entry (i, j) of U^{⊗n} for the canonical pair:
/// (-1)^{w(i & j)} a^{n - d(i,j)} b^{d(i,j)}.
inline double u_tensor_entry(const QubitPair &pair, int n, std::uint64_t i, std::uint64_t j) {
    if (n < 0 || n > 62) {
        throw PreconditionError("u_tensor_entry: unsupported n");
    }
    const std::uint64_t limit = std::uint64_t{1} << n;
    if (i >= limit || j >= limit) {
        throw PreconditionError("u_tensor_entry: index out of range");
    }
    const int d = hamming_distance(i, j);
    const double sign = (hamming_weight(i & j) % 2 == 0) ? 1.0 : -1.0;
    return sign * std::pow(pair.a, n - d) * std::pow(pair.b, d);
}

}  // namespace mdisc
