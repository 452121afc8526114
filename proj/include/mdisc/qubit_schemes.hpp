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

// Identification of single-qubit observables: the simple-scheme criteria
// (diagonal nullification and singular principal submatrices), the G_n and W
// probes, the optimal M-M scheme with ceil(pi / theta) uses and its spectral
// lower bound, and the replacement of the final known measurement by a
// unitary.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdisc/apparatus.hpp"
#include "mdisc/numkit.hpp"
#include "mdisc/schemes.hpp"

namespace mdisc {

/// Largest number of qubit uses for which dense constructions are attempted.
inline constexpr int kMaxDenseQubits = 12;
/// Default cap on n for the exhaustive principal-submatrix search.
inline constexpr int kMaxSearchQubits = 6;

struct DiagonalCheck {
    bool nullified = false;
    double max_magnitude = 0.0;
};

inline bool is_even_weight(std::uint64_t i) { return hamming_weight(i) % 2 == 0; }

inline Eigen::Index qubit_dim(int n) { return Eigen::Index{1} << n; }

/// Diagonal of |xi><xi| U^{⊗n}: entry i is xi_i (xi^dagger U^{⊗n})_i.
inline Vector simple_state_diagonal(const Vector &xi, const QubitPair &pair, int n) {
    if (xi.size() != qubit_dim(n)) {
        throw PreconditionError("state dimension does not match 2^n");
    }
    const Vector row = apply_tensor_power(pair.correlation().transpose(), xi.conjugate(), n);
    return xi.cwiseProduct(row);
}

inline DiagonalCheck check_simple_state(const Vector &xi, const QubitPair &pair, int n,
                                        const Tolerances &tol = {}) {
    if (std::abs(xi.norm() - 1.0) > tol.norm) {
        throw PreconditionError("check_simple_state: state is not normalized");
    }
    const double worst = simple_state_diagonal(xi, pair, n).cwiseAbs().maxCoeff();
    return {worst <= tol.num, worst};
}

/// Diagonal of rho U^{⊗n}.
inline Vector density_diagonal(const Matrix &rho, const QubitPair &pair, int n) {
    if (rho.rows() != qubit_dim(n) || rho.cols() != qubit_dim(n)) {
        throw PreconditionError("density matrix dimension does not match 2^n");
    }
    // (rho U)_{ii} = sum_k rho_{ik} U_{ki}; column i of U^{⊗n} is U^{⊗n} e_i,
    // so compute (U^{⊗n})^T rho^T and read its diagonal.
    const Matrix ut = pair.correlation().transpose();
    Vector out(rho.rows());
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        const Vector col = apply_tensor_power(ut, rho.row(i).transpose(), n);
        out(i) = col(i);
    }
    return out;
}

inline DiagonalCheck check_mm_density(const Matrix &rho, const QubitPair &pair, int n,
                                      const Tolerances &tol = {}) {
    if (auto why = density_violation(rho, tol); !why.empty()) {
        throw PreconditionError("check_mm_density: " + why);
    }
    const double worst = density_diagonal(rho, pair, n).cwiseAbs().maxCoeff();
    return {worst <= tol.num, worst};
}

/// |G_n> = sum_{i in E_n} (-1)^{w(i)/2} |i> / sqrt(2^{n-1}); G_0 is the scalar 1.
inline Vector build_gn(int n) {
    if (n < 0 || n > kMaxDenseQubits + 8) {
        throw PreconditionError("build_gn: unsupported n");
    }
    Vector out = Vector::Zero(qubit_dim(n));
    if (n == 0) {
        out(0) = 1.0;
        return out;
    }
    const double amp = 1.0 / std::sqrt(std::ldexp(1.0, n - 1));
    for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(out.size()); ++i) {
        const int w = hamming_weight(i);
        if (w % 2 == 0) {
            out(static_cast<Eigen::Index>(i)) = ((w / 2) % 2 == 0) ? amp : -amp;
        }
    }
    return out;
}

/// Common value of the diagonal of |G_n><G_n| U^{⊗n} on E_n.
inline double gn_diagonal(const QubitPair &pair, int n) {
    return std::cos(n * pair.theta / 2) / std::ldexp(1.0, n - 1);
}

/// Uniform superposition of the weight-one strings.
inline Vector w_state(int n) {
    Vector out = Vector::Zero(qubit_dim(n));
    for (int k = 0; k < n; ++k) {
        out(Eigen::Index{1} << k) = 1.0 / std::sqrt(static_cast<double>(n));
    }
    return out;
}

inline std::vector<std::uint64_t> weight_one_indices(int n) {
    std::vector<std::uint64_t> out;
    for (int k = n - 1; k >= 0; --k) {
        out.push_back(std::uint64_t{1} << k);
    }
    return out;
}

inline std::vector<std::uint64_t> even_weight_indices(int n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
        if (is_even_weight(i)) {
            out.push_back(i);
        }
    }
    return out;
}

/// U^{⊗n} restricted to rows and columns in `indices`.
inline Matrix principal_submatrix(const QubitPair &pair, int n, const std::vector<std::uint64_t> &indices) {
    const auto k = static_cast<Eigen::Index>(indices.size());
    Matrix out(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) {
            out(r, c) = u_tensor_entry(pair, n, indices[static_cast<std::size_t>(r)],
                                       indices[static_cast<std::size_t>(c)]);
        }
    }
    return out;
}

/// Singular when the smallest singular value is below tol.sing times the norm
/// of the full tensor power (which is 1).
inline bool is_singular_submatrix(const QubitPair &pair, int n, const std::vector<std::uint64_t> &indices,
                                  const Tolerances &tol = {}) {
    return !indices.empty() && smallest_singular(principal_submatrix(pair, n, indices)) < tol.sing;
}

/// Looks for an index set whose principal submatrix of U^{⊗n} is singular.
/// W_n and E_n are tried first, then all subsets by increasing size and in
/// lexicographic order up to `max_subset` elements.
inline std::optional<std::vector<std::uint64_t>> search_simple_submatrix(const QubitPair &pair, int n,
                                                                         int max_subset,
                                                                         const Tolerances &tol = {},
                                                                         int n_max = kMaxSearchQubits) {
    if (n < 1 || n > n_max) {
        throw PreconditionError("search_simple_submatrix: n must be in [1, " + std::to_string(n_max) + "]");
    }
    for (auto candidate : {weight_one_indices(n), even_weight_indices(n)}) {
        if (is_singular_submatrix(pair, n, candidate, tol)) {
            std::sort(candidate.begin(), candidate.end());
            return candidate;
        }
    }
    const int total = 1 << n;
    const int cap = std::min(max_subset, total);
    std::vector<std::uint64_t> subset;
    for (int size = 1; size <= cap; ++size) {
        // Lexicographic enumeration of size-element combinations.
        std::vector<int> idx(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) {
            idx[static_cast<std::size_t>(i)] = i;
        }
        while (true) {
            subset.assign(idx.begin(), idx.end());
            if (is_singular_submatrix(pair, n, subset, tol)) {
                return subset;
            }
            int pos = size - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == total - size + pos) {
                --pos;
            }
            if (pos < 0) {
                break;
            }
            ++idx[static_cast<std::size_t>(pos)];
            for (int j = pos + 1; j < size; ++j) {
                idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
            }
        }
    }
    return std::nullopt;
}

/// Probe supported on `indices` built from the kernel of the singular
/// submatrix A: xi restricted to the set is the left singular vector of the
/// smallest singular value, so A^dagger xi = 0.
inline Vector simple_state_from_subset(const QubitPair &pair, int n, const std::vector<std::uint64_t> &indices) {
    const Matrix a = principal_submatrix(pair, n, indices);
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
    const Vector kernel = svd.matrixU().col(a.cols() - 1);
    Vector xi = Vector::Zero(qubit_dim(n));
    for (std::size_t k = 0; k < indices.size(); ++k) {
        xi(static_cast<Eigen::Index>(indices[k])) = kernel(static_cast<Eigen::Index>(k));
    }
    return xi / xi.norm();
}

namespace detail {

inline Hypotheses canonical_hypotheses(const QubitPair &pair) {
    auto [s, t] = canonical_observables(pair);
    return {s.to_projective(), t.to_projective()};
}

inline Hypotheses physical_hypotheses(const VonNeumannMeasurement &s, const VonNeumannMeasurement &t) {
    return make_hypotheses(s.to_projective(), t.to_projective());
}

/// Maps a canonical-frame probe on (2^n) * anc dims into the physical frame.
inline Vector to_physical(const Vector &probe, const QubitFrame &frame, int n) {
    std::vector<Eigen::Index> dims(static_cast<std::size_t>(n), 2);
    dims.push_back(probe.size() / qubit_dim(n));
    Vector out = probe;
    for (std::size_t s = 0; s < static_cast<std::size_t>(n); ++s) {
        out = apply_on_slot(frame.m_basis, out, dims, s);
    }
    return out;
}

}  // namespace detail

/// Simple scheme with probe xi against the canonical pair (S = sigma_z).
/// The decision is "M" exactly when the outcome string lies in support_m.
inline SimpleScheme build_simple_scheme(const QubitPair &pair, int n, const Vector &xi,
                                        const Tolerances &tol = {}) {
    if (!check_simple_state(xi, pair, n, tol).nullified) {
        throw PreconditionError("build_simple_scheme: state does not nullify the diagonal");
    }
    return make_simple_scheme(xi, n, detail::canonical_hypotheses(pair), tol);
}

/// Same scheme for physical observables; the probe is U_M^{⊗n} xi where xi is
/// given in the canonical frame of (S, T).
inline SimpleScheme build_simple_scheme(const VonNeumannMeasurement &s, const VonNeumannMeasurement &t, int n,
                                        const Vector &xi, const Tolerances &tol = {}) {
    const auto frame = detail::qubit_frame(s, t, tol);
    if (!check_simple_state(xi, frame.pair, n, tol).nullified) {
        throw PreconditionError("build_simple_scheme: state does not nullify the diagonal");
    }
    return make_simple_scheme(detail::to_physical(xi, frame, n), n, detail::physical_hypotheses(s, t), tol);
}

/// W-state scheme: sin^2(theta/2) = 1/n and exactly one "-1" outcome means S.
inline std::pair<double, SimpleScheme> build_w_scheme(int n, const Tolerances &tol = {}) {
    if (n < 2 || n > kMaxDenseQubits) {
        throw PreconditionError("build_w_scheme: n must be in [2, " + std::to_string(kMaxDenseQubits) + "]");
    }
    const double theta = 2.0 * std::asin(1.0 / std::sqrt(static_cast<double>(n)));
    const auto pair = QubitPair::from_theta(theta);
    return {theta, build_simple_scheme(pair, n, w_state(n), tol)};
}

/// Closed-form simple probes: theta = pi (n = 1), theta = (2k+1) pi / n with
/// G_n, and sin^2(theta/2) = 1/n with the W state. Returns the smallest n.
inline std::optional<std::pair<int, Vector>> closed_form_simple_probe(const QubitPair &pair, int n_max,
                                                                      const Tolerances &tol = {}) {
    for (int n = 1; n <= n_max; ++n) {
        if (n == 1) {
            if (pair.a <= tol.num) {
                return std::make_pair(1, basis_vector(2, 0));
            }
            continue;
        }
        const Vector g = build_gn(n);
        if (check_simple_state(g, pair, n, tol).nullified) {
            return std::make_pair(n, g);
        }
        const Vector w = w_state(n);
        if (check_simple_state(w, pair, n, tol).nullified) {
            return std::make_pair(n, w);
        }
    }
    return std::nullopt;
}

/// G_n together with the suffix-partition states G_n^i and the mixture
/// weights that make diag(rho U^{⊗n}) vanish. weights[0] belongs to G_n and
/// weights[i] to G_n^i.
struct GnFamily {
    int n = 0;
    Vector gn;
    std::vector<Vector> parts;
    std::vector<double> weights;

    /// Suffix of G_n^i: "0" for i = 1, otherwise 1 0^{i-2} 1.
    static std::uint64_t suffix(int i) {
        return i == 1 ? 0 : ((std::uint64_t{1} << (i - 1)) | 1);
    }

    /// Index set E_n^i: even-weight strings of length n ending in suffix(i).
    std::vector<std::uint64_t> block(int i) const {
        std::vector<std::uint64_t> out;
        const std::uint64_t tail = suffix(i);
        for (std::uint64_t p = 0; p < (std::uint64_t{1} << (n - i)); ++p) {
            if (is_even_weight(p)) {
                out.push_back((p << i) | tail);
            }
        }
        return out;
    }

    std::vector<Vector> states() const {
        std::vector<Vector> out{gn};
        out.insert(out.end(), parts.begin(), parts.end());
        return out;
    }

    Matrix density() const {
        Matrix rho = Matrix::Zero(gn.size(), gn.size());
        const auto all = states();
        for (std::size_t k = 0; k < all.size(); ++k) {
            rho += weights[k] * outer(all[k]);
        }
        return rho;
    }
};

/// ceil(pi / theta) with a guard against round-off at exact multiples.
inline int mm_optimal_uses(double theta) {
    return static_cast<int>(std::ceil(std::numbers::pi / theta - 1e-9));
}

inline GnFamily build_gn_family(const QubitPair &pair, int n, const Tolerances &tol = {}) {
    if (n < 2 || n > kMaxDenseQubits) {
        throw PreconditionError("build_gn_family: n must be in [2, " + std::to_string(kMaxDenseQubits) + "]");
    }
    GnFamily fam;
    fam.n = n;
    fam.gn = build_gn(n);
    for (int i = 1; i <= n; ++i) {
        const Vector tail = basis_vector(qubit_dim(i), static_cast<Eigen::Index>(GnFamily::suffix(i)));
        fam.parts.push_back(kron(build_gn(n - i), tail));
    }
    // One equation per block E_n^i (the diagonal is constant on each block)
    // plus normalization; unknowns are the n + 1 weights.
    const auto all = fam.states();
    const auto count = static_cast<Eigen::Index>(all.size());
    std::vector<Vector> diags;
    for (const auto &s : all) {
        diags.push_back(simple_state_diagonal(s, pair, n));
    }
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(count, count);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(count);
    for (int i = 1; i <= n; ++i) {
        const auto rep = static_cast<Eigen::Index>(fam.block(i).front());
        for (Eigen::Index k = 0; k < count; ++k) {
            system(i - 1, k) = diags[static_cast<std::size_t>(k)](rep).real();
        }
    }
    system.row(count - 1).setOnes();
    rhs(count - 1) = 1.0;
    const Eigen::VectorXd w = system.colPivHouseholderQr().solve(rhs);
    double total = 0.0;
    for (Eigen::Index k = 0; k < count; ++k) {
        if (w(k) < -tol.num) {
            throw PreconditionError("build_gn_family: no nonnegative mixture exists at n = " + std::to_string(n));
        }
        fam.weights.push_back(std::max(w(k), 0.0));
        total += fam.weights.back();
    }
    for (auto &x : fam.weights) {
        x /= total;
    }
    return fam;
}

namespace detail {

/// Purification of rho = sum_k w_k |s_k><s_k| computed from the thin factor
/// X = [sqrt(w_k) s_k] without forming rho: the SVD X = W S V^dagger gives the
/// eigenvectors of rho, and the ancilla dimension is its rank.
inline Vector purify_mixture(const std::vector<Vector> &states, const std::vector<double> &weights,
                             const Tolerances &tol) {
    const Eigen::Index d = states.front().size();
    Matrix x(d, static_cast<Eigen::Index>(states.size()));
    for (std::size_t k = 0; k < states.size(); ++k) {
        x.col(static_cast<Eigen::Index>(k)) = std::sqrt(weights[k]) * states[k];
    }
    Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
    Eigen::Index rank = 0;
    while (rank < svd.singularValues().size() &&
           svd.singularValues()(rank) * svd.singularValues()(rank) > tol.num) {
        ++rank;
    }
    Vector out = Vector::Zero(d * rank);
    for (Eigen::Index k = 0; k < rank; ++k) {
        const Vector e = svd.matrixU().col(k);
        for (Eigen::Index i = 0; i < d; ++i) {
            out(i * rank + k) = svd.singularValues()(k) * e(i);
        }
    }
    return out / out.norm();
}

/// Decision table for a canonical-frame probe on 2^n * anc dims: residual
/// ancilla states under each hypothesis for every outcome string.
inline std::vector<MMBranch> mm_branches(const Vector &probe, const QubitPair &pair, int n, Eigen::Index anc,
                                         const Tolerances &tol) {
    const Eigen::Index sys = qubit_dim(n);
    // Row i of `hat` is the residual under M for string i; rows of `tilde`
    // are residuals under N, obtained by applying (U^dagger)^{⊗n} on the
    // system factor.
    using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor hat = Eigen::Map<const RowMajor>(probe.data(), sys, anc);
    RowMajor tilde(sys, anc);
    const Matrix udag = pair.correlation().adjoint();
    for (Eigen::Index k = 0; k < anc; ++k) {
        tilde.col(k) = apply_tensor_power(udag, hat.col(k), n);
    }
    std::vector<MMBranch> out(static_cast<std::size_t>(sys));
    for (Eigen::Index i = 0; i < sys; ++i) {
        const Vector h = hat.row(i).transpose();
        const Vector t = tilde.row(i).transpose();
        const bool hm = h.squaredNorm() > tol.num;
        const bool hn = t.squaredNorm() > tol.num;
        auto &br = out[static_cast<std::size_t>(i)];
        if (hm && hn) {
            const double overlap = std::abs(t.dot(h));
            if (overlap > tol.norm) {
                throw PreconditionError("M-M scheme: residual ancilla states for string " + std::to_string(i) +
                                        " overlap by " + std::to_string(overlap));
            }
            br.action = BranchAction::Measure;
            br.target = h / h.norm();
        } else if (hm) {
            br.action = BranchAction::DecideM;
        } else if (hn) {
            br.action = BranchAction::DecideN;
        }
    }
    return out;
}

}  // namespace detail

/// M-M scheme from any zero-diagonal mixture over canonical-frame states.
inline MMScheme build_mm_scheme(const QubitPair &pair, int n, const std::vector<Vector> &states,
                                const std::vector<double> &weights, const Tolerances &tol = {}) {
    MMScheme s;
    s.uses = n;
    s.probe = detail::purify_mixture(states, weights, tol);
    s.ancilla_dim = s.probe.size() / qubit_dim(n);
    s.branches = detail::mm_branches(s.probe, pair, n, s.ancilla_dim, tol);
    s.apparatus = detail::canonical_hypotheses(pair);
    return s;
}

/// Optimal M-M scheme for the canonical pair: n = ceil(pi / theta) uses.
inline MMScheme build_mm_optimal(const QubitPair &pair, const Tolerances &tol = {}) {
    if (!(pair.theta > 0.0) || !(pair.theta < std::numbers::pi)) {
        throw PreconditionError("build_mm_optimal: theta must lie in (0, pi)");
    }
    const int n = mm_optimal_uses(pair.theta);
    if (n > kMaxDenseQubits) {
        throw PreconditionError("build_mm_optimal: theta = " + std::to_string(pair.theta) + " needs " +
                                std::to_string(n) + " uses, above the dense limit of " +
                                std::to_string(kMaxDenseQubits));
    }
    const auto fam = build_gn_family(pair, n, tol);
    return build_mm_scheme(pair, n, fam.states(), fam.weights, tol);
}

/// Optimal M-M scheme for physical observables S and T.
inline MMScheme build_mm_optimal(const VonNeumannMeasurement &s, const VonNeumannMeasurement &t,
                                 const Tolerances &tol = {}) {
    const auto frame = detail::qubit_frame(s, t, tol);
    MMScheme out = build_mm_optimal(frame.pair, tol);
    out.probe = detail::to_physical(out.probe, frame, out.uses);
    out.apparatus = detail::physical_hypotheses(s, t);
    return out;
}

/// Whether a zero-diagonal rho can exist at n uses: the eigenphases of
/// (U sigma_z)^{⊗n} must surround the origin, i.e. no gap between
/// consecutive phases on the circle exceeds pi.
inline bool certify_lower_bound(double theta, int n, const Tolerances &tol = {}) {
    if (!(theta > 0.0) || !(theta < std::numbers::pi)) {
        throw PreconditionError("certify_lower_bound: theta must lie in (0, pi)");
    }
    if (n < 1) {
        return false;
    }
    const auto pair = QubitPair::from_theta(theta);
    Matrix sz(2, 2);
    sz << 1.0, 0.0, 0.0, -1.0;
    Eigen::ComplexEigenSolver<Matrix> es(pair.correlation() * sz);
    std::vector<double> base;
    for (Eigen::Index k = 0; k < 2; ++k) {
        base.push_back(std::arg(es.eigenvalues()(k)));
    }
    // Eigenphases of the n-fold tensor power: sums of n single-copy phases.
    std::vector<double> phases;
    for (int k = 0; k <= n; ++k) {
        double p = k * base[0] + (n - k) * base[1];
        p = std::remainder(p, 2 * std::numbers::pi);
        phases.push_back(p);
    }
    std::sort(phases.begin(), phases.end());
    double gap = phases.front() + 2 * std::numbers::pi - phases.back();
    for (std::size_t i = 1; i < phases.size(); ++i) {
        gap = std::max(gap, phases[i] - phases[i - 1]);
    }
    return gap <= std::numbers::pi + tol.angle;
}

/// Unitary V on qubit ⊗ ancilla with V xi_S = |0> ⊗ (.) and V xi_T = |psi_1> ⊗ (.)
/// for the canonical pair, where |psi_1> = b|0> - a|1>. Requires
/// |<xi_S|xi_T>| <= b; the ancilla must have at least two dimensions unless
/// the overlap saturates the bound.
inline Matrix build_final_unitary(const Vector &xi_s, const Vector &xi_t, const QubitPair &pair,
                                  const Tolerances &tol = {}) {
    const Eigen::Index dim = xi_s.size();
    if (xi_t.size() != dim || dim % 2 != 0 || dim == 0) {
        throw PreconditionError("build_final_unitary: states must share an even dimension");
    }
    if (xi_s.norm() == 0.0 || xi_t.norm() == 0.0) {
        throw PreconditionError("build_final_unitary: zero state");
    }
    const Vector s = xi_s / xi_s.norm();
    const Vector t = xi_t / xi_t.norm();
    const Complex c = s.dot(t);
    if (std::abs(c) > pair.b + tol.norm) {
        throw PreconditionError("build_final_unitary: overlap " + std::to_string(std::abs(c)) +
                                " exceeds sin(theta/2) = " + std::to_string(pair.b));
    }
    const Eigen::Index anc = dim / 2;
    Complex gamma = c / pair.b;
    if (std::abs(gamma) > 1.0) {
        gamma /= std::abs(gamma);
    }
    const double rest = std::sqrt(std::max(0.0, 1.0 - std::norm(gamma)));
    if (anc < 2 && rest > tol.norm) {
        throw PreconditionError("build_final_unitary: a one-dimensional ancilla cannot realize the overlap");
    }
    Vector anc_s = basis_vector(anc, 0);
    Vector anc_t = gamma * basis_vector(anc, 0);
    if (anc >= 2) {
        anc_t(1) = rest;
    }
    Vector zero(2), psi1(2);
    zero << 1.0, 0.0;
    psi1 << pair.b, -pair.a;
    const Vector target_s = kron(zero, anc_s);
    const Vector target_t = kron(psi1, anc_t);

    // Matching Gram-Schmidt frames of the sources and targets.
    auto frame = [&](const Vector &first, const Vector &second) {
        Vector perp = second - c * first;
        Matrix cols(dim, perp.norm() > 1e-12 ? 2 : 1);
        cols.col(0) = first;
        if (cols.cols() == 2) {
            cols.col(1) = perp / perp.norm();
        }
        return cols;
    };
    const Matrix src = frame(s, t);
    const Matrix dst = frame(target_s, target_t);
    if (src.cols() != dst.cols()) {
        throw PreconditionError("build_final_unitary: source and target Gram matrices differ");
    }
    return orthonormal_completion(dst) * orthonormal_completion(src).adjoint();
}

}  // namespace mdisc
