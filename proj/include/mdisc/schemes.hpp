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

// Identification schemes and the pieces shared by their builders and the
// simulator. Every scheme carries the two candidate apparatus so it can be
// executed without any plan-time context.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "mdisc/apparatus.hpp"
#include "mdisc/numkit.hpp"

namespace mdisc {

enum class Hypothesis { M, N };

inline std::string_view to_string(Hypothesis h) { return h == Hypothesis::M ? "M" : "N"; }

inline Hypothesis other(Hypothesis h) { return h == Hypothesis::M ? Hypothesis::N : Hypothesis::M; }

/// The two candidates; `n` uses the outcome order of `m`.
struct Hypotheses {
    ProjectiveMeasurement m;
    ProjectiveMeasurement n;

    const ProjectiveMeasurement &operator[](Hypothesis h) const { return h == Hypothesis::M ? m : n; }
};

inline Hypotheses make_hypotheses(const ProjectiveMeasurement &m, const ProjectiveMeasurement &n) {
    return {m, align_labels(m, n)};
}

/// Probe measured `uses` times by the unknown apparatus; the decision depends
/// only on the outcome string. Strings are encoded in base k = outcome count,
/// slot 0 most significant.
struct SimpleScheme {
    int uses = 1;
    Vector probe;
    std::vector<std::uint64_t> support_m;  // sorted
    std::vector<std::uint64_t> support_n;  // sorted
    Hypotheses apparatus;
};

enum class BranchAction { DecideM, DecideN, Measure, Unreachable };

inline std::string_view to_string(BranchAction a) {
    switch (a) {
    case BranchAction::DecideM:
        return "M";
    case BranchAction::DecideN:
        return "N";
    case BranchAction::Measure:
        return "measure";
    case BranchAction::Unreachable:
        return "unreachable";
    }
    return "?";
}

/// Decision for one outcome string of an M-M scheme. For `Measure` the final
/// known measurement on the ancilla is {|target><target|, I - |target><target|};
/// the first outcome means M.
struct MMBranch {
    BranchAction action = BranchAction::Unreachable;
    Vector target;
};

/// Probe on (system^uses) ⊗ ancilla; after `uses` measurements the branch for
/// the observed string decides, possibly after one known ancilla measurement.
struct MMScheme {
    int uses = 1;
    Eigen::Index ancilla_dim = 1;
    Vector probe;
    std::vector<MMBranch> branches;  // indexed by outcome string
    Hypotheses apparatus;
};

/// Measure slot A, apply unitaries[m] to slot B, measure slot B. A repeated
/// outcome means M. `copies` > 1 when the apparatus is a tensor power of the
/// physical one.
struct MUMScheme {
    Eigen::Index dim = 0;
    int copies = 1;
    Vector probe;                  // on dim * dim, slot A first
    std::vector<Matrix> unitaries; // indexed like apparatus.m outcomes
    Hypotheses apparatus;
};

using Scheme = std::variant<SimpleScheme, MMScheme, MUMScheme>;

inline std::string_view scheme_kind(const Scheme &s) {
    static constexpr std::string_view names[] = {"simple", "mm", "mum"};
    return names[s.index()];
}

/// Physical uses of the unknown apparatus per identification.
inline int uses_per_trial(const Scheme &s) {
    return std::visit(
        [](const auto &x) -> int {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, MUMScheme>) {
                return 2 * x.copies;
            } else {
                return x.uses;
            }
        },
        s);
}

inline std::uint64_t integer_power(std::uint64_t base, int exp) {
    std::uint64_t out = 1;
    for (int i = 0; i < exp; ++i) {
        out *= base;
    }
    return out;
}

/// Digits of an outcome string in base k, slot 0 first.
inline std::vector<std::size_t> outcome_digits(std::uint64_t string, std::size_t k, int uses) {
    std::vector<std::size_t> out(static_cast<std::size_t>(uses));
    for (int s = uses - 1; s >= 0; --s) {
        out[static_cast<std::size_t>(s)] = static_cast<std::size_t>(string % k);
        string /= k;
    }
    return out;
}

inline std::string outcome_string_label(const ProjectiveMeasurement &m, std::uint64_t string, int uses) {
    std::string out;
    for (auto d : outcome_digits(string, m.size(), uses)) {
        if (!out.empty()) {
            out += kLabelSeparator;
        }
        out += m.outcomes[d].label;
    }
    return out;
}

namespace detail {

/// Leading (system) slots of `state`, each of dimension m.dim, followed by
/// one trailing slot holding whatever dimension remains.
inline std::vector<Eigen::Index> slot_dims(const ProjectiveMeasurement &m, int uses, Eigen::Index total) {
    std::vector<Eigen::Index> dims(static_cast<std::size_t>(uses), m.dim);
    const auto sys = static_cast<Eigen::Index>(integer_power(static_cast<std::uint64_t>(m.dim), uses));
    if (sys == 0 || total % sys != 0) {
        throw PreconditionError("state dimension is not a multiple of the measured slots");
    }
    dims.push_back(total / sys);
    return dims;
}

/// Projects the leading `uses` slots onto every outcome string and calls
/// visit(string, unnormalized_residual) for strings with nonzero weight.
template <typename Visit>
void for_each_branch(const Vector &state, const ProjectiveMeasurement &m, int uses, Visit &&visit) {
    const auto dims = slot_dims(m, uses, state.size());
    const std::size_t k = m.size();
    auto recurse = [&](auto &self, const Vector &v, int slot, std::uint64_t prefix) -> void {
        if (slot == uses) {
            visit(prefix, v);
            return;
        }
        for (std::size_t o = 0; o < k; ++o) {
            Vector next = apply_on_slot(m.outcomes[o].projector, v, dims, static_cast<std::size_t>(slot));
            if (next.squaredNorm() == 0.0) {
                continue;
            }
            self(self, next, slot + 1, prefix * k + o);
        }
    };
    recurse(recurse, state, 0, 0);
}

}  // namespace detail

/// Born probabilities of every outcome string when the leading `uses` slots of
/// `state` are measured with `m`. Length k^uses.
inline std::vector<double> outcome_distribution(const Vector &state, const ProjectiveMeasurement &m, int uses) {
    std::vector<double> out(integer_power(m.size(), uses), 0.0);
    detail::for_each_branch(state, m, uses, [&](std::uint64_t s, const Vector &v) { out[s] = v.squaredNorm(); });
    return out;
}

inline std::vector<std::uint64_t> support_of(const std::vector<double> &dist, double threshold) {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] > threshold) {
            out.push_back(i);
        }
    }
    return out;
}

inline bool contains(const std::vector<std::uint64_t> &sorted, std::uint64_t x) {
    return std::binary_search(sorted.begin(), sorted.end(), x);
}

/// Simple scheme for an arbitrary probe; supports are read off the exact
/// outcome distributions and must be disjoint.
inline SimpleScheme make_simple_scheme(const Vector &probe, int uses, Hypotheses apparatus,
                                       const Tolerances &tol = {}) {
    SimpleScheme s{uses, probe, {}, {}, std::move(apparatus)};
    const auto pm = outcome_distribution(probe, s.apparatus.m, uses);
    const auto pn = outcome_distribution(probe, s.apparatus.n, uses);
    s.support_m = support_of(pm, tol.num);
    s.support_n = support_of(pn, tol.num);
    double leak = 0.0;
    for (auto i : s.support_m) {
        leak = std::max(leak, pn[i]);
    }
    for (auto i : s.support_n) {
        leak = std::max(leak, pm[i]);
    }
    if (leak > tol.num) {
        throw PreconditionError("simple scheme: outcome supports overlap (max leaked probability " +
                                std::to_string(leak) + ")");
    }
    return s;
}

}  // namespace mdisc
