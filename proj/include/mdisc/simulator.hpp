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

// Seeded Born-rule execution of identification schemes, plus exact branch
// enumeration for cross-checking sampled runs.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "mdisc/errors.hpp"
#include "mdisc/numkit.hpp"
#include "mdisc/schemes.hpp"

namespace mdisc {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// mt19937_64 with a platform-independent conversion to [0, 1).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  private:
    std::mt19937_64 engine_;
};

/// Independent stream for one trial, keyed by (seed, truth, trial).
inline Rng trial_stream(std::uint64_t seed, Hypothesis truth, std::uint64_t trial) {
    std::uint64_t key = mix64(seed);
    key = mix64(key ^ (truth == Hypothesis::M ? 0x4dULL : 0x4eULL));
    key = mix64(key ^ trial);
    return Rng(key);
}

struct Sample {
    std::size_t outcome = 0;
    Vector post;
};

namespace detail {

/// Samples an outcome from unnormalized branch weights; weights at or below
/// `zero` are never chosen.
inline std::size_t pick(const std::vector<double> &weights, double zero, Rng &rng) {
    double total = 0.0;
    for (double w : weights) {
        total += w > zero ? w : 0.0;
    }
    if (total <= 0.0) {
        throw SimulationError("all outcome probabilities vanish");
    }
    double u = rng.uniform() * total;
    std::size_t last = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= zero) {
            continue;
        }
        last = i;
        if (u < weights[i]) {
            return i;
        }
        u -= weights[i];
    }
    return last;
}

}  // namespace detail

/// Measures the tensor slot `slot` of `state` with `m`.
inline Sample measure_slot(const Vector &state, std::span<const Eigen::Index> dims, std::size_t slot,
                           const ProjectiveMeasurement &m, Rng &rng, const Tolerances &tol = {}) {
    std::vector<Vector> branches;
    std::vector<double> weights;
    for (const auto &o : m.outcomes) {
        branches.push_back(apply_on_slot(o.projector, state, dims, slot));
        weights.push_back(branches.back().squaredNorm());
    }
    const std::size_t k = detail::pick(weights, tol.num, rng);
    return {k, branches[k] / std::sqrt(weights[k])};
}

/// Measures the whole state with `m`.
inline Sample born_sample(const Vector &state, const ProjectiveMeasurement &m, Rng &rng, const Tolerances &tol = {}) {
    if (state.size() != m.dim) {
        throw PreconditionError("born_sample: dimension mismatch");
    }
    if (std::abs(state.norm() - 1.0) > tol.norm) {
        throw PreconditionError("born_sample: state is not normalized");
    }
    const Eigen::Index dims[] = {m.dim};
    return measure_slot(state, dims, 0, m, rng, tol);
}

struct TranscriptStep {
    std::string operation;
    std::optional<std::string> outcome;
};

struct Transcript {
    Hypothesis truth = Hypothesis::M;
    std::vector<TranscriptStep> steps;
    std::vector<std::size_t> record;  // outcome indices, in step order
    Hypothesis decision = Hypothesis::M;
    bool correct = false;
};

namespace detail {

inline Transcript run_simple(const SimpleScheme &s, Hypothesis truth, Rng &rng, const Tolerances &tol) {
    Transcript t{truth, {}, {}, truth, false};
    const auto &app = s.apparatus[truth];
    const auto dims = slot_dims(app, s.uses, s.probe.size());
    Vector state = s.probe;
    std::uint64_t string = 0;
    for (int slot = 0; slot < s.uses; ++slot) {
        auto r = measure_slot(state, dims, static_cast<std::size_t>(slot), app, rng, tol);
        state = std::move(r.post);
        string = string * app.size() + r.outcome;
        t.record.push_back(r.outcome);
        t.steps.push_back({"measure slot " + std::to_string(slot) + " with unknown apparatus",
                           app.outcomes[r.outcome].label});
    }
    if (contains(s.support_m, string)) {
        t.decision = Hypothesis::M;
    } else if (contains(s.support_n, string)) {
        t.decision = Hypothesis::N;
    } else {
        throw SimulationError("outcome string " + outcome_string_label(app, string, s.uses) +
                              " lies outside both supports");
    }
    return t;
}

inline Transcript run_mm(const MMScheme &s, Hypothesis truth, Rng &rng, const Tolerances &tol) {
    Transcript t{truth, {}, {}, truth, false};
    const auto &app = s.apparatus[truth];
    const auto dims = slot_dims(app, s.uses, s.probe.size());
    Vector state = s.probe;
    std::uint64_t string = 0;
    for (int slot = 0; slot < s.uses; ++slot) {
        auto r = measure_slot(state, dims, static_cast<std::size_t>(slot), app, rng, tol);
        state = std::move(r.post);
        string = string * app.size() + r.outcome;
        t.record.push_back(r.outcome);
        t.steps.push_back({"measure slot " + std::to_string(slot) + " with unknown apparatus",
                           app.outcomes[r.outcome].label});
    }
    const auto &branch = s.branches.at(string);
    switch (branch.action) {
    case BranchAction::DecideM:
        t.decision = Hypothesis::M;
        break;
    case BranchAction::DecideN:
        t.decision = Hypothesis::N;
        break;
    case BranchAction::Measure: {
        const Matrix pi = outer(branch.target);
        const ProjectiveMeasurement known{s.ancilla_dim,
                                          {{"target", pi}, {"rest", Matrix::Identity(s.ancilla_dim, s.ancilla_dim) - pi}}};
        auto r = measure_slot(state, dims, dims.size() - 1, known, rng, tol);
        t.record.push_back(r.outcome);
        t.steps.push_back({"measure ancilla with known residual discriminator", known.outcomes[r.outcome].label});
        t.decision = r.outcome == 0 ? Hypothesis::M : Hypothesis::N;
        break;
    }
    case BranchAction::Unreachable:
        throw SimulationError("outcome string " + outcome_string_label(app, string, s.uses) +
                              " is unreachable under both hypotheses");
    }
    return t;
}

inline Transcript run_mum(const MUMScheme &s, Hypothesis truth, Rng &rng, const Tolerances &tol) {
    Transcript t{truth, {}, {}, truth, false};
    const auto &app = s.apparatus[truth];
    const Eigen::Index dims[] = {s.dim, s.dim};
    auto first = measure_slot(s.probe, dims, 0, app, rng, tol);
    t.record.push_back(first.outcome);
    t.steps.push_back({"measure slot A with unknown apparatus", app.outcomes[first.outcome].label});
    const Vector rotated = apply_on_slot(s.unitaries.at(first.outcome), first.post, dims, 1);
    t.steps.push_back({"apply separation unitary for outcome " + app.outcomes[first.outcome].label + " to slot B",
                       std::nullopt});
    auto second = measure_slot(rotated, dims, 1, app, rng, tol);
    t.record.push_back(second.outcome);
    t.steps.push_back({"measure slot B with unknown apparatus", app.outcomes[second.outcome].label});
    t.decision = second.outcome == first.outcome ? Hypothesis::M : Hypothesis::N;
    return t;
}

}  // namespace detail

/// Executes one identification against the secret apparatus `truth`.
inline Transcript run_scheme(const Scheme &scheme, Hypothesis truth, Rng &rng, const Tolerances &tol = {}) {
    Transcript t = std::visit(
        [&](const auto &s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, SimpleScheme>) {
                return detail::run_simple(s, truth, rng, tol);
            } else if constexpr (std::is_same_v<T, MMScheme>) {
                return detail::run_mm(s, truth, rng, tol);
            } else {
                return detail::run_mum(s, truth, rng, tol);
            }
        },
        scheme);
    t.correct = t.decision == truth;
    return t;
}

struct RunStats {
    std::uint64_t trials = 0;
    double accuracy_given_m = 0.0;
    double accuracy_given_n = 0.0;
    std::uint64_t seed = 0;
    int uses_per_trial = 0;

    bool operator==(const RunStats &) const = default;
};

/// Runs `trials` identifications under each hypothesis. Trial i under truth h
/// draws from trial_stream(seed, h, i), so results do not depend on `workers`.
inline RunStats evaluate(const Scheme &scheme, std::uint64_t trials, std::uint64_t seed,
                         const Tolerances &tol = {}, unsigned workers = 1) {
    if (trials < 1) {
        throw PreconditionError("evaluate: trials must be at least 1");
    }
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(trials)));
    RunStats stats{trials, 0.0, 0.0, seed, uses_per_trial(scheme)};
    for (Hypothesis truth : {Hypothesis::M, Hypothesis::N}) {
        std::vector<std::uint64_t> correct(workers, 0);
        std::vector<std::string> failure(workers);
        auto work = [&](unsigned w) {
            for (std::uint64_t i = w; i < trials; i += workers) {
                Rng rng = trial_stream(seed, truth, i);
                try {
                    if (run_scheme(scheme, truth, rng, tol).correct) {
                        ++correct[w];
                    }
                } catch (const SimulationError &e) {
                    failure[w] = "trial " + std::to_string(i) + " (truth " + std::string(to_string(truth)) +
                                 "): " + e.what();
                    return;
                }
            }
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < workers; ++w) {
                pool.emplace_back(work, w);
            }
        }
        for (const auto &f : failure) {
            if (!f.empty()) {
                throw SimulationError(f);
            }
        }
        std::uint64_t total = 0;
        for (auto c : correct) {
            total += c;
        }
        const double acc = static_cast<double>(total) / static_cast<double>(trials);
        (truth == Hypothesis::M ? stats.accuracy_given_m : stats.accuracy_given_n) = acc;
    }
    return stats;
}

/// One leaf of the exact outcome tree: the full record of outcome indices,
/// its probability, and the decision the scheme takes there (absent when the
/// scheme has no rule for it).
struct ExactBranch {
    std::vector<std::size_t> record;
    double probability = 0.0;
    std::optional<Hypothesis> decision;
};

/// Enumerates every outcome record with nonzero probability under `truth`.
inline std::vector<ExactBranch> exact_branches(const Scheme &scheme, Hypothesis truth) {
    std::vector<ExactBranch> out;
    if (const auto *s = std::get_if<SimpleScheme>(&scheme)) {
        const auto &app = s->apparatus[truth];
        detail::for_each_branch(s->probe, app, s->uses, [&](std::uint64_t string, const Vector &v) {
            ExactBranch b{outcome_digits(string, app.size(), s->uses), v.squaredNorm(), std::nullopt};
            if (contains(s->support_m, string)) {
                b.decision = Hypothesis::M;
            } else if (contains(s->support_n, string)) {
                b.decision = Hypothesis::N;
            }
            out.push_back(std::move(b));
        });
    } else if (const auto *s = std::get_if<MMScheme>(&scheme)) {
        const auto &app = s->apparatus[truth];
        const auto dims = detail::slot_dims(app, s->uses, s->probe.size());
        detail::for_each_branch(s->probe, app, s->uses, [&](std::uint64_t string, const Vector &v) {
            const auto digits = outcome_digits(string, app.size(), s->uses);
            const auto &br = s->branches[string];
            if (br.action == BranchAction::Measure) {
                const Matrix pi = outer(br.target);
                const Matrix rest = Matrix::Identity(s->ancilla_dim, s->ancilla_dim) - pi;
                for (std::size_t o = 0; o < 2; ++o) {
                    const Vector w = apply_on_slot(o == 0 ? pi : rest, v, dims, dims.size() - 1);
                    auto record = digits;
                    record.push_back(o);
                    out.push_back({record, w.squaredNorm(), o == 0 ? Hypothesis::M : Hypothesis::N});
                }
                return;
            }
            ExactBranch b{digits, v.squaredNorm(), std::nullopt};
            if (br.action == BranchAction::DecideM) {
                b.decision = Hypothesis::M;
            } else if (br.action == BranchAction::DecideN) {
                b.decision = Hypothesis::N;
            }
            out.push_back(std::move(b));
        });
    } else {
        const auto &u = std::get<MUMScheme>(scheme);
        const auto &app = u.apparatus[truth];
        const Eigen::Index dims[] = {u.dim, u.dim};
        for (std::size_t a = 0; a < app.size(); ++a) {
            const Vector first = apply_on_slot(app.outcomes[a].projector, u.probe, dims, 0);
            if (first.squaredNorm() == 0.0) {
                continue;
            }
            const Vector rotated = apply_on_slot(u.unitaries[a], first, dims, 1);
            for (std::size_t b = 0; b < app.size(); ++b) {
                const double p = apply_on_slot(app.outcomes[b].projector, rotated, dims, 1).squaredNorm();
                out.push_back({{a, b}, p, a == b ? Hypothesis::M : Hypothesis::N});
            }
        }
    }
    return out;
}

/// Exact probability of deciding correctly under `truth`.
inline double exact_accuracy(const Scheme &scheme, Hypothesis truth) {
    double total = 0.0;
    for (const auto &b : exact_branches(scheme, truth)) {
        if (b.decision == truth) {
            total += b.probability;
        }
    }
    return total;
}

}  // namespace mdisc
