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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mdisc/qubit_schemes.hpp"
#include "mdisc/simulator.hpp"
#include "test_util.hpp"

namespace mdisc {
namespace {

using testing::Gen;
constexpr double kPi = std::numbers::pi;

// Independent oracle: diag(|xi><xi| U^{⊗n}) from the dense Kronecker power.
Vector dense_diagonal(const Vector &xi, double theta, int n) {
    const Matrix big = kron_power(QubitPair::from_theta(theta).correlation(), n);
    return (outer(xi) * big).diagonal();
}

bool even(std::uint64_t i) { return std::popcount(i) % 2 == 0; }

TEST(QubitSchemes, GnIsNormalizedWithAlternatingSigns) {
    for (int n = 2; n <= 6; ++n) {
        const Vector g = build_gn(n);
        EXPECT_NEAR(g.norm(), 1.0, 1e-14);
        for (std::uint64_t i = 0; i < (1u << n); ++i) {
            if (!even(i)) {
                EXPECT_EQ(g(i), Complex(0.0));
                continue;
            }
            const double sign = (std::popcount(i) / 2) % 2 == 0 ? 1.0 : -1.0;
            EXPECT_NEAR(g(i).real(), sign / std::sqrt(std::pow(2.0, n - 1)), 1e-14);
        }
    }
}

TEST(QubitSchemes, GnDiagonalMatchesDenseOracle) {
    for (int n = 2; n <= 6; ++n) {
        for (double theta : {0.2, 0.9, 1.7, 2.6}) {
            const Vector diag = dense_diagonal(build_gn(n), theta, n);
            const double closed = std::cos(n * theta / 2) / std::pow(2.0, n - 1);
            EXPECT_NEAR(gn_diagonal(QubitPair::from_theta(theta), n), closed, 1e-14);
            for (std::uint64_t i = 0; i < (1u << n); ++i) {
                EXPECT_NEAR(std::abs(diag(i) - Complex(even(i) ? closed : 0.0)), 0.0, 1e-12);
            }
        }
    }
}

TEST(QubitSchemes, GnNullifiesAtOddMultiplesOfPiOverN) {
    for (int n = 2; n <= 6; ++n) {
        for (int k = 0; 2 * k + 1 < n; ++k) {
            const auto pair = QubitPair::from_theta((2 * k + 1) * kPi / n);
            EXPECT_TRUE(check_simple_state(build_gn(n), pair, n).nullified) << "n=" << n << " k=" << k;
        }
        EXPECT_FALSE(check_simple_state(build_gn(n), QubitPair::from_theta(0.37), n).nullified);
    }
}

TEST(QubitSchemes, SigmaZVersusSigmaXUsesTwoCopies) {
    const auto pair = QubitPair::from_theta(kPi / 2);
    const auto cf = closed_form_simple_probe(pair, 6);
    ASSERT_TRUE(cf.has_value());
    EXPECT_EQ(cf->first, 2);
    EXPECT_LT((cf->second - build_gn(2)).norm(), 1e-15);
    const Scheme s = build_simple_scheme(pair, 2, cf->second);
    EXPECT_DOUBLE_EQ(exact_accuracy(s, Hypothesis::M), 1.0);
    EXPECT_DOUBLE_EQ(exact_accuracy(s, Hypothesis::N), 1.0);
}

TEST(QubitSchemes, WSchemeIsSingularAndPerfect) {
    for (int n = 3; n <= 5; ++n) {
        const auto [theta, scheme] = build_w_scheme(n);
        EXPECT_NEAR(std::pow(std::sin(theta / 2), 2), 1.0 / n, 1e-15);
        const auto pair = QubitPair::from_theta(theta);
        EXPECT_LT(smallest_singular(principal_submatrix(pair, n, weight_one_indices(n))), 1e-10);
        const Vector diag = dense_diagonal(w_state(n), theta, n);
        EXPECT_LT(diag.cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(exact_accuracy(Scheme(scheme), Hypothesis::M), 1.0, 1e-12);
        EXPECT_NEAR(exact_accuracy(Scheme(scheme), Hypothesis::N), 1.0, 1e-12);
        // Exactly one "-1" outcome happens only under S.
        for (auto str : scheme.support_m) {
            EXPECT_EQ(std::popcount(str), 1);
        }
    }
}

TEST(QubitSchemes, SearchResultNullifiesDenseDiagonal) {
    Gen g(31);
    int found = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = testing::uniform_int(1, 3, g);
        // Mix special angles with random ones.
        double theta = testing::uniform_real(0.1, 3.0, g);
        if (trial % 3 == 0) {
            theta = 2 * std::asin(1 / std::sqrt(static_cast<double>(n + 1)));
        } else if (trial % 3 == 1) {
            theta = kPi / n;
        }
        const auto pair = QubitPair::from_theta(theta);
        const auto subset = search_simple_submatrix(pair, n, 1 << n);
        if (!subset) {
            continue;
        }
        ++found;
        const Vector xi = simple_state_from_subset(pair, n, *subset);
        EXPECT_LT(dense_diagonal(xi, theta, n).cwiseAbs().maxCoeff(), 1e-8) << "theta=" << theta << " n=" << n;
    }
    EXPECT_GT(found, 10);
}

TEST(QubitSchemes, NoSimpleSchemeForGenericSingleUse) {
    EXPECT_FALSE(search_simple_submatrix(QubitPair::from_theta(1.0), 1, 2).has_value());
    EXPECT_TRUE(search_simple_submatrix(QubitPair::from_theta(kPi), 1, 2).has_value());
}

TEST(QubitSchemes, OptimalUseCount) {
    EXPECT_EQ(mm_optimal_uses(0.7), 5);
    EXPECT_EQ(mm_optimal_uses(1.0), 4);
    EXPECT_EQ(mm_optimal_uses(2.0), 2);
    EXPECT_EQ(mm_optimal_uses(kPi / 3), 3);  // exact multiple, guarded against round-off
}

class MMOptimal : public ::testing::TestWithParam<double> {};

TEST_P(MMOptimal, MixtureNullifiesAndSchemeIsPerfect) {
    const double theta = GetParam();
    const auto pair = QubitPair::from_theta(theta);
    const int n = mm_optimal_uses(theta);
    const auto fam = build_gn_family(pair, n);
    double total = 0.0;
    for (double w : fam.weights) {
        EXPECT_GE(w, 0.0);
        total += w;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    const Matrix rho = fam.density();
    const Matrix big = kron_power(pair.correlation(), n);
    EXPECT_LT((rho * big).diagonal().cwiseAbs().maxCoeff(), 1e-10);

    const MMScheme s = build_mm_optimal(pair);
    EXPECT_EQ(s.uses, n);
    EXPECT_NEAR(exact_accuracy(Scheme(s), Hypothesis::M), 1.0, 1e-10);
    EXPECT_NEAR(exact_accuracy(Scheme(s), Hypothesis::N), 1.0, 1e-10);
    EXPECT_FALSE(certify_lower_bound(theta, n - 1));
    EXPECT_TRUE(certify_lower_bound(theta, n));
}

INSTANTIATE_TEST_SUITE_P(Angles, MMOptimal, ::testing::Values(0.7, 1.0, 1.3, 2.0, 2.8));

TEST(QubitSchemes, LowerBoundIsMonotone) {
    Gen g(32);
    for (int trial = 0; trial < 50; ++trial) {
        const double theta = testing::uniform_real(0.3, 3.1, g);
        const int n = mm_optimal_uses(theta);
        for (int m = 1; m < n; ++m) {
            EXPECT_FALSE(certify_lower_bound(theta, m)) << theta << " " << m;
        }
        EXPECT_TRUE(certify_lower_bound(theta, n)) << theta;
        EXPECT_TRUE(certify_lower_bound(theta, n + 1)) << theta;
    }
}

TEST(QubitSchemes, PhysicalFrameSchemesArePerfect) {
    Gen g(33);
    for (int trial = 0; trial < 10; ++trial) {
        const double theta = testing::uniform_real(0.8, 3.0, g);
        auto [s, t] = qubit_observables(theta, testing::uniform_real(-3.0, 3.0, g));
        const Matrix r = testing::haar_unitary(2, g);
        s.basis = r * s.basis;
        t.basis = r * t.basis;
        t.basis.col(1) *= std::polar(1.0, 0.7);
        const Scheme mm = build_mm_optimal(s, t);
        EXPECT_NEAR(exact_accuracy(mm, Hypothesis::M), 1.0, 1e-9);
        EXPECT_NEAR(exact_accuracy(mm, Hypothesis::N), 1.0, 1e-9);
    }
    auto [s, t] = qubit_observables(kPi / 2, 0.4);
    const Matrix r = testing::haar_unitary(2, g);
    s.basis = r * s.basis;
    t.basis = r * t.basis;
    const Scheme simple = build_simple_scheme(s, t, 2, build_gn(2));
    EXPECT_NEAR(exact_accuracy(simple, Hypothesis::M), 1.0, 1e-12);
    EXPECT_NEAR(exact_accuracy(simple, Hypothesis::N), 1.0, 1e-12);
}

TEST(QubitSchemes, FinalUnitaryMapsOntoSeparatedTargets) {
    Gen g(34);
    for (int trial = 0; trial < 30; ++trial) {
        const auto pair = QubitPair::from_theta(testing::uniform_real(0.2, 3.0, g));
        const Eigen::Index anc = testing::uniform_int(2, 4, g);
        const Eigen::Index dim = 2 * anc;
        const Vector s = testing::random_unit(dim, g);
        Vector perp = testing::random_unit(dim, g);
        perp -= s.dot(perp) * s;
        perp /= perp.norm();
        const Complex c = std::polar(testing::uniform_real(0.0, pair.b, g), testing::uniform_real(-3.0, 3.0, g));
        const Vector t = c * s + std::sqrt(1 - std::norm(c)) * perp;
        const Matrix v = build_final_unitary(s, t, pair);
        EXPECT_LT(unitary_deviation(v), 1e-10);
        // V s has no |1> component; V t has no |psi_0> component.
        Vector psi0(2);
        psi0 << pair.a, pair.b;
        const Eigen::Index dims[] = {2, anc};
        EXPECT_LT(apply_on_slot(outer(basis_vector(2, 1)), v * s, dims, 0).norm(), 1e-10);
        EXPECT_LT(apply_on_slot(outer(psi0), v * t, dims, 0).norm(), 1e-10);
    }
    const auto pair = QubitPair::from_theta(1.0);
    EXPECT_THROW(build_final_unitary(basis_vector(4, 0), basis_vector(4, 0), pair), PreconditionError);
}

TEST(QubitSchemes, PreconditionsAreEnforced) {
    EXPECT_THROW(build_mm_optimal(QubitPair::from_theta(0.0)), PreconditionError);
    EXPECT_THROW(build_mm_optimal(QubitPair::from_theta(0.1)), PreconditionError);  // needs 32 uses
    EXPECT_THROW(search_simple_submatrix(QubitPair::from_theta(1.0), 9, 3), PreconditionError);
    EXPECT_THROW(build_simple_scheme(QubitPair::from_theta(1.0), 2, build_gn(2)), PreconditionError);
}

}  // namespace
}  // namespace mdisc
