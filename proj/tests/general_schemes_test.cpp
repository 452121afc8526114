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

#include <numbers>

#include "mdisc/general_schemes.hpp"
#include "mdisc/simulator.hpp"
#include "pair_gen.hpp"

namespace mdisc {
namespace {

using testing::Gen;

void expect_separation(const Matrix &u, const Matrix &p, const Matrix &q, double tol) {
    EXPECT_LT(unitary_deviation(u), tol);
    EXPECT_LT(max_abs(u * p.conjugate() * u.adjoint() - p), tol);
    EXPECT_LT(std::abs((q * u * q.conjugate() * u.adjoint()).trace()), tol);
}

TEST(GeneralSchemes, SeparationUnitaryOnRandomPairs) {
    Gen g(41);
    for (int trial = 0; trial < 60; ++trial) {
        const Eigen::Index r = testing::uniform_int(1, 2, g);
        const Eigen::Index d = 3 * r + testing::uniform_int(0, 2, g);
        const double overlap = testing::uniform_real(0.0, std::numbers::sqrt2 / 2, g);
        const auto [p, q] = testing::separated_projectors(d, r, overlap, g);
        const auto cert = separation_unitary(p, q);
        EXPECT_NEAR(cert.pq_norm, overlap, 1e-9);
        expect_separation(cert.u, p, q, 1e-9);
        const double s = cert.pq_norm * cert.pq_norm;
        EXPECT_LE(operator_norm(cert.v), s / (1 - s) + 1e-9);
    }
}

TEST(GeneralSchemes, SeparationUnitaryForOrthogonalRanges) {
    Gen g(42);
    const auto [p, q] = testing::separated_projectors(3, 1, 0.0, g);
    expect_separation(separation_unitary(p, q).u, p, q, 1e-10);
}

TEST(GeneralSchemes, MumObstructions) {
    Gen g(43);
    const auto [p, q] = testing::separated_projectors(3, 1, 0.9, g);
    EXPECT_EQ(mum_obstruction(p, q), "norm bound");
    const auto [p2, q2] = testing::separated_projectors(2, 1, 0.5, g);
    EXPECT_EQ(mum_obstruction(p2, q2), "dimension bound");
    EXPECT_EQ(mum_obstruction(p, Matrix::Identity(3, 3) - p), "rank mismatch");
}

ProjectiveMeasurement qutrit_basis(const Matrix &cols) {
    return VonNeumannMeasurement{{"1", "2", "3"}, cols}.to_projective();
}

Matrix paper_qutrit_n() {
    Matrix q(3, 3);
    const double s6 = std::sqrt(6.0), s3 = std::sqrt(3.0), s2 = std::sqrt(2.0);
    q << 1 / s6, 1 / s3, 1 / s2,
        -2 / s6, 1 / s3, 0,
        1 / s6, 1 / s3, -1 / s2;
    return q;
}

TEST(GeneralSchemes, QutritExampleRepeatProbabilities) {
    const auto m = qutrit_basis(Matrix::Identity(3, 3));
    const auto n = qutrit_basis(paper_qutrit_n());
    EXPECT_NEAR(operator_norm(m.outcomes[0].projector * n.outcomes[0].projector), 1 / std::sqrt(6.0), 1e-12);
    const MUMScheme s = build_mum(m, n);
    EXPECT_NEAR(mum_repeat_probability(s, Hypothesis::M), 1.0, 1e-10);
    EXPECT_NEAR(mum_repeat_probability(s, Hypothesis::N), 0.0, 1e-10);
    for (std::size_t k = 0; k < 3; ++k) {
        expect_separation(s.unitaries[k], m.outcomes[k].projector, n.outcomes[k].projector, 1e-10);
    }
    EXPECT_NEAR(exact_accuracy(Scheme(s), Hypothesis::M), 1.0, 1e-10);
    EXPECT_NEAR(exact_accuracy(Scheme(s), Hypothesis::N), 1.0, 1e-10);
}

TEST(GeneralSchemes, ReferenceQutritUnitaryIsAWitness) {
    Matrix u1(3, 3);
    const double r24 = std::sqrt(24.0);
    u1 << 5, 0, 0, 0, -1, r24, 0, -r24, -1;
    u1 /= 5.0;
    const auto m = qutrit_basis(Matrix::Identity(3, 3));
    const auto n = qutrit_basis(paper_qutrit_n());
    expect_separation(u1, m.outcomes[0].projector, n.outcomes[0].projector, 1e-12);
}

TEST(GeneralSchemes, RankMismatchGivesSingleUseProbe) {
    Gen g(44);
    for (int trial = 0; trial < 30; ++trial) {
        const int d = testing::uniform_int(4, 6, g);
        const auto m = testing::measurement_from(testing::haar_unitary(d, g), {d - 2, 1, 1});
        const auto n = testing::measurement_from(testing::haar_unitary(d, g), {1, d - 2, 1});
        const auto plan = plan_general(m, n);
        ASSERT_TRUE(std::holds_alternative<OrthogonalProbe>(plan));
        const auto &probe = std::get<OrthogonalProbe>(plan);
        EXPECT_EQ(probe.scheme.uses, 1);
        const Scheme s = executable(plan);
        EXPECT_NEAR(exact_accuracy(s, Hypothesis::M), 1.0, 1e-9);
        EXPECT_NEAR(exact_accuracy(s, Hypothesis::N), 1.0, 1e-9);
    }
}

TEST(GeneralSchemes, PlantedIntersectionIsReduced) {
    Gen g(45);
    int checked = 0;
    while (checked < 20) {
        const auto [m, n] = testing::planted_intersection(5, g);
        // Keep instances whose reduced pair needs at most two copies.
        bool small = true;
        for (std::size_t k = 1; k < m.size(); ++k) {
            small = small && operator_norm(m.outcomes[k].projector * n.outcomes[k].projector) < 0.8;
        }
        if (!small) {
            continue;
        }
        ++checked;
        const auto plan = plan_general(m, n);
        ASSERT_TRUE(std::holds_alternative<ReducedThenPlan>(plan));
        const auto &red = std::get<ReducedThenPlan>(plan).reduction;
        EXPECT_EQ(red.isometry.cols(), 4);
        EXPECT_EQ(projector_rank(red.meets[0]), 1);
        for (std::size_t k = 0; k < red.reduced_m.size(); ++k) {
            EXPECT_LT(operator_norm(red.reduced_m.outcomes[k].projector * red.reduced_n.outcomes[k].projector),
                      1.0 - 1e-7);
        }
        EXPECT_TRUE(validate(red.reduced_m).ok());
        EXPECT_TRUE(validate(red.reduced_n).ok());
        const Scheme s = executable(plan);
        EXPECT_NEAR(exact_accuracy(s, Hypothesis::M), 1.0, 1e-8);
        EXPECT_NEAR(exact_accuracy(s, Hypothesis::N), 1.0, 1e-8);
    }
}

TEST(GeneralSchemes, QubitPairNeedsTwoCopies) {
    VonNeumannMeasurement sz{{"+1", "-1"}, Matrix::Identity(2, 2)};
    Matrix hx(2, 2);
    hx << 1, 1, 1, -1;
    hx /= std::sqrt(2.0);
    VonNeumannMeasurement sx{{"+1", "-1"}, hx};
    const auto plan = plan_general(sz.to_projective(), sx.to_projective());
    ASSERT_TRUE(std::holds_alternative<LiftedMum>(plan));
    EXPECT_EQ(std::get<LiftedMum>(plan).copies, 2);
    const Scheme s = executable(plan);
    EXPECT_EQ(uses_per_trial(s), 4);
    EXPECT_NEAR(exact_accuracy(s, Hypothesis::M), 1.0, 1e-10);
    EXPECT_NEAR(exact_accuracy(s, Hypothesis::N), 1.0, 1e-10);
}

TEST(GeneralSchemes, MinimalLiftIsMinimal) {
    EXPECT_EQ(minimal_lift(0.5, 3, 1), 1);
    EXPECT_EQ(minimal_lift(0.5, 2, 1), 2);
    EXPECT_EQ(minimal_lift(0.9, 3, 1), 4);  // 0.9^4 = 0.656
    EXPECT_THROW(minimal_lift(0.999, 2, 1), PreconditionError);
}

TEST(GeneralSchemes, IdenticalMeasurementsHaveNoPlan) {
    Gen g(46);
    const auto m = testing::measurement_from(testing::haar_unitary(3, g), {1, 2});
    EXPECT_THROW(plan_general(m, m), PreconditionError);
}

TEST(GeneralSchemes, MaximallyEntangledState) {
    const Vector phi = maximally_entangled(3);
    EXPECT_NEAR(phi.norm(), 1.0, 1e-15);
    EXPECT_LT(max_abs(partial_trace_ancilla(outer(phi), 3, 3) - Matrix::Identity(3, 3) / 3.0), 1e-15);
}

}  // namespace
}  // namespace mdisc
