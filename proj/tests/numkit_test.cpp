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

#include "mdisc/numkit.hpp"
#include "test_util.hpp"

namespace mdisc {
namespace {

using testing::Gen;

TEST(Numkit, KronMatchesEntryFormula) {
    Gen g(1);
    const Matrix a = testing::gaussian_matrix(2, 3, g);
    const Matrix b = testing::gaussian_matrix(3, 2, g);
    const Matrix k = kron(a, b);
    ASSERT_EQ(k.rows(), 6);
    ASSERT_EQ(k.cols(), 6);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j)
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 2; ++q)
                    EXPECT_EQ(k(i * 3 + p, j * 2 + q), a(i, j) * b(p, q));
}

TEST(Numkit, KronPowerOfPauliX) {
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    const Matrix k = kron_power(x, 3);
    // X^{⊗3} flips every bit: |i> -> |7 - i>.
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            EXPECT_EQ(k(i, j), Complex(i + j == 7 ? 1.0 : 0.0));
    EXPECT_EQ(kron_power(x, 0).size(), 1);
}

TEST(Numkit, ApplyOnSlotAgreesWithKron) {
    Gen g(2);
    const std::vector<Eigen::Index> dims{2, 3, 2};
    const Vector v = testing::random_unit(12, g);
    for (std::size_t slot = 0; slot < dims.size(); ++slot) {
        const Matrix op = testing::gaussian_matrix(dims[slot], dims[slot], g);
        std::vector<Matrix> factors;
        for (std::size_t s = 0; s < dims.size(); ++s) {
            factors.push_back(s == slot ? op : Matrix::Identity(dims[s], dims[s]));
        }
        const Vector want = kron_all(factors) * v;
        EXPECT_LT((apply_on_slot(op, v, dims, slot) - want).norm(), 1e-12) << "slot " << slot;
    }
}

TEST(Numkit, ApplyTensorPowerAgreesWithKronPower) {
    Gen g(3);
    const Matrix u = testing::haar_unitary(2, g);
    const Vector v = testing::random_unit(16, g);
    EXPECT_LT((apply_tensor_power(u, v, 4) - kron_power(u, 4) * v).norm(), 1e-12);
}

TEST(Numkit, PsdSqrtSquaresBack) {
    Gen g(4);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix rho = testing::random_density(4, 1 + trial % 4, g);
        const Matrix s = psd_sqrt(rho);
        EXPECT_LT(max_abs(s * s - rho), 1e-12);
        EXPECT_LT(hermitian_deviation(s), 1e-12);
    }
}

TEST(Numkit, PsdSqrtClampsRoundOffButRejectsNegative) {
    Matrix a = Matrix::Identity(2, 2);
    a(1, 1) = -1e-12;
    EXPECT_NO_THROW(psd_sqrt(a));
    a(1, 1) = -0.1;
    EXPECT_THROW(psd_sqrt(a), PreconditionError);
}

TEST(Numkit, OrthonormalCompletionKeepsLeadingColumns) {
    Gen g(5);
    const Matrix u = testing::haar_unitary(5, g);
    const Matrix cols = u.leftCols(2);
    const Matrix full = orthonormal_completion(cols);
    ASSERT_EQ(full.cols(), 5);
    EXPECT_LT(unitary_deviation(full), 1e-12);
    EXPECT_LT(max_abs(full.leftCols(2) - cols), 1e-12);
}

TEST(Numkit, SingularValuesAndNorms) {
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = Complex(0.0, -2.0);
    d(2, 2) = 0.5;
    Gen g(6);
    const Matrix u = testing::haar_unitary(3, g);
    const Matrix w = testing::haar_unitary(3, g);
    const Matrix a = u * d * w;
    EXPECT_NEAR(operator_norm(a), 3.0, 1e-12);
    EXPECT_NEAR(smallest_singular(a), 0.5, 1e-12);
}

TEST(Numkit, UnitaryDilationEmbedsContraction) {
    Gen g(7);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index r = testing::uniform_int(1, 3, g);
        const Eigen::Index target = 2 * r + testing::uniform_int(0, 2, g);
        Matrix v = testing::gaussian_matrix(r, r, g);
        v *= testing::uniform_real(0.0, 1.0, g) / operator_norm(v);
        const Matrix w = unitary_dilation(v, target);
        ASSERT_EQ(w.rows(), target);
        EXPECT_LT(unitary_deviation(w), 1e-10);
        EXPECT_LT(max_abs(w.topLeftCorner(r, r) - v), 1e-12);
    }
}

TEST(Numkit, UnitaryDilationPreconditions) {
    Matrix v = 2.0 * Matrix::Identity(1, 1);
    EXPECT_THROW(unitary_dilation(v, 2), PreconditionError);
    EXPECT_THROW(unitary_dilation(Matrix::Zero(2, 2), 3), PreconditionError);
    // A unitary block dilates trivially.
    EXPECT_LT(unitary_deviation(unitary_dilation(Matrix::Identity(1, 1), 2)), 1e-12);
}

TEST(Numkit, PurificationReproducesDensity) {
    Gen g(8);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = testing::uniform_int(2, 5, g);
        const Eigen::Index rank = testing::uniform_int(1, static_cast<int>(d), g);
        const Matrix rho = testing::random_density(d, rank, g);
        const Vector psi = purify(rho);
        ASSERT_EQ(psi.size() % d, 0);
        const Eigen::Index anc = psi.size() / d;
        EXPECT_EQ(anc, rank);
        EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
        EXPECT_LT(max_abs(partial_trace_ancilla(outer(psi), d, anc) - rho), 1e-10);
    }
}

TEST(Numkit, PartialTracesOfProductState) {
    Gen g(9);
    const Vector a = testing::random_unit(3, g);
    const Vector b = testing::random_unit(2, g);
    const Matrix rho = outer(kron(a, b));
    EXPECT_LT(max_abs(partial_trace_ancilla(rho, 3, 2) - outer(a)), 1e-12);
    EXPECT_LT(max_abs(partial_trace_system(rho, 3, 2) - outer(b)), 1e-12);
}

TEST(Numkit, DensityViolationNamesTheProblem) {
    Matrix m = Matrix::Identity(2, 2);
    EXPECT_EQ(density_violation(m), "trace is not 1");
    m(0, 0) = 1.5;
    m(1, 1) = -0.5;
    EXPECT_EQ(density_violation(m), "not positive semidefinite");
    EXPECT_TRUE(density_violation(0.5 * Matrix::Identity(2, 2)).empty());
}

TEST(Numkit, SubspaceMeetFindsPlantedIntersection) {
    Gen g(10);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = 6;
        const Matrix u = testing::haar_unitary(d, g);
        // P = span(u0, u1, u2), Q = span(u0, w) with w generic in the rest.
        const Matrix p = testing::column_projector(u, 0, 3);
        Matrix qcols(d, 2);
        qcols.col(0) = u.col(0);
        Vector w = u.rightCols(3) * testing::random_unit(3, g) + 0.5 * u.col(1);
        qcols.col(1) = w;
        const Matrix q_basis = orthonormalize(qcols);
        const Matrix q = q_basis * q_basis.adjoint();
        const Matrix meet = subspace_meet(p, q);
        EXPECT_EQ(projector_rank(meet), 1);
        EXPECT_LT(max_abs(meet - outer(Vector(u.col(0)))), 1e-8);
    }
}

TEST(Numkit, RangeBasisAndRank) {
    Gen g(11);
    const Matrix u = testing::haar_unitary(5, g);
    const Matrix p = testing::column_projector(u, 1, 3);
    const Matrix basis = range_basis(p);
    EXPECT_EQ(basis.cols(), 3);
    EXPECT_EQ(projector_rank(p), 3);
    EXPECT_LT(max_abs(basis * basis.adjoint() - p), 1e-10);
}

}  // namespace
}  // namespace mdisc
