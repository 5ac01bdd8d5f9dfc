// Copyright 2026 The OQBM Toolkit Authors
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

#include "oqbm/errors.hpp"
#include "oqbm/linalg.hpp"
#include "oqbm/rng.hpp"
#include "oracles.hpp"

using namespace oqbm;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(MatrixExp, ZeroGivesIdentity) {
    EXPECT_LT(max_abs(matrix_exp(Matrix::Zero(2, 2)) - Matrix::Identity(2, 2)), 1e-15);
}

TEST(MatrixExp, HalfTurnOfSigmaX) {
    const Matrix e = matrix_exp(kI * std::numbers::pi * oracle::sx());
    EXPECT_LT(max_abs(e + Matrix::Identity(2, 2)), 1e-13);
}

TEST(MatrixExp, DiagonalGeneratorOfCoupling) {
    // N = 0, H = sigma_z, tau = 0.1: the coupling generator is -i tau sigma_z (x) I.
    const Matrix gen = -kI * 0.1 * oracle::kron_loops(oracle::sz(), Matrix::Identity(2, 2));
    const Matrix e = matrix_exp(gen);
    Matrix expected = Matrix::Zero(4, 4);
    const cplx a = std::exp(cplx(0, -0.1)), b = std::exp(cplx(0, 0.1));
    expected.diagonal() << a, a, b, b;
    EXPECT_LT(max_abs(e - expected), 1e-15);
}

TEST(MatrixExp, AgreesWithTaylorSeries) {
    Rng rng(1);
    for (int d : {2, 3, 6}) {
        const Matrix a = random_matrix(d, rng, 1.5);
        EXPECT_LT(max_abs(matrix_exp(a) - oracle::expm_taylor(a)), 1e-11) << "dim " << d;
    }
}

TEST(MatrixExp, SkewHermitianExponentialsAreUnitary) {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a = random_hermitian(4, rng);
        a *= 10.0 * rng.uniform() / op_norm(a);
        const Matrix u = matrix_exp(kI * a) * matrix_exp(-kI * a);
        EXPECT_LT(op_norm(u - Matrix::Identity(4, 4)), 1e-9);
    }
}

TEST(MatrixExp, RejectsNonSquare) {
    EXPECT_THROW(matrix_exp(Matrix::Zero(2, 3)), DimensionError);
}

TEST(PartialTrace, ProductStates) {
    Rng rng(3);
    const Matrix a = random_density_matrix(2, rng).matrix();
    const Matrix b = random_density_matrix(3, rng).matrix();
    const Matrix ab = kron(a, b);
    EXPECT_LT(max_abs(partial_trace(ab, 2, 3, Keep::First) - a), 1e-14);
    EXPECT_LT(max_abs(partial_trace(ab, 2, 3, Keep::Second) - b), 1e-14);
}

TEST(PartialTrace, BellStateIsMaximallyMixed) {
    Vector phi = Vector::Zero(4);
    phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
    const Matrix rho = phi * phi.adjoint();
    EXPECT_LT(max_abs(partial_trace(rho, 2, 2, Keep::First) - Matrix::Identity(2, 2) / 2.0), 1e-15);
}

TEST(PartialTrace, MatchesIndexContraction) {
    Rng rng(4);
    const Matrix rho = random_matrix(12, rng);
    EXPECT_LT(max_abs(partial_trace(rho, 3, 4, Keep::First) - oracle::trace_out_second(rho, 3, 4)), 1e-13);
    EXPECT_LT(max_abs(partial_trace(rho, 3, 4, Keep::Second) - oracle::trace_out_first(rho, 3, 4)), 1e-13);
}

TEST(PartialTrace, IsAdjointOfTensoringWithIdentity) {
    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix rho = random_density_matrix(6, rng).matrix();
        const Matrix a = random_matrix(2, rng);
        const cplx lhs = (partial_trace(rho, 2, 3, Keep::First) * a).trace();
        const cplx rhs = (rho * kron(a, Matrix::Identity(3, 3))).trace();
        EXPECT_LT(std::abs(lhs - rhs), 1e-10);
    }
}

TEST(PartialTrace, DimensionMismatch) {
    EXPECT_THROW(partial_trace(Matrix::Zero(6, 6), 2, 2, Keep::First), DimensionError);
}

TEST(TraceNorm, SimpleCases) {
    EXPECT_EQ(trace_norm(Matrix::Zero(3, 3)), 0.0);
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -2.0;
    EXPECT_NEAR(trace_norm(d), 3.0, 1e-15);
}

TEST(TraceNorm, DifferenceOfStatesMatchesEigenvalues) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix diff = random_density_matrix(3, rng).matrix() - random_density_matrix(3, rng).matrix();
        Eigen::SelfAdjointEigenSolver<Matrix> es(diff);
        const double expected = es.eigenvalues().cwiseAbs().sum();
        EXPECT_NEAR(trace_norm(diff), expected, 1e-12);
        EXPECT_NEAR(trace_norm(diff), oracle::trace_norm_eig(diff), 1e-7);
    }
}

TEST(TraceNorm, UnitarilyInvariant) {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = random_matrix(4, rng);
        const Matrix u = random_unitary(4, rng), v = random_unitary(4, rng);
        EXPECT_NEAR(trace_norm(u * a * v), trace_norm(a), 1e-9);
    }
}

TEST(PsdProject, FixedPointOnStates) {
    Rng rng(8);
    const Matrix rho = random_density_matrix(3, rng).matrix();
    EXPECT_LT(max_abs(psd_project(rho, 1e-12) - rho), 1e-13);
}

TEST(PsdProject, ClipsTinyNegativeEigenvalue) {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = -1e-14;
    const PsdProjection p = psd_project_report(a, 1e-12);
    EXPECT_NEAR(p.matrix(0, 0).real(), 1.0 - 1e-14, 1e-16);
    EXPECT_EQ(std::abs(p.matrix(1, 1)), 0.0);
    EXPECT_NEAR(p.clipped, 1e-14, 1e-20);
}

TEST(PsdProject, NearestPsdThenRescaled) {
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        // Hermitian with exactly one negative eigenvalue.
        const Matrix u = random_unitary(3, rng);
        RealVector ev(3);
        ev << 0.7, 0.5, -0.2;
        const Matrix a = u * ev.cast<cplx>().asDiagonal() * u.adjoint();
        RealVector clipped = ev.cwiseMax(0.0);
        const Matrix nearest = u * clipped.cast<cplx>().asDiagonal() * u.adjoint();
        const Matrix expected = nearest * (a.trace().real() / nearest.trace().real());
        EXPECT_LT(max_abs(psd_project(a, 1e-12) - expected), 1e-13);
    }
}

TEST(PsdProject, RejectsNonHermitian) {
    Matrix a = Matrix::Identity(2, 2);
    a(0, 1) = 1e-3;
    EXPECT_THROW(psd_project(a, 1e-10), ContractViolation);
}

TEST(DensityMatrix, Validation) {
    EXPECT_NO_THROW(DensityMatrix(Matrix::Identity(2, 2) / 2.0));
    EXPECT_THROW(DensityMatrix(Matrix::Identity(2, 2)), ContractViolation);
    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 0) = 1.1;
    neg(1, 1) = -0.1;
    EXPECT_THROW(DensityMatrix{neg}, ContractViolation);
    Matrix nonherm = Matrix::Identity(2, 2) / 2.0;
    nonherm(0, 1) = 0.1;
    EXPECT_THROW(DensityMatrix{nonherm}, ContractViolation);
    EXPECT_NEAR(DensityMatrix::pure(Vector::Ones(3)).matrix().trace().real(), 1.0, 1e-15);
}

TEST(Kron, MatchesLoopsAndOrdering) {
    Rng rng(10);
    const Matrix a = random_matrix(2, rng), b = random_matrix(3, rng);
    EXPECT_LT(max_abs(kron(a, b) - oracle::kron_loops(a, b)), 1e-15);
    // |a, b> at a * dim_b + b
    const Vector v = kron(basis_vector(2, 1), basis_vector(3, 2));
    EXPECT_EQ(std::abs(v(1 * 3 + 2)), 1.0);
}

TEST(Pauli, Conventions) {
    EXPECT_EQ(max_abs(pauli::minus() - oracle::sminus()), 0.0);
    EXPECT_EQ(max_abs(pauli::plus() - oracle::sminus().adjoint()), 0.0);
    EXPECT_EQ(max_abs(pauli::y() - oracle::sy()), 0.0);
}

TEST(RandomObjects, AreValid) {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        EXPECT_LT(unitarity_defect(random_unitary(5, rng)), 1e-12);
        EXPECT_LT(hermitian_defect(random_hermitian(4, rng)), 1e-15);
        const DensityMatrix r = random_density_matrix(3, rng, 1);
        EXPECT_NEAR(r.matrix().trace().real(), 1.0, 1e-12);
        EXPECT_NEAR((r.matrix() * r.matrix()).trace().real(), 1.0, 1e-10);  // rank 1
    }
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
    Rng a = Rng::stream(42, 7), b = Rng::stream(42, 7), c = Rng::stream(42, 8);
    for (int i = 0; i < 5; ++i) {
        const auto x = a.bits();
        EXPECT_EQ(x, b.bits());
        EXPECT_NE(x, c.bits());
    }
}
