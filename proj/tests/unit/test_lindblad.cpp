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

#include <algorithm>
#include <cmath>

#include "oqbm/errors.hpp"
#include "oqbm/lindblad.hpp"
#include "oqbm/rng.hpp"
#include "oracles.hpp"

using namespace oqbm;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix random_op(int d, Rng& rng) {
    Matrix a = random_matrix(d, rng);
    return a / op_norm(a);
}

Matrix random_herm(int d, Rng& rng) {
    Matrix a = random_matrix(d, rng);
    a = (a + a.adjoint()).eval();
    return a / op_norm(a);
}

QField gaussian_field(const Grid& grid, double mean, double var, const Matrix& rho) {
    QField q;
    q.grid = grid;
    for (int i = 0; i < grid.n_points; ++i) q.values.push_back(oracle::gaussian(grid.x(i), mean, var) * rho);
    return q;
}

Grid centred(double half, double dx) {
    const int n = static_cast<int>(std::lround(2.0 * half / dx)) + 1;
    return Grid{-half, dx, n};
}

}  // namespace

TEST(Generator, RhsAndSuperoperator) {
    Rng rng(1);
    for (int d : {2, 3}) {
        const LindbladGenerator g(random_op(d, rng), random_herm(d, rng));
        const Matrix rho = random_density_matrix(d, rng).matrix();
        const Matrix expected = oracle::lindblad(g.N(), g.H(), rho);
        EXPECT_LT(max_abs(lindblad_rhs(g, rho) - expected), 1e-15);
        EXPECT_LT(std::abs(expected.trace()), 1e-15);
        // Column-stacking vectorization.
        Vector v(d * d);
        for (int c = 0; c < d; ++c) v.segment(c * d, d) = rho.col(c);
        const Vector lv = superoperator(g) * v;
        for (int c = 0; c < d; ++c) EXPECT_LT((lv.segment(c * d, d) - expected.col(c)).cwiseAbs().maxCoeff(), 1e-14);
    }
    EXPECT_THROW(LindbladGenerator(oracle::sz(), oracle::sminus()), ContractViolation);
    EXPECT_THROW(LindbladGenerator(oracle::sz(), Matrix::Zero(3, 3)), DimensionError);
}

TEST(Generator, SemigroupMatchesIndependentFlow) {
    Rng rng(2);
    const LindbladGenerator g(random_op(3, rng), random_herm(3, rng));
    const Matrix rho = random_density_matrix(3, rng).matrix();
    const Matrix exact = oracle::lindblad_flow(g.N(), g.H(), rho, 1.5);
    EXPECT_LT(max_abs(semigroup_apply(g, rho, 1.5) - exact), 1e-11);
    EXPECT_LT(max_abs(evolve_rho_G(g, rho, 1.5, 1e-3) - exact), 1e-10);
    EXPECT_THROW(evolve_rho_G(g, rho, 1.0, 0.5), StepSizeError);
}

TEST(QEquation, HeatKernel) {
    const LindbladGenerator g(Matrix::Zero(2, 2), Matrix::Zero(2, 2));
    const Grid grid = centred(6.0, 0.02);
    const double s2 = 0.1, t = 0.5;
    const Matrix rho = oracle::plus_state();
    const QField out = evolve_Q(g, gaussian_field(grid, 0.0, s2, rho), t, 1e-4);
    EXPECT_LE(summed_trace_distance(out, gaussian_field(grid, 0.0, s2 + t, rho)), 1e-4);
    EXPECT_LE(out.leaked, 1e-12);
}

TEST(QEquation, MarginalFollowsTheSemigroup) {
    Rng rng(3);
    const LindbladGenerator g(random_op(2, rng), random_herm(2, rng));
    const Matrix rho = random_density_matrix(2, rng).matrix();
    const Grid grid = centred(10.0, 0.05);
    const double t = 1.0;
    const QField out = evolve_Q(g, gaussian_field(grid, 0.0, 0.2, rho), t, 5e-4);
    ASSERT_LT(out.leaked, 1e-9);
    EXPECT_LT(trace_norm(out.gyroscope_marginal() - oracle::lindblad_flow(g.N(), g.H(), rho, t)), 1e-6);
}

TEST(QEquation, MeanPositionIntegratesTheDrift) {
    const LindbladGenerator g(oracle::sminus(), 0.5 * oracle::sx());
    const Matrix rho = oracle::plus_state();
    const Grid grid = centred(10.0, 0.05);
    const double t = 1.0;
    const QField out = evolve_Q(g, gaussian_field(grid, 0.0, 0.2, rho), t, 5e-4);
    // Simpson on the independent flow.
    const int m = 200;
    double drift = 0.0;
    Matrix r = rho;
    for (int k = 0; k <= m; ++k) {
        const double v = ((g.N() + g.N().adjoint()) * r).trace().real();
        drift += v * (k == 0 || k == m ? 1.0 : (k % 2 ? 4.0 : 2.0));
        if (k < m) r = oracle::lindblad_flow(g.N(), g.H(), r, t / m, 20);
    }
    drift *= t / m / 3.0;
    EXPECT_NEAR(out.mean_position(), drift, 1e-6);
}

TEST(QEquation, DriftMovesRightForPositiveSpeed) {
    const LindbladGenerator g(oracle::sz(), Matrix::Zero(2, 2));
    const Grid grid = centred(8.0, 0.05);
    const QField out = evolve_Q(g, gaussian_field(grid, 0.0, 0.2, projector(basis_vector(2, 0))), 1.0, 5e-4);
    EXPECT_NEAR(out.mean_position(), 2.0, 1e-6);
}

TEST(QEquation, MassBalanceWithLeak) {
    const LindbladGenerator g(oracle::sminus(), 0.5 * oracle::sx());
    const Grid grid = centred(1.0, 0.05);
    const QField q0 = gaussian_field(grid, 0.0, 0.1, oracle::plus_state());
    const QField out = evolve_Q(g, q0, 1.0, 5e-4);
    EXPECT_GT(out.leaked, 0.1);
    EXPECT_NEAR(out.mass() + out.leaked, q0.mass(), 1e-9);
}

TEST(QEquation, Validation) {
    const LindbladGenerator g(oracle::sz(), oracle::sx());
    const Grid grid = centred(1.0, 0.05);
    const QField q0 = gaussian_field(grid, 0.0, 0.1, oracle::plus_state());
    EXPECT_THROW(evolve_Q(g, q0, 1.0, 2e-3), ConfigError);
    EXPECT_THROW(evolve_Q(g, q0, -1.0, 5e-4), ContractViolation);
    QField bad = q0;
    bad.values.pop_back();
    EXPECT_THROW(evolve_Q(g, bad, 1.0, 5e-4), DimensionError);
}

TEST(KEquation, DiagonalIsTheQEquation) {
    Rng rng(4);
    const LindbladGenerator g(random_op(2, rng), random_herm(2, rng));
    const Grid grid = centred(2.0, 0.1);
    // K0(x, y) = f(x) f(y) |psi><psi| with a pure gyroscope state.
    const Matrix rho = projector(Vector::Ones(2).normalized());
    KKernel k0 = KKernel::zero(grid, 2);
    for (int i = 0; i < grid.n_points; ++i)
        for (int j = 0; j < grid.n_points; ++j)
            k0.at(i, j) = std::sqrt(oracle::gaussian(grid.x(i), 0.0, 0.1) * oracle::gaussian(grid.x(j), 0.0, 0.1)) * rho;
    const KKernel k = evolve_K(g, k0, 0.5, 2e-3);
    const QField q = evolve_Q(g, k0.diagonal(), 0.5, 2e-3);
    EXPECT_LE(summed_trace_distance(k.diagonal(), q), 1e-13);
    EXPECT_NEAR(k.leaked, q.leaked, 1e-13);
    EXPECT_LE(k.hermitian_asymmetry(), 1e-12);
}

TEST(Invariant, DampingHasUniqueGroundState) {
    const LindbladGenerator g(oracle::sminus(), Matrix::Zero(2, 2));
    const InvariantReport r = invariant_states(g);
    ASSERT_TRUE(r.unique());
    EXPECT_LT(max_abs(r.states[0].matrix() - projector(basis_vector(2, 1))), 1e-10);
    EXPECT_NEAR(ballistic_speed(g), 0.0, 1e-10);
}

TEST(Invariant, GenericGeneratorMatchesLongTimeFlow) {
    Rng rng(5);
    const LindbladGenerator g(random_op(3, rng), random_herm(3, rng));
    const DensityMatrix s = invariant_state(g);
    EXPECT_LT(max_abs(oracle::lindblad(g.N(), g.H(), s.matrix())), 1e-10);
    const Matrix late = oracle::lindblad_flow(g.N(), g.H(), Matrix::Identity(3, 3) / 3.0, 200.0, 200000);
    EXPECT_LT(trace_norm(late - s.matrix()), 1e-8);
    EXPECT_NEAR(ballistic_speed(g), ((g.N() + g.N().adjoint()) * late).trace().real(), 1e-8);
}

TEST(Invariant, DephasingIsDegenerate) {
    const LindbladGenerator g(oracle::sz(), Matrix::Zero(2, 2));
    const InvariantReport r = invariant_states(g);
    EXPECT_EQ(r.null_dim, 2);
    ASSERT_EQ(r.states.size(), 2u);
    std::vector<double> speeds = r.speeds;
    std::sort(speeds.begin(), speeds.end());
    EXPECT_NEAR(speeds[0], -2.0, 1e-10);
    EXPECT_NEAR(speeds[1], 2.0, 1e-10);
    EXPECT_LE(r.residual, 1e-10);
    EXPECT_THROW(ballistic_speed(g), DegenerateInvariant);
    try {
        invariant_state(g);
    } catch (const DegenerateInvariant& e) {
        EXPECT_EQ(e.report().null_dim, 2);
    }
}
