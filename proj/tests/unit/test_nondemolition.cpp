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

#include "oqbm/channels.hpp"
#include "oqbm/errors.hpp"
#include "oqbm/nondemolition.hpp"
#include "oqbm/oqw.hpp"
#include "oqbm/rng.hpp"
#include "oracles.hpp"

using namespace oqbm;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<PointerSpec> noisy_pointers(int nv, int n_times) {
    Matrix s = Matrix::Zero(nv, nv);
    const double w[3] = {0.7, 0.2, 0.1};
    for (int y = 0; y < nv; ++y) s(y, y) = y < 3 ? w[y] : 0.0;
    s /= s.trace().real();
    return std::vector<PointerSpec>(n_times, PointerSpec{PointerMap::cyclic_shift(nv), DensityMatrix(s)});
}

std::vector<PointerSpec> perfect_pointers(int nv, int n_times) {
    return std::vector<PointerSpec>(n_times, PointerSpec{PointerMap::perfect(nv), DensityMatrix::basis_state(nv, 0)});
}

struct WalkSetup {
    OQWKernel kernel;
    Matrix rho_g;
    int x0;
    int n_steps;
};

WalkSetup random_walk_setup(std::uint64_t seed) {
    Rng rng(seed);
    OQWKernel k = random_oqw_kernel(3, 2, rng);
    return {k, random_density_matrix(2, rng).matrix(), 1, 2};
}

}  // namespace

TEST(MeasuredEvolution, Validation) {
    const Matrix id4 = Matrix::Identity(4, 4);
    const auto proj = computational_projectors(2);
    EXPECT_THROW(MeasuredEvolution(2, 2, {id4}, {proj, proj}), ContractViolation);
    EXPECT_THROW(MeasuredEvolution(2, 2, {2.0 * id4}, {proj}), ContractViolation);
    EXPECT_THROW(MeasuredEvolution(2, 2, {Matrix::Identity(3, 3)}, {proj}), DimensionError);
    EXPECT_THROW(MeasuredEvolution(2, 2, {id4}, {{proj[0]}}), ContractViolation);
    EXPECT_THROW(MeasuredEvolution(2, 2, {id4}, {{proj[0], proj[0]}}), ContractViolation);
    const MeasuredEvolution me(2, 2, {id4}, {proj});
    EXPECT_LT(max_abs(me.lifted(0, 1) - oracle::kron_loops(oracle::id(2), oracle::ket_bra(2, 1, 1))), 1e-15);
}

TEST(Nondemolition, StaticMeasurementPasses) {
    const MeasuredEvolution me(2, 2, {Matrix::Identity(4, 4), Matrix::Identity(4, 4)},
                               {computational_projectors(2), computational_projectors(2)});
    const NondemolitionReport r = check_nondemolition(me);
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.max_commutator, 0.0);
}

TEST(Nondemolition, CounterexampleFails) {
    const MeasuredInstance c = demolition_counterexample();
    const NondemolitionReport r = check_nondemolition(c.evolution);
    EXPECT_FALSE(r.pass);
    EXPECT_NEAR(r.max_commutator, 0.5, 1e-12);
}

TEST(Nondemolition, OqwDilationPasses) {
    const WalkSetup s = random_walk_setup(1);
    const MeasuredEvolution me = oqw_dilation(s.kernel, s.n_steps);
    EXPECT_TRUE(check_nondemolition(me).pass);
    EXPECT_EQ(me.n_times(), s.n_steps + 1);
    EXPECT_THROW(oqw_dilation(s.kernel, 6), CapacityError);
    EXPECT_THROW(oqw_dilation(s.kernel, 2, 3), DomainError);
}

TEST(Unraveling, OqwDilationReproducesWalkPaths) {
    const WalkSetup s = random_walk_setup(2);
    const MeasuredEvolution me = oqw_dilation(s.kernel, s.n_steps);
    const Matrix state = oqw_dilation_state(s.rho_g, s.x0, 3, s.n_steps);
    const UnravelingDistribution u = exact_unraveling(me, state);
    EXPECT_TRUE(u.nondemolition);
    const oracle::PathTable paths = oracle::walk_paths(s.kernel, s.rho_g, s.x0, s.n_steps);
    const UnravelingLevel& last = u.final_level();
    double total = 0.0;
    for (std::size_t a = 0; a < last.histories.size(); ++a) {
        const auto it = paths.probability.find(last.histories[a]);
        const double expected = it == paths.probability.end() ? 0.0 : it->second;
        EXPECT_NEAR(last.probability[a], expected, 1e-12);
        total += last.probability[a];
        if (expected > 1e-9) {
            const auto st = last.conditional_state(static_cast<int>(a));
            ASSERT_TRUE(st.has_value());
            EXPECT_LT(oracle::trace_norm_eig(st->matrix() - paths.state.at(last.histories[a])), 1e-10);
        }
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    // Summing atoms by final position gives the walk's diagonal state.
    DiagonalState walk = DiagonalState::point(3, s.x0, s.rho_g);
    for (int k = 0; k < s.n_steps; ++k) walk = oqw_apply(s.kernel, walk);
    std::vector<Matrix> by_site(3, Matrix::Zero(2, 2));
    for (std::size_t a = 0; a < last.histories.size(); ++a) by_site[last.histories[a].back()] += last.unnormalized[a];
    for (int x = 0; x < 3; ++x) EXPECT_LT(max_abs(by_site[x] - walk.sites[x]), 1e-12);
}

TEST(Unraveling, IndependentOfDilationCompletion) {
    const WalkSetup s = random_walk_setup(3);
    const MeasuredEvolution lib = oqw_dilation(s.kernel, s.n_steps);
    Rng rng(33);
    std::vector<std::vector<Matrix>> algebras;
    for (int k = 0; k < lib.n_times(); ++k) algebras.push_back(lib.algebra(k));
    const MeasuredEvolution other(lib.dim_g(), lib.dim_b(), oracle::dilation_by_kron(s.kernel, s.n_steps, rng),
                                  algebras);
    // Different unitaries...
    EXPECT_GT(max_abs(other.unitary(1) - lib.unitary(1)), 1e-3);
    EXPECT_TRUE(check_nondemolition(other).pass);
    // ...same measured law and conditional states.
    const Matrix state = oqw_dilation_state(s.rho_g, s.x0, 3, s.n_steps);
    const UnravelingDistribution a = exact_unraveling(lib, state);
    const UnravelingDistribution b = exact_unraveling(other, state);
    for (int k = 0; k < lib.n_times(); ++k) {
        ASSERT_EQ(a.levels[k].histories, b.levels[k].histories);
        for (std::size_t i = 0; i < a.levels[k].histories.size(); ++i) {
            EXPECT_NEAR(a.levels[k].probability[i], b.levels[k].probability[i], 1e-12);
            EXPECT_LT(max_abs(a.levels[k].unnormalized[i] - b.levels[k].unnormalized[i]), 1e-12);
        }
    }
    EXPECT_LE(consistency_check(other, state, noisy_pointers(3, other.n_times())).discrepancy(), 1e-10);
}

TEST(Unraveling, ConnectingMapFollowsPrefixes) {
    const WalkSetup s = random_walk_setup(4);
    const MeasuredEvolution me = oqw_dilation(s.kernel, s.n_steps);
    const UnravelingDistribution u = exact_unraveling(me, oqw_dilation_state(s.rho_g, s.x0, 3, s.n_steps));
    const std::vector<int> eta = u.connecting_map(0, 2);
    for (std::size_t a = 0; a < eta.size(); ++a) {
        const auto& h = u.levels[2].histories[a];
        const auto& p = u.levels[0].histories[eta[a]];
        EXPECT_EQ(std::vector<int>(h.begin(), h.begin() + 1), p);
    }
    EXPECT_THROW(u.connecting_map(2, 1), DomainError);
}

TEST(Unraveling, MarginalsAreBorn) {
    const WalkSetup s = random_walk_setup(5);
    const MeasuredEvolution me = oqw_dilation(s.kernel, s.n_steps);
    const Matrix state = oqw_dilation_state(s.rho_g, s.x0, 3, s.n_steps);
    const UnravelingDistribution u = exact_unraveling(me, state);
    for (int k = 0; k < me.n_times(); ++k) {
        std::vector<double> marg(3, 0.0);
        for (std::size_t a = 0; a < u.levels[k].histories.size(); ++a)
            marg[u.levels[k].histories[a].back()] += u.levels[k].probability[a];
        const std::vector<double> born = born_marginal(me, state, k);
        for (int x = 0; x < 3; ++x) EXPECT_NEAR(marg[x], born[x], 1e-12);
    }
}

TEST(Consistency, NondemolitionInstancesAgree) {
    for (std::uint64_t seed : {6u, 7u, 8u}) {
        const WalkSetup s = random_walk_setup(seed);
        const MeasuredEvolution me = oqw_dilation(s.kernel, s.n_steps);
        const Matrix state = oqw_dilation_state(s.rho_g, s.x0, 3, s.n_steps);
        const ConsistencyReport noisy = consistency_check(me, state, noisy_pointers(3, me.n_times()));
        const ConsistencyReport exact = consistency_check(me, state, perfect_pointers(3, me.n_times()));
        EXPECT_TRUE(noisy.nondemolition);
        EXPECT_LE(noisy.discrepancy(), 1e-10);
        EXPECT_LE(exact.discrepancy(), 1e-10);
    }
}

TEST(Consistency, CounterexampleDisagrees) {
    const MeasuredInstance c = demolition_counterexample();
    const ConsistencyReport r = consistency_check(c.evolution, c.state, perfect_pointers(2, 2));
    EXPECT_FALSE(r.nondemolition);
    EXPECT_NEAR(r.marginal_tv, 0.5, 1e-12);
    EXPECT_GT(r.discrepancy(), 1e-3);
}

TEST(Consistency, PointerValidation) {
    const MeasuredInstance c = demolition_counterexample();
    EXPECT_THROW(consistency_check(c.evolution, c.state, perfect_pointers(2, 1)), ContractViolation);
    EXPECT_THROW(consistency_check(c.evolution, c.state, perfect_pointers(3, 2)), DimensionError);
    EXPECT_THROW(exact_unraveling(c.evolution, Matrix::Identity(3, 3)), DimensionError);
}
