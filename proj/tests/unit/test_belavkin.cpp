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
#include <numeric>

#include "oqbm/belavkin.hpp"
#include "oqbm/errors.hpp"
#include "oqbm/lindblad.hpp"
#include "oqbm/rng.hpp"
#include "oracles.hpp"

using namespace oqbm;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix i_sy() { return Matrix(kI * oracle::sy()); }

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

// Integral of Tr((N + N*) e^{sL} rho) over [0, t] by Simpson on an RK4 flow.
double drift_integral(const Matrix& n, const Matrix& h, const Matrix& rho0, double t, int intervals = 200) {
    const double ds = t / intervals;
    Matrix rho = rho0;
    double sum = 0.0;
    for (int k = 0; k <= intervals; ++k) {
        const double v = ((n + n.adjoint()) * rho).trace().real();
        sum += v * (k == 0 || k == intervals ? 1.0 : (k % 2 ? 4.0 : 2.0));
        if (k < intervals) rho = oracle::lindblad_flow(n, h, rho, ds, 20);
    }
    return sum * ds / 3.0;
}

}  // namespace

TEST(BelavkinStep, MatchesExplicitFormula) {
    Rng rng(1);
    const LindbladGenerator g(oracle::sminus(), 0.5 * oracle::sx());
    const Matrix rho = random_density_matrix(2, rng).matrix();
    const double dt = 1e-3, dB = 0.02;
    const double t = ((g.N() + g.N().adjoint()) * rho).trace().real();
    Matrix next = rho + oracle::lindblad(g.N(), g.H(), rho) * dt + (g.N() * rho + rho * g.N().adjoint() - t * rho) * dB;
    const BelavkinUpdate u = belavkin_step(g, rho, 0.5, dB, dt);
    ASSERT_EQ(u.clipped, 0.0);
    EXPECT_NEAR(u.pre_trace, 1.0, 1e-14);
    EXPECT_LT(max_abs(u.state - next / next.trace().real()), 1e-15);
    EXPECT_NEAR(u.x, 0.5 + t * dt + dB, 1e-15);
    EXPECT_NEAR(drift_speed(g, rho), t, 1e-15);
}

TEST(BelavkinStep, WithoutNoiseIsLindbladEuler) {
    Rng rng(2);
    const LindbladGenerator g(oracle::sz(), oracle::sx());
    const Matrix rho = random_density_matrix(2, rng).matrix();
    const BelavkinUpdate u = belavkin_step(g, rho, 0.0, 0.0, 1e-4);
    EXPECT_LT(max_abs(u.state - (rho + 1e-4 * oracle::lindblad(g.N(), g.H(), rho))), 1e-15);
}

TEST(BelavkinStep, ProjectionFiresOnlyWhenNeeded) {
    // A pure state with a large increment leaves the PSD cone before projection.
    const LindbladGenerator g(oracle::sminus(), Matrix::Zero(2, 2));
    const BelavkinUpdate u = belavkin_step(g, oracle::plus_state(), 0.0, 0.3, 1e-3);
    EXPECT_GT(u.clipped, 0.0);
    EXPECT_GE(min_eigenvalue(u.state), -1e-12);
    EXPECT_NEAR(u.state.trace().real(), 1.0, 1e-14);
}

TEST(BelavkinStep, DimensionMismatch) {
    const LindbladGenerator g(oracle::sz(), oracle::sx());
    EXPECT_THROW(belavkin_step(g, Matrix::Identity(3, 3) / 3.0, 0.0, 0.0, 1e-3), DimensionError);
}

TEST(UnnormalizedStep, TraceMovesWithTheDrift) {
    Rng rng(3);
    const LindbladGenerator g(oracle::sminus(), 0.5 * oracle::sx());
    const Matrix sigma = 0.7 * random_density_matrix(2, rng).matrix();
    const double dW = -0.03, dt = 1e-3;
    const Matrix out = unnormalized_step(g, sigma, dW, dt);
    EXPECT_LT(max_abs(out - (sigma + oracle::lindblad(g.N(), g.H(), sigma) * dt +
                             (g.N() * sigma + sigma * g.N().adjoint()) * dW)),
              1e-15);
    EXPECT_NEAR(out.trace().real(), 0.7 + drift_speed(g, sigma) * dW, 1e-15);
}

TEST(SDEConfig, Validation) {
    const LindbladGenerator g(oracle::sz(), oracle::sx());
    EXPECT_THROW((SDEConfig{0.0, 1.0}.validate(g)), ConfigError);
    EXPECT_THROW((SDEConfig{2.0, 1.0}.validate(g)), ConfigError);
    EXPECT_THROW((SDEConfig{0.3, 1.0}.validate(g)), ConfigError);
    EXPECT_THROW((SDEConfig{0.05, 1.0}.validate(LindbladGenerator(2.0 * oracle::sz(), oracle::sx()))), ConfigError);
    EXPECT_NO_THROW((SDEConfig{1e-3, 1.0}.validate(g)));
    EXPECT_EQ((SDEConfig{1e-3, 1.0}.n_steps()), 1000);
}

TEST(BelavkinPath, ShapesAndDeterminism) {
    const LindbladGenerator g(oracle::sminus(), 0.5 * oracle::sx());
    SDEConfig cfg{1e-3, 0.2};
    cfg.seed = 9;
    const SDEPath a = belavkin_path(g, DensityMatrix(oracle::plus_state()), 0.0, cfg, 3);
    const SDEPath b = belavkin_path(g, DensityMatrix(oracle::plus_state()), 0.0, cfg, 3);
    ASSERT_EQ(a.states.size(), 201u);
    EXPECT_EQ(a.increments, b.increments);
    EXPECT_EQ(a.positions, b.positions);
    for (const Matrix& s : a.states) EXPECT_NEAR(s.trace().real(), 1.0, 1e-12);
    double x = 0.0;
    for (std::size_t k = 0; k < a.increments.size(); ++k) x += drift_speed(g, a.states[k]) * cfg.dt + a.increments[k];
    EXPECT_NEAR(a.positions.back(), x, 1e-12);
}

TEST(ReferencePath, GirsanovWeightRecomputes) {
    const LindbladGenerator g(oracle::sz(), oracle::sx());
    SDEConfig cfg{1e-3, 0.5};
    cfg.seed = 4;
    const ReferencePath p = unnormalized_path(g, DensityMatrix(oracle::plus_state()), 0.0, cfg, 0);
    EXPECT_NEAR(girsanov_weight(g, p, cfg.dt), p.girsanov.back(), 1e-12 * p.girsanov.back());
    EXPECT_NEAR(p.positions.back(), std::accumulate(p.increments.begin(), p.increments.end(), 0.0), 1e-12);
    // Tr sigma_T tracks the weight to O(sqrt dt).
    EXPECT_NEAR(p.states.back().trace().real() / p.girsanov.back(), 1.0, 0.1);
}

TEST(Ensemble, MeanStateFollowsTheSemigroup) {
    for (const Matrix& n : {oracle::sminus(), oracle::sz(), i_sy()}) {
        const LindbladGenerator g(n, 0.5 * oracle::sx());
        SDEConfig cfg{1e-3, 1.0};
        cfg.seed = 11;
        const EnsembleStats s =
            ensemble_run(g, DensityMatrix(oracle::plus_state()), InitialPosition{}, 4000, cfg, 4, 2);
        ASSERT_EQ(s.times.size(), 5u);
        for (std::size_t c = 0; c < s.times.size(); ++c) {
            const Matrix exact = oracle::lindblad_flow(n, g.H(), oracle::plus_state(), s.times[c], 2000);
            EXPECT_LE(oracle::trace_norm_eig(s.mean_state[c] - exact), 3.0 * s.state_stderr[c] + 10.0 * cfg.dt)
                << "checkpoint " << c;
        }
        const double drift = drift_integral(n, g.H(), oracle::plus_state(), 1.0);
        EXPECT_NEAR(s.mean_x.back(), drift, 5.0 * std::sqrt(s.var_x.back() / 4000) + 10.0 * cfg.dt);
    }
}

TEST(Ensemble, FreeMotionIsBrownian) {
    const LindbladGenerator g(Matrix::Zero(2, 2), oracle::sx());
    SDEConfig cfg{1e-2, 2.0};
    cfg.seed = 12;
    const EnsembleStats s = ensemble_run(g, DensityMatrix(oracle::plus_state()), InitialPosition{1.0, 0.5}, 20000, cfg, 1, 2);
    EXPECT_NEAR(s.mean_x.back(), 1.0, 5.0 * std::sqrt(2.25 / 20000));
    // Var of a chi-square-like estimate: 2 sigma^4 / n.
    EXPECT_NEAR(s.var_x.back(), 2.25, 5.0 * 2.25 * std::sqrt(2.0 / 20000));
    EXPECT_EQ(s.projected_paths, 0u);
}

TEST(Ensemble, IndependentOfThreadCount) {
    const LindbladGenerator g(oracle::sminus(), 0.5 * oracle::sx());
    SDEConfig cfg{1e-3, 0.2};
    cfg.seed = 13;
    const auto a = ensemble_run(g, DensityMatrix(oracle::plus_state()), InitialPosition{}, 1000, cfg, 2, 1);
    const auto b = ensemble_run(g, DensityMatrix(oracle::plus_state()), InitialPosition{}, 1000, cfg, 2, 4);
    EXPECT_EQ(a.endpoints, b.endpoints);
    EXPECT_EQ(a.mean_x, b.mean_x);
    EXPECT_EQ(max_abs(a.mean_state.back() - b.mean_state.back()), 0.0);
}

TEST(Reference, UnnormalizedMeanAndWeights) {
    const LindbladGenerator g(oracle::sz(), 0.5 * oracle::sx());
    SDEConfig cfg{1e-3, 1.0};
    cfg.seed = 14;
    const std::size_t n = 5000;
    const ReferenceStats r = reference_run(g, DensityMatrix(oracle::plus_state()), 0.0, n, cfg, 2);
    const Matrix exact = oracle::lindblad_flow(g.N(), g.H(), oracle::plus_state(), 1.0, 2000);
    EXPECT_LE(oracle::trace_norm_eig(r.mean_unnormalized - exact), 5.0 * r.unnormalized_stderr + 10.0 * cfg.dt);
    // Both martingale weights have mean one.
    for (const auto* w : {&r.weights, &r.girsanov}) {
        const double m = mean_of(*w);
        double var = 0.0;
        for (double v : *w) var += (v - m) * (v - m);
        var /= n - 1;
        EXPECT_NEAR(m, 1.0, 5.0 * std::sqrt(var / n));
    }
    // Under the reference measure X_T is Brownian.
    EXPECT_NEAR(mean_of(r.endpoints), 0.0, 5.0 * std::sqrt(1.0 / n));
}
