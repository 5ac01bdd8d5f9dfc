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

#include "oqbm/errors.hpp"
#include "oqbm/oqbm_discrete.hpp"
#include "oqbm/rng.hpp"
#include "oqbm/toy_fock.hpp"
#include "oracles.hpp"

using namespace oqbm;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Vector random_ket(int d, Rng& rng) {
    Vector v(d);
    for (int i = 0; i < d; ++i) v(i) = cplx(rng.normal(), rng.normal());
    return v.normalized();
}

OQBMParams sample_params(Rng& rng) {
    Matrix n = random_matrix(2, rng);
    n /= op_norm(n);
    Matrix h = random_matrix(2, rng);
    h = 0.5 * (h + h.adjoint()).eval();
    return OQBMParams(n, h, 0.02);
}

// Dense unitary of one step on gyroscope (x) window (x) probes, probe k of n.
Matrix dense_step(const Matrix& v, int d, int w, int k, int n) {
    const int before = 1 << k, after = 1 << (n - 1 - k);
    // V on (g, probe k): expand over the window and the other probes.
    Matrix v_full = Matrix::Zero(d * w << n, d * w << n);
    for (int g = 0; g < d; ++g)
        for (int h = 0; h < d; ++h)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    const cplx c = v(2 * g + a, 2 * h + b);
                    const Matrix block = oracle::kron_loops(
                        oracle::id(w), oracle::kron_loops(oracle::id(before),
                                                          oracle::kron_loops(oracle::ket_bra(2, a, b), oracle::id(after))));
                    v_full += c * oracle::kron_loops(oracle::ket_bra(d, g, h), block);
                }
    Matrix shift = Matrix::Zero(w, w);
    for (int z = 0; z < w; ++z) shift((z + 1) % w, z) = 1.0;
    Matrix minus = oracle::plus_state();
    minus(0, 1) = minus(1, 0) = -0.5;
    Matrix r = Matrix::Zero(d * w << n, d * w << n);
    for (const auto& [s, proj] : {std::pair{shift, oracle::plus_state()}, std::pair{Matrix(shift.adjoint()), minus}}) {
        r += oracle::kron_loops(oracle::id(d), oracle::kron_loops(s, oracle::kron_loops(oracle::id(before),
                                                                                         oracle::kron_loops(proj, oracle::id(after)))));
    }
    return r * v_full;
}

}  // namespace

TEST(ToyFock, ProductStateReducesToPoint) {
    Rng rng(1);
    const Vector g = random_ket(2, rng);
    const ToyFockRegister reg = ToyFockRegister::product(g, 7, 3, 4);
    Matrix site = Matrix::Zero(7, 7);
    site(3, 3) = 1.0;
    EXPECT_LT(max_abs(reg.reduced_state() - oracle::kron_loops(g * g.adjoint(), site)), 1e-15);
}

TEST(ToyFock, Validation) {
    EXPECT_THROW(ToyFockRegister::product(Vector::Ones(2).normalized(), 5, 2, kMaxProbes + 1), CapacityError);
    EXPECT_THROW(ToyFockRegister::product(Vector::Ones(2).normalized(), 5, 5, 2), DomainError);
    EXPECT_THROW(ToyFockRegister(2, 5, 2, Vector::Zero(40)), ContractViolation);
    EXPECT_THROW(ToyFockRegister(2, 5, 2, Vector::Ones(39).normalized()), DimensionError);
    const ToyFockRegister reg = ToyFockRegister::product(Vector::Ones(2).normalized(), 5, 2, 2);
    const OQBMParams p(oracle::sz(), oracle::sx(), 0.01);
    EXPECT_THROW(toyfock_evolve(p, reg, 3), CapacityError);
    EXPECT_THROW(toyfock_evolve(OQBMParams(oracle::sz(), oracle::sx(), 0.01, oracle::sx()), reg, 1), Unsupported);
}

TEST(ToyFock, StepsMatchDenseUnitaries) {
    Rng rng(2);
    const int d = 2, w = 9, n = 3;
    const OQBMParams p = sample_params(rng);
    const ToyFockRegister reg0 = ToyFockRegister::product(random_ket(d, rng), w, 4, n);
    const Matrix v = oracle::expm_taylor(
        -kI * p.tau() * oracle::kron_loops(p.H(), oracle::id(2)) +
        p.delta() * (oracle::kron_loops(p.N(), oracle::ket_bra(2, 1, 0)) -
                     oracle::kron_loops(p.N().adjoint(), oracle::ket_bra(2, 0, 1))));
    Vector psi = reg0.state();
    for (int k = 0; k < n; ++k) psi = dense_step(v, d, w, k, n) * psi;
    const ToyFockRegister out = toyfock_evolve(p, reg0, n);
    EXPECT_LT((out.state() - psi).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ToyFock, ReducedStateIsLatticeWalk) {
    Rng rng(3);
    const int w = 2 * 8 + 5, n = 8;
    const OQBMParams p = sample_params(rng);
    const Vector g = random_ket(2, rng);
    ToyFockRegister reg = toyfock_evolve(p, ToyFockRegister::product(g, w, w / 2, n), n);
    LatticeField f = LatticeField::centered(p.delta(), w / 2, 2);
    f[w / 2] = g * g.adjoint();
    for (int k = 0; k < n; ++k) f = oqbm_step(p, f, true);
    EXPECT_LE(trace_norm(reg.reduced_state() - f.embedded()), 1e-10);
    EXPECT_NEAR(reg.state().norm(), 1.0, 1e-12);
}

TEST(ToyFock, ShiftOrderIsIrrelevant) {
    Rng rng(4);
    const OQBMParams p = sample_params(rng);
    const ToyFockRegister reg0 = ToyFockRegister::product(random_ket(2, rng), 15, 7, 6);
    const ToyFockRegister a = toyfock_evolve(p, reg0, 6, FockOrder::Interleaved);
    const ToyFockRegister b = toyfock_evolve(p, reg0, 6, FockOrder::ShiftsAfter);
    EXPECT_LE((a.state() - b.state()).norm(), 1e-12);
}

TEST(ToyFock, NoiseOperatorsActOnOneProbe) {
    Rng rng(5);
    const int n = 3, sys = 2 * 4;
    Vector psi(sys << n);
    for (int i = 0; i < psi.size(); ++i) psi(i) = cplx(rng.normal(), rng.normal());
    psi.normalize();
    const ToyFockRegister reg(2, 4, n, psi);
    for (int probe = 0; probe < n; ++probe)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                const Matrix op = oracle::kron_loops(oracle::id(sys), noise_operator(i, j, probe, n));
                EXPECT_LT((apply_noise(i, j, probe, reg) - op * psi).cwiseAbs().maxCoeff(), 1e-15);
            }
    // |j><i| on the probe: raising then lowering on a vacuum probe returns it.
    const ToyFockRegister vac = ToyFockRegister::product(Vector::Ones(2).normalized(), 4, 1, n);
    EXPECT_EQ(apply_noise(1, 0, 0, vac).norm(), 0.0);
    const Vector up = apply_noise(0, 1, 0, vac);
    EXPECT_NEAR(up.norm(), 1.0, 1e-15);
    EXPECT_LT((apply_noise(1, 0, 0, ToyFockRegister(2, 4, n, up)) - vac.state()).norm(), 1e-15);
    EXPECT_THROW(apply_noise(2, 0, 0, vac), DomainError);
    EXPECT_THROW(apply_noise(0, 0, n, vac), DomainError);
}
