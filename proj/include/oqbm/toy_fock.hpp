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

#ifndef OQBM_TOY_FOCK_HPP
#define OQBM_TOY_FOCK_HPP

// Pure states on gyroscope (x) lattice window (x) n probe qubits, with the
// last probe as the fastest index. Probe k interacts at step k.

#include "oqbm/linalg.hpp"
#include "oqbm/oqbm_discrete.hpp"

namespace oqbm {

inline constexpr int kMaxProbes = 12;

class ToyFockRegister {
public:
    ToyFockRegister(int gyro_dim, int window, int n_probes, Vector state);

    // gyro (x) |site> (x) |0...0>.
    static ToyFockRegister product(const Vector& gyro, int window, int site, int n_probes);

    int gyro_dim() const { return gyro_dim_; }
    int window() const { return window_; }
    int n_probes() const { return n_probes_; }
    const Vector& state() const { return state_; }
    Vector& state() { return state_; }

    // Tr over the probes: a matrix on gyroscope (x) window.
    Matrix reduced_state() const;

private:
    int gyro_dim_;
    int window_;
    int n_probes_;
    Vector state_;
};

enum class FockOrder {
    Interleaved,   // r_n v_n ... r_1 v_1
    ShiftsAfter,   // (r_n ... r_1)(v_n ... v_1)
};

// V_tau on (gyroscope, probe k) and R_tau on (window, probe k). Exact
// Kraus only (M = 0).
void apply_interaction(const Matrix& v, int probe, ToyFockRegister& reg);
void apply_shift(int probe, ToyFockRegister& reg);

ToyFockRegister toyfock_evolve(const OQBMParams& p, const ToyFockRegister& psi0, int n_steps,
                               FockOrder order = FockOrder::Interleaved);

// a^i_j(k) = |j><i| on probe k (0-based), applied to the register.
Vector apply_noise(int i, int j, int probe, const ToyFockRegister& reg);

// Dense a^i_j(k) on the probe register alone; at most 10 probes.
Matrix noise_operator(int i, int j, int probe, int n_probes);

}  // namespace oqbm

#endif  // OQBM_TOY_FOCK_HPP
