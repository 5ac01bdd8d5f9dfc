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

#ifndef OQBM_CHANNELS_HPP
#define OQBM_CHANNELS_HPP

// Quantum channels in Kraus and Stinespring form, projective measurement,
// unnormalized conditional states and indirect (pointer) measurement on
// finite outcome sets.

#include <optional>
#include <vector>

#include "oqbm/linalg.hpp"

namespace oqbm {

class KrausChannel {
public:
    // Throws ContractViolation when ||sum K^*K - I||_op > completeness_tol.
    KrausChannel(std::vector<Matrix> kraus, double completeness_tol = 1e-10);

    static KrausChannel identity(int dim);

    int dim() const { return dim_; }
    const std::vector<Matrix>& kraus() const { return kraus_; }
    double completeness_tol() const { return completeness_tol_; }
    double completeness_defect() const;

private:
    int dim_ = 0;
    std::vector<Matrix> kraus_;
    double completeness_tol_ = 1e-10;
};

// sum_k K rho K^*. The matrix overload applies to any operator.
Matrix apply_channel(const KrausChannel& ch, const Matrix& rho);
DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho);

// Tr_p( V (rho_S (x) rho_p) V^* ) with the system factor first.
DensityMatrix stinespring_step(const DensityMatrix& rho_s, const Matrix& v, const DensityMatrix& rho_p);

// Kraus family K_k = (I (x) <k|) V (I (x) |phi>) in the computational basis
// of the environment factor.
std::vector<Matrix> kraus_from_stinespring(const Matrix& v, int dim_s, const Vector& phi);

// (ch (x) id)(|Omega><Omega|) with |Omega> = sum_i |i>|i> (unnormalized).
Matrix choi_matrix(const KrausChannel& ch);

struct ConditionalState {
    int outcome = 0;
    double probability = 0.0;
    // Empty when the outcome has (numerically) zero probability.
    std::optional<DensityMatrix> state;

    bool is_null() const { return !state.has_value(); }
};

inline constexpr double kNullProbability = 1e-14;

// Projective measurement. Projectors must be mutually orthogonal and resolve
// the identity within 1e-10.
std::vector<ConditionalState> measure_discrete(const DensityMatrix& rho, const std::vector<Matrix>& projectors);

// s(x) = (I (x) <x|) rho (I (x) |x>) for rho on H_G (x) C^{n_outcomes}.
std::vector<Matrix> unnormalized_state(const Matrix& rho, int dim_g, int n_outcomes);

// Conditional states s(x)/Tr s(x), flagged null when Tr s(x) < 1e-14.
std::vector<ConditionalState> conditional_states(const std::vector<Matrix>& unnormalized);

// psi(x, .) is a bijection of {0..n_pointer-1} for every x.
class PointerMap {
public:
    // table[x][y] = psi(x, y)
    explicit PointerMap(std::vector<std::vector<int>> table);

    // psi(x, a0) = x on Y = X.
    static PointerMap perfect(int n, int a0 = 0);
    // psi(x, y) = y.
    static PointerMap trivial(int n_system, int n_pointer);
    // psi(x, y) = (x + y) mod n.
    static PointerMap cyclic_shift(int n);

    int n_system() const { return static_cast<int>(table_.size()); }
    int n_pointer() const { return n_pointer_; }
    int operator()(int x, int y) const { return table_[x][y]; }
    int inverse(int x, int y) const { return inverse_[x][y]; }

private:
    std::vector<std::vector<int>> table_;
    std::vector<std::vector<int>> inverse_;
    int n_pointer_ = 0;
};

// Z_psi : |g, a, y> -> |g, a, psi(x(a), y)> on H_G (x) H_B (x) C^{|Y|} where
// the system algebra is spanned by the given orthogonal projectors on H_B
// (projector x selects outcome x).
Matrix pointer_unitary(const std::vector<Matrix>& system_projectors, const PointerMap& psi, int dim_g);

// Indirect measurement of the diagonal algebra of C^{|X|} in rho on
// H_G (x) C^{|X|}: couple to the pointer in state sigma through Z_psi, then
// read the pointer projectively. Conditional states live on H_G (x) C^{|X|}.
std::vector<ConditionalState> indirect_measure(const DensityMatrix& rho, int dim_g, const PointerMap& psi,
                                               const DensityMatrix& sigma);

// Tr_pointer( Z (rho (x) sigma) Z^* ): the same coupling with the pointer
// left unread.
Matrix indirect_nonselective(const DensityMatrix& rho, int dim_g, const PointerMap& psi,
                             const DensityMatrix& sigma);

// Projectors onto the computational basis of C^n.
std::vector<Matrix> computational_projectors(int n);

}  // namespace oqbm

#endif  // OQBM_CHANNELS_HPP
