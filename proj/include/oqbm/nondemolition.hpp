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

#ifndef OQBM_NONDEMOLITION_HPP
#define OQBM_NONDEMOLITION_HPP

// Measured evolutions on finite spaces: unitaries U_t on H_G (x) H_B, one
// projective measurement of H_B per time, exact enumeration of the joint
// unraveling, and the comparison with sequential indirect measurement.

#include <vector>

#include "oqbm/channels.hpp"
#include "oqbm/linalg.hpp"
#include "oqbm/oqw.hpp"

namespace oqbm {

class MeasuredEvolution {
public:
    // unitaries[k] = U_{t_k}; algebras[k] = orthogonal projectors on H_B
    // resolving the identity (outcome x of X_{t_k} is the x-th projector).
    MeasuredEvolution(int dim_g, int dim_b, std::vector<Matrix> unitaries, std::vector<std::vector<Matrix>> algebras);

    int dim_g() const { return dim_g_; }
    int dim_b() const { return dim_b_; }
    int n_times() const { return static_cast<int>(unitaries_.size()); }
    const Matrix& unitary(int k) const { return unitaries_[k]; }
    const std::vector<Matrix>& algebra(int k) const { return algebras_[k]; }
    // Projector of outcome x at time k lifted to I_G (x) P.
    Matrix lifted(int k, int x) const;
    // U_{t_k, t_j} = U_{t_k} U_{t_j}^*
    Matrix propagator(int k, int j) const;

private:
    int dim_g_, dim_b_;
    std::vector<Matrix> unitaries_;
    std::vector<std::vector<Matrix>> algebras_;
};

struct NondemolitionReport {
    double max_commutator = 0.0;     // ||[U P U^*, I (x) P']||
    double max_factorization = 0.0;  // ||U P U^* - I_G (x) Tr_G(U P U^*)/d_G||
    bool pass = false;
};

NondemolitionReport check_nondemolition(const MeasuredEvolution& me, double tol = 1e-10);

// Atoms of the algebra generated by the measurements up to time t_k. An
// atom is labelled by its outcome history (x_0, ..., x_k); its projector in
// the picture at t_k is P_{x_k} U_{k,k-1} (...) U_{k,k-1}^*. phi maps an atom
// to X_{t_k}, parent is the connecting map to time t_{k-1}.
struct UnravelingLevel {
    std::vector<std::vector<int>> histories;
    std::vector<double> probability;
    std::vector<Matrix> unnormalized;  // Tr_B(Pi rho_k Pi^*) on H_G
    std::vector<int> phi;
    std::vector<int> parent;

    std::optional<DensityMatrix> conditional_state(int atom) const;
};

struct UnravelingDistribution {
    std::vector<UnravelingLevel> levels;
    bool nondemolition = false;

    const UnravelingLevel& final_level() const { return levels.back(); }
    // eta_{s,t}: atom index at time t -> atom index at time s <= t.
    std::vector<int> connecting_map(int s, int t) const;
};

inline constexpr std::size_t kMaxHistories = 10000;

// rho0 acts on H_G (x) H_B.
UnravelingDistribution exact_unraveling(const MeasuredEvolution& me, const Matrix& rho0);

// Born law of the measurement at t_k in U_{t_k} rho U_{t_k}^*.
std::vector<double> born_marginal(const MeasuredEvolution& me, const Matrix& rho0, int k);

struct PointerSpec {
    PointerMap psi;
    DensityMatrix sigma;  // pointer state; its diagonal is the read-out noise
};

struct ConsistencyReport {
    bool nondemolition = false;
    double joint_tv = 0.0;          // indirect law vs pushforward of the unraveling
    double state_distance = 0.0;    // max trace distance of conditional states
    double marginal_tv = 0.0;       // indirect marginals vs Born marginals
    double mean_state_error = 0.0;  // ||E rho_t - Tr_B(U_t rho U_t^*)||_1, max over t

    double discrepancy() const;
    bool pass(double tol = 1e-10) const { return discrepancy() <= tol; }
};

// Route A: W_k = Z_k U_{t_k, t_{k-1}} ... Z_0 U_{t_0} applied to rho (x)
// sigma_0 (x) ... with each pointer read and discarded in turn. Route B: the
// exact unraveling pushed through Y_k = psi_k(X_k, Y_k^0), Y_k^0 ~ diag(sigma_k).
ConsistencyReport consistency_check(const MeasuredEvolution& me, const Matrix& rho0,
                                    const std::vector<PointerSpec>& pointers);

// Repeated-interaction dilation of an OQW over n_steps. H_B is the position
// space followed by one probe copy of it per step; probes start in
// |reference_vertex>. The unitary of step k is
//   sum_{x,y,z} V(x)_{yz} (x) |y><x|_position (x) |x><z|_probe k,
// where V(x) is any unitary on H_G (x) l2(V) whose column block z = reference
// stacks the Kraus operators K_(y <- x). The measured observable is the
// position at times 0..n_steps.
MeasuredEvolution oqw_dilation(const OQWKernel& kernel, int n_steps, int reference_vertex = 0);

// rho_G (x) |x0><x0| (x) |r><r|^(x) n_steps, matching oqw_dilation.
Matrix oqw_dilation_state(const Matrix& rho_g, int x0, int n_vertices, int n_steps, int reference_vertex = 0);

struct MeasuredInstance {
    MeasuredEvolution evolution;
    Matrix state;
};

// Qubit H_B in |+>, measured in the computational basis at two times with a
// Hadamard in between: the second measurement does not commute with the
// propagated first one.
MeasuredInstance demolition_counterexample();

}  // namespace oqbm

#endif  // OQBM_NONDEMOLITION_HPP
