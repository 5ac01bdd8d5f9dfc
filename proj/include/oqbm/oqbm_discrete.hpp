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

#ifndef OQBM_OQBM_DISCRETE_HPP
#define OQBM_OQBM_DISCRETE_HPP

// The discrete open quantum Brownian motion: Kraus operators B/K, the
// channel on lattice windows of deltaZ, and its repeated-interaction
// dilation. Operators on gyroscope (x) probe are ordered with the probe
// index fastest.

#include <cstdint>
#include <vector>

#include "oqbm/channels.hpp"
#include "oqbm/linalg.hpp"
#include "oqbm/oqw.hpp"

namespace oqbm {

class OQBMParams {
public:
    // An empty M means M = 0.
    OQBMParams(Matrix n, Matrix h, double tau, Matrix m = Matrix());

    const Matrix& N() const { return n_; }
    const Matrix& H() const { return h_; }
    const Matrix& M() const { return m_; }
    double tau() const { return tau_; }
    double delta() const;
    int dim() const { return static_cast<int>(n_.rows()); }
    bool has_M() const;

    OQBMParams with_tau(double tau) const { return OQBMParams(n_, h_, tau, m_); }

private:
    Matrix n_, h_, m_;
    double tau_ = 0.0;
};

struct KrausPair {
    Matrix plus;   // outcome +1, step to the right
    Matrix minus;  // outcome -1, step to the left
};

// (1/sqrt2)(I +- delta N + tau(-iH - N^*N/2 +- M)), complete only to O(tau^{3/2}).
KrausPair kraus_truncated(const OQBMParams& p);

// V_tau = exp(-i tau H (x) I + sqrt(tau) (N (x) |1><0| - N^* (x) |0><1|)).
Matrix vtau(const OQBMParams& p);

// K_+- = (I (x) <+-|) V_tau (I (x) |0>), exactly complete. Requires M = 0.
KrausPair kraus_exact(const OQBMParams& p);

double completeness_defect(const KrausPair& k);

// Lambda_{G,tau}(rho) = K_+ rho K_+^* + K_- rho K_-^*.
Matrix gyroscope_step(const KrausPair& k, const Matrix& rho);
KrausChannel gyroscope_channel(const OQBMParams& p);

enum class Boundary { Absorb, Reflect };

// Site i sits at x = (first_index + i) * delta.
class LatticeField {
public:
    LatticeField(double delta, int first_index, std::vector<Matrix> sites, Boundary boundary = Boundary::Absorb);

    // Zero field on the sites -half_sites..half_sites.
    static LatticeField centered(double delta, int half_sites, int dim, Boundary boundary = Boundary::Absorb);

    double delta() const { return delta_; }
    int first_index() const { return first_index_; }
    int n_sites() const { return static_cast<int>(sites_.size()); }
    int dim() const { return sites_.empty() ? 0 : static_cast<int>(sites_.front().rows()); }
    Boundary boundary() const { return boundary_; }
    double position(int i) const { return (first_index_ + i) * delta_; }
    // Window index of lattice point k * delta, or -1 outside the window.
    int site_of(int lattice_index) const;

    const std::vector<Matrix>& sites() const { return sites_; }
    std::vector<Matrix>& sites() { return sites_; }
    const Matrix& operator[](int i) const { return sites_[i]; }
    Matrix& operator[](int i) { return sites_[i]; }

    double leaked() const { return leaked_; }
    void add_leak(double mass) { leaked_ += mass; }

    double total_trace() const;
    Matrix gyroscope_marginal() const;
    DiagonalState diagonal_state() const;
    // sum_x rho(x) (x) |x><x| on gyroscope (x) window.
    Matrix embedded() const;

private:
    double delta_;
    int first_index_;
    std::vector<Matrix> sites_;
    Boundary boundary_;
    double leaked_ = 0.0;
};

// Half-width of a window that keeps the leak negligible up to time t for
// initial data supported in [-x_range, x_range].
double default_half_width(const OQBMParams& p, double t, double x_range = 0.0);

// output(x) = B_- rho(x + delta) B_-^* + B_+ rho(x - delta) B_+^*.
LatticeField oqbm_step(const KrausPair& k, const LatticeField& field);
LatticeField oqbm_step(const OQBMParams& p, const LatticeField& field, bool use_exact);

// The OQBM as an open quantum walk on the cyclic window Z/n_sites.
OQWKernel oqbm_ring_kernel(const OQBMParams& p, int n_sites);

// Trace-norm distance between Tr_p(R V (rho (x) |0><0|) V^* R^*) and one
// channel step (exact or truncated Kraus). The window needs two empty sites
// at each end.
double dilation_check(const OQBMParams& p, const LatticeField& field, bool use_exact = true);

// Dense R_tau = D (x) |+><+| + D^* (x) |-><-| on window (x) probe, D the
// cyclic right shift.
Matrix shift_unitary(int window);

struct LatticeTrajectory {
    double x0 = 0.0;
    double delta = 0.0;
    std::vector<int> increments;     // Delta_k in {+1, -1}
    std::vector<double> positions;  // x0 + delta * partial sums
    std::vector<DensityMatrix> states;
    std::uint64_t rng_seed = 0;
    std::uint64_t stream = 0;
};

// Repeated probe measurement of the observable |0><1| + |1><0| after each
// interaction. Consumes one uniform per step, in the same way sample_step
// does on oqbm_ring_kernel.
LatticeTrajectory probe_measurement_unravel(const OQBMParams& p, const DensityMatrix& rho0, double x0, int n_steps,
                                            std::uint64_t seed, std::uint64_t stream);

struct UnravelEnsemble {
    std::vector<double> endpoints;  // X_n per path, in path order
    Matrix mean_state;              // E(rho_n)
    double mean_state_stderr = 0.0;  // Frobenius bound on E||error||_1
};

UnravelEnsemble unravel_ensemble(const OQBMParams& p, const DensityMatrix& rho0, double x0, int n_steps,
                                 std::size_t n_paths, std::uint64_t seed, int threads = 0);

}  // namespace oqbm

#endif  // OQBM_OQBM_DISCRETE_HPP
