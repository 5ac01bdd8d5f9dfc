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

#ifndef OQBM_LINDBLAD_HPP
#define OQBM_LINDBLAD_HPP

// Deterministic evolutions: the gyroscope semigroup, the density-matrix
// function Q_t(x), the kernel K_t(x, y), and invariant states.

#include <stdexcept>
#include <vector>

#include "oqbm/linalg.hpp"

namespace oqbm {

class OQBMParams;

class LindbladGenerator {
public:
    LindbladGenerator(Matrix n, Matrix h);
    static LindbladGenerator from(const OQBMParams& p);

    const Matrix& N() const { return n_; }
    const Matrix& H() const { return h_; }
    int dim() const { return static_cast<int>(n_.rows()); }

private:
    Matrix n_, h_;
};

// -i[H, rho] + N rho N^* - {N^*N, rho}/2
Matrix lindblad_rhs(const LindbladGenerator& g, const Matrix& rho);

// Matrix of L acting on column-stacked vec(rho).
Matrix superoperator(const LindbladGenerator& g);

// e^{tL} rho via the exponential of the superoperator.
Matrix semigroup_apply(const LindbladGenerator& g, const Matrix& rho, double t);

// RK4 with step at most dt. Requires dt * ||L|| <= 0.1.
Matrix evolve_rho_G(const LindbladGenerator& g, const Matrix& rho0, double t, double dt);

struct Grid {
    double x_min = 0.0;
    double dx = 0.0;
    int n_points = 0;

    double x(int i) const { return x_min + dx * i; }
};

// Q(x_i) on a uniform grid; the boundary is Dirichlet zero with the mass
// flowing out of the grid accumulated in `leaked`.
struct QField {
    Grid grid;
    std::vector<Matrix> values;
    double leaked = 0.0;

    static QField zero(const Grid& grid, int dim);

    // Integrals are trapezoid sums over the grid extended by its zero ghost
    // points, i.e. dx * sum_i.
    double mass() const;
    Matrix gyroscope_marginal() const;
    double mean_position() const;
};

// dQ/dt = L(Q) + Q''/2 - (N Q' + Q' N^*), centered differences and RK4.
// Throws ConfigError unless dt <= 0.4 dx^2.
QField evolve_Q(const LindbladGenerator& g, const QField& q0, double t, double dt);

// dx * sum_i ||a_i - b_i||_1
double summed_trace_distance(const QField& a, const QField& b);

struct KKernel {
    Grid grid;                     // shared by x and y
    std::vector<Matrix> values;    // K(x_i, y_j) at i * n + j
    double leaked = 0.0;           // mass lost through the diagonal ends

    static KKernel zero(const Grid& grid, int dim);
    const Matrix& at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.n_points + j]; }
    Matrix& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.n_points + j]; }

    QField diagonal() const;
    double hermitian_asymmetry() const;  // max ||K(x,y) - K(y,x)^*||_op
};

// dK/dt = L(K) + (dx+dy)^2 K / 2 - N (dx+dy)K - ((dx+dy)K) N^*. The
// derivative along the diagonal direction is differenced along that
// direction, so each line x - y = const evolves as a one-dimensional field.
KKernel evolve_K(const LindbladGenerator& g, const KKernel& k0, double t, double dt);

struct InvariantReport {
    int null_dim = 0;
    std::vector<DensityMatrix> states;  // extreme invariant states found
    std::vector<double> speeds;         // Tr((N + N^*) rho) per state
    double residual = 0.0;              // max ||L(rho)||_op over states

    bool unique() const { return null_dim == 1; }
};

InvariantReport invariant_states(const LindbladGenerator& g);

// Thrown by invariant_state / ballistic_speed when the null space of L has
// more than one dimension.
class DegenerateInvariant : public std::runtime_error {
public:
    explicit DegenerateInvariant(InvariantReport report);
    const InvariantReport& report() const { return report_; }

private:
    InvariantReport report_;
};

DensityMatrix invariant_state(const LindbladGenerator& g);
double ballistic_speed(const LindbladGenerator& g);

}  // namespace oqbm

#endif  // OQBM_LINDBLAD_HPP
