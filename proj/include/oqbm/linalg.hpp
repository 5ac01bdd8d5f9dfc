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

#ifndef OQBM_LINALG_HPP
#define OQBM_LINALG_HPP

// Dense complex linear algebra for the small Hilbert spaces used throughout
// the toolkit: gyroscope spaces of dimension 2-4, lattice windows of a few
// hundred sites and toy Fock registers handled as state vectors.
//
// Bipartite spaces A (x) B are laid out with the B index running fastest,
// i.e. |a, b> sits at position a * dim_b + b, matching Eigen's
// kroneckerProduct(A, B).

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace oqbm {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};

// Global numerical tolerances. Read by the validating constructors and
// contract checks; meant to be set once at start-up.
struct Tolerances {
    double hermitian = 1e-12;  // ||A - A^*||_op
    double psd = 1e-10;        // -min eigenvalue
    double trace = 1e-10;      // |Tr rho - 1|
    double unitary = 1e-10;    // ||U^* U - I||_op
};

const Tolerances& tolerances();
void set_tolerances(const Tolerances& tol);

// e^A by scaling and squaring with a degree-13 Pade approximant.
Matrix matrix_exp(const Matrix& a);

enum class Keep { First, Second };

// Partial trace of an operator on A (x) B; `keep` selects the factor that
// survives.
Matrix partial_trace(const Matrix& rho, int dim_a, int dim_b, Keep keep);

// Schatten-1 norm (sum of singular values).
double trace_norm(const Matrix& a);

// Schatten-infinity norm (largest singular value).
double op_norm(const Matrix& a);

struct PsdProjection {
    Matrix matrix;
    double clipped = 0.0;  // sum of |negative eigenvalues| removed
};

// Clips negative eigenvalues of a Hermitian matrix to zero and rescales the
// result to the input trace. Throws ContractViolation when `a` is further
// than `tol` from Hermitian.
PsdProjection psd_project_report(const Matrix& a, double tol);
Matrix psd_project(const Matrix& a, double tol);

Matrix kron(const Matrix& a, const Matrix& b);
Matrix hermitize(const Matrix& a);
double hermitian_defect(const Matrix& a);
double min_eigenvalue(const Matrix& hermitian);
double unitarity_defect(const Matrix& u);
RealVector hermitian_eigenvalues(const Matrix& hermitian);

Vector basis_vector(int dim, int index);
Matrix projector(const Vector& v);

namespace pauli {
Matrix identity(int dim = 2);
Matrix x();
Matrix y();
Matrix z();
// |1><0|: lowers |0> to |1>, annihilates |1>.
Matrix minus();
Matrix plus();
}  // namespace pauli

// Hermitian, positive semi-definite, unit trace.
class DensityMatrix {
public:
    // Validates against tolerances(); `trace_tol` overrides the trace check.
    explicit DensityMatrix(Matrix m);
    DensityMatrix(Matrix m, double trace_tol);

    static DensityMatrix pure(const Vector& psi);
    static DensityMatrix maximally_mixed(int dim);
    static DensityMatrix basis_state(int dim, int index);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    operator const Matrix&() const { return m_; }

private:
    Matrix m_;
};

class Rng;

Matrix random_hermitian(int dim, Rng& rng, double scale = 1.0);
Matrix random_matrix(int dim, Rng& rng, double scale = 1.0);
// Haar unitary via QR of a Ginibre matrix.
Matrix random_unitary(int dim, Rng& rng);
// Hilbert-Schmidt random density matrix of the given rank (0 = full).
DensityMatrix random_density_matrix(int dim, Rng& rng, int rank = 0);

}  // namespace oqbm

#endif  // OQBM_LINALG_HPP
