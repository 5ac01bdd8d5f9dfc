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

#include "oqbm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "oqbm/errors.hpp"
#include "oqbm/rng.hpp"

namespace oqbm {

namespace {

Tolerances g_tolerances;

void require_square(const Matrix& a, const char* what) {
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(what) + ": expected a square matrix, got " +
                             std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
}

}  // namespace

const Tolerances& tolerances() { return g_tolerances; }
void set_tolerances(const Tolerances& tol) { g_tolerances = tol; }

Matrix matrix_exp(const Matrix& a) {
    require_square(a, "matrix_exp");
    if (a.size() == 0) return a;
    if (!a.allFinite()) throw ContractViolation("matrix_exp: non-finite entries");
    return a.exp();
}

Matrix partial_trace(const Matrix& rho, int dim_a, int dim_b, Keep keep) {
    require_square(rho, "partial_trace");
    if (dim_a <= 0 || dim_b <= 0 || rho.rows() != static_cast<Eigen::Index>(dim_a) * dim_b) {
        throw DimensionError("partial_trace: operator of size " + std::to_string(rho.rows()) +
                             " does not factor as " + std::to_string(dim_a) + "x" +
                             std::to_string(dim_b));
    }
    if (keep == Keep::First) {
        Matrix out = Matrix::Zero(dim_a, dim_a);
        for (int i = 0; i < dim_a; ++i)
            for (int j = 0; j < dim_a; ++j) {
                cplx s = 0.0;
                for (int k = 0; k < dim_b; ++k) s += rho(i * dim_b + k, j * dim_b + k);
                out(i, j) = s;
            }
        return out;
    }
    Matrix out = Matrix::Zero(dim_b, dim_b);
    for (int k = 0; k < dim_a; ++k) out += rho.block(k * dim_b, k * dim_b, dim_b, dim_b);
    return out;
}

double trace_norm(const Matrix& a) {
    require_square(a, "trace_norm");
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues().sum();
}

double op_norm(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

PsdProjection psd_project_report(const Matrix& a, double tol) {
    require_square(a, "psd_project");
    double defect = hermitian_defect(a);
    if (defect > tol) {
        throw ContractViolation("psd_project: input is not Hermitian (defect " +
                                std::to_string(defect) + ")");
    }
    Matrix h = hermitize(a);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const RealVector& ev = es.eigenvalues();
    if (ev.size() == 0 || ev.minCoeff() >= 0.0) return {h, 0.0};

    RealVector clipped = ev.cwiseMax(0.0);
    double removed = (clipped - ev).sum();
    Matrix out = es.eigenvectors() * clipped.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    double target = h.trace().real();
    double now = clipped.sum();
    if (now > 0.0 && target > 0.0) out *= target / now;
    return {hermitize(out), removed};
}

Matrix psd_project(const Matrix& a, double tol) { return psd_project_report(a, tol).matrix; }

Matrix kron(const Matrix& a, const Matrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

Matrix hermitize(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

double hermitian_defect(const Matrix& a) {
    require_square(a, "hermitian_defect");
    return op_norm(a - a.adjoint());
}

RealVector hermitian_eigenvalues(const Matrix& hermitian) {
    require_square(hermitian, "hermitian_eigenvalues");
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(hermitian), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double min_eigenvalue(const Matrix& hermitian) {
    if (hermitian.size() == 0) return 0.0;
    return hermitian_eigenvalues(hermitian).minCoeff();
}

double unitarity_defect(const Matrix& u) {
    require_square(u, "unitarity_defect");
    return op_norm(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
}

Vector basis_vector(int dim, int index) {
    if (index < 0 || index >= dim) throw DimensionError("basis_vector: index out of range");
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return v;
}

Matrix projector(const Vector& v) { return v * v.adjoint(); }

namespace pauli {
Matrix identity(int dim) { return Matrix::Identity(dim, dim); }
Matrix x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}
Matrix y() {
    Matrix m(2, 2);
    m << 0.0, -kI, kI, 0.0;
    return m;
}
Matrix z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}
Matrix minus() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}
Matrix plus() { return minus().adjoint(); }
}  // namespace pauli

DensityMatrix::DensityMatrix(Matrix m) : DensityMatrix(std::move(m), tolerances().trace) {}

DensityMatrix::DensityMatrix(Matrix m, double trace_tol) : m_(std::move(m)) {
    require_square(m_, "DensityMatrix");
    if (!m_.allFinite()) throw ContractViolation("DensityMatrix: non-finite entries");
    const Tolerances& tol = tolerances();
    double herm = hermitian_defect(m_);
    if (herm > tol.hermitian) {
        throw ContractViolation("DensityMatrix: not Hermitian (defect " + std::to_string(herm) + ")");
    }
    double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > trace_tol) {
        throw ContractViolation("DensityMatrix: trace " + std::to_string(tr) + " is not 1");
    }
    double lo = min_eigenvalue(m_);
    if (lo < -tol.psd) {
        throw ContractViolation("DensityMatrix: negative eigenvalue " + std::to_string(lo));
    }
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
    double n = psi.norm();
    if (n == 0.0) throw ContractViolation("DensityMatrix::pure: zero vector");
    Vector u = psi / n;
    return DensityMatrix(projector(u));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::basis_state(int dim, int index) {
    return DensityMatrix(projector(basis_vector(dim, index)));
}

Matrix random_matrix(int dim, Rng& rng, double scale) {
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = cplx(rng.normal(), rng.normal()) * scale;
    return m;
}

Matrix random_hermitian(int dim, Rng& rng, double scale) {
    Matrix g = random_matrix(dim, rng, 1.0);
    return hermitize(g) * scale;
}

Matrix random_unitary(int dim, Rng& rng) {
    Matrix g = random_matrix(dim, rng, 1.0);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
        cplx d = r(j, j);
        double a = std::abs(d);
        if (a > 0.0) q.col(j) *= d / a;
    }
    return q;
}

DensityMatrix random_density_matrix(int dim, Rng& rng, int rank) {
    if (rank <= 0 || rank > dim) rank = dim;
    Matrix g(dim, rank);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < rank; ++j) g(i, j) = cplx(rng.normal(), rng.normal());
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(hermitize(rho));
}

}  // namespace oqbm
