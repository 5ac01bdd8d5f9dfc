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

#include "oqbm/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oqbm/errors.hpp"
#include "oqbm/oqbm_discrete.hpp"
#include "oqbm/rng.hpp"

namespace oqbm {

namespace {

Matrix unvec(const Vector& v, int d) {
    Matrix m(d, d);
    for (int c = 0; c < d; ++c) m.col(c) = v.segment(static_cast<Eigen::Index>(c) * d, d);
    return m;
}

Vector vec(const Matrix& m) {
    const int d = static_cast<int>(m.rows());
    Vector v(static_cast<Eigen::Index>(d) * d);
    for (int c = 0; c < d; ++c) v.segment(static_cast<Eigen::Index>(c) * d, d) = m.col(c);
    return v;
}

// Method-of-lines right-hand side of the one-dimensional OQBM equation with
// zero ghost values, in a fixed matrix type.
template <class Mat>
struct LineOperator {
    Mat h, n, n_adj, jump, speed;
    double dx;

    LineOperator(const LindbladGenerator& g, double dx_)
        : h(g.H()),
          n(g.N()),
          n_adj(g.N().adjoint()),
          jump(g.N().adjoint() * g.N()),
          speed(g.N() + g.N().adjoint()),
          dx(dx_) {}

    Mat lindblad(const Mat& q) const {
        return cplx(0.0, -1.0) * (h * q - q * h) + n * q * n_adj - 0.5 * (jump * q + q * jump);
    }

    // Writes dq/dt and returns d/dt of dx * sum Tr q (the boundary flux).
    double operator()(const std::vector<Mat>& q, std::vector<Mat>& out) const {
        const std::size_t len = q.size();
        const double inv2 = 1.0 / (2.0 * dx);
        const double invsq = 1.0 / (dx * dx);
        const Mat zero = Mat::Zero(q.front().rows(), q.front().cols());
        for (std::size_t i = 0; i < len; ++i) {
            const Mat& c = q[i];
            const Mat& l = i > 0 ? q[i - 1] : zero;
            const Mat& r = i + 1 < len ? q[i + 1] : zero;
            const Mat d1 = (r - l) * inv2;
            out[i] = lindblad(c) + 0.5 * invsq * (r - 2.0 * c + l) - (n * d1 + d1 * n_adj);
        }
        const Mat& first = q.front();
        const Mat& last = q.back();
        return dx * (-0.5 * invsq * (first.trace().real() + last.trace().real()) -
                     inv2 * (speed * (last - first)).trace().real());
    }
};

// RK4 on a line of matrices; returns the mass that left through the ends.
template <class Mat>
double rk4_line(const LineOperator<Mat>& op, std::vector<Mat>& q, double h, int n_steps) {
    const std::size_t len = q.size();
    std::vector<Mat> k1(len), k2(len), k3(len), k4(len), tmp(len);
    double leaked = 0.0;
    for (int s = 0; s < n_steps; ++s) {
        double f1 = op(q, k1);
        for (std::size_t i = 0; i < len; ++i) tmp[i] = q[i] + 0.5 * h * k1[i];
        double f2 = op(tmp, k2);
        for (std::size_t i = 0; i < len; ++i) tmp[i] = q[i] + 0.5 * h * k2[i];
        double f3 = op(tmp, k3);
        for (std::size_t i = 0; i < len; ++i) tmp[i] = q[i] + h * k3[i];
        double f4 = op(tmp, k4);
        for (std::size_t i = 0; i < len; ++i) q[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        leaked -= (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    }
    return leaked;
}

template <class Mat>
double evolve_line(const LindbladGenerator& g, double dx, std::vector<Matrix>& values, double h, int n_steps) {
    LineOperator<Mat> op(g, dx);
    std::vector<Mat> q(values.begin(), values.end());
    double leaked = rk4_line(op, q, h, n_steps);
    for (std::size_t i = 0; i < q.size(); ++i) values[i] = q[i];
    return leaked;
}

double evolve_line_any(const LindbladGenerator& g, double dx, std::vector<Matrix>& values, double h, int n_steps) {
    if (values.empty() || n_steps == 0) return 0.0;
    if (g.dim() == 2) return evolve_line<Eigen::Matrix2cd>(g, dx, values, h, n_steps);
    return evolve_line<Matrix>(g, dx, values, h, n_steps);
}

// Number of RK4 steps of size <= dt covering [0, t].
int step_count(double t, double dt) {
    if (t < 0.0) throw ContractViolation("evolution time must be non-negative");
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (t == 0.0) return 0;
    return static_cast<int>(std::ceil(t / dt - 1e-9));
}

void check_cfl(const Grid& grid, double dt) {
    if (!(grid.dx > 0.0) || grid.n_points <= 0) throw ConfigError("grid: dx and n_points must be positive");
    if (dt > 0.4 * grid.dx * grid.dx * (1.0 + 1e-12)) {
        throw ConfigError("CFL violation: dt = " + std::to_string(dt) + " exceeds 0.4 dx^2 = " +
                          std::to_string(0.4 * grid.dx * grid.dx));
    }
}

}  // namespace

LindbladGenerator::LindbladGenerator(Matrix n, Matrix h) : n_(std::move(n)), h_(std::move(h)) {
    if (n_.rows() != n_.cols() || n_.rows() == 0) throw DimensionError("LindbladGenerator: N must be square");
    if (h_.rows() != n_.rows() || h_.cols() != n_.cols()) throw DimensionError("LindbladGenerator: H and N differ in shape");
    if (hermitian_defect(h_) > tolerances().hermitian) throw ContractViolation("LindbladGenerator: H is not Hermitian");
}

LindbladGenerator LindbladGenerator::from(const OQBMParams& p) { return LindbladGenerator(p.N(), p.H()); }

Matrix lindblad_rhs(const LindbladGenerator& g, const Matrix& rho) {
    if (rho.rows() != g.dim() || rho.cols() != g.dim()) throw DimensionError("lindblad_rhs: state dimension mismatch");
    const Matrix& h = g.H();
    const Matrix& n = g.N();
    const Matrix jump = n.adjoint() * n;
    return -kI * (h * rho - rho * h) + n * rho * n.adjoint() - 0.5 * (jump * rho + rho * jump);
}

Matrix superoperator(const LindbladGenerator& g) {
    const int d = g.dim();
    const Matrix id = Matrix::Identity(d, d);
    const Matrix& h = g.H();
    const Matrix& n = g.N();
    const Matrix jump = n.adjoint() * n;
    return kron(id, -kI * h) + kron(h.transpose(), kI * id) + kron(n.conjugate(), n) - 0.5 * kron(id, jump) -
           0.5 * kron(jump.transpose(), id);
}

Matrix semigroup_apply(const LindbladGenerator& g, const Matrix& rho, double t) {
    if (rho.rows() != g.dim() || rho.cols() != g.dim()) throw DimensionError("semigroup_apply: state dimension mismatch");
    const Matrix e = matrix_exp(t * superoperator(g));
    return unvec(e * vec(rho), g.dim());
}

Matrix evolve_rho_G(const LindbladGenerator& g, const Matrix& rho0, double t, double dt) {
    if (rho0.rows() != g.dim() || rho0.cols() != g.dim()) throw DimensionError("evolve_rho_G: state dimension mismatch");
    const double norm = op_norm(superoperator(g));
    if (dt * norm > 0.1) {
        throw StepSizeError("evolve_rho_G: dt * ||L|| = " + std::to_string(dt * norm) + " exceeds 0.1");
    }
    const int steps = step_count(t, dt);
    if (steps == 0) return rho0;
    const double h = t / steps;
    const double trace0 = rho0.trace().real();
    Matrix rho = rho0;
    for (int s = 0; s < steps; ++s) {
        Matrix k1 = lindblad_rhs(g, rho);
        Matrix k2 = lindblad_rhs(g, rho + 0.5 * h * k1);
        Matrix k3 = lindblad_rhs(g, rho + 0.5 * h * k2);
        Matrix k4 = lindblad_rhs(g, rho + h * k3);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (std::abs(rho.trace().real() - trace0) > 1e-6) throw StepSizeError("evolve_rho_G: trace drifted beyond 1e-6");
    return rho;
}

QField QField::zero(const Grid& grid, int dim) {
    QField q;
    q.grid = grid;
    q.values.assign(grid.n_points, Matrix::Zero(dim, dim));
    return q;
}

double QField::mass() const {
    double s = 0.0;
    for (const Matrix& m : values) s += m.trace().real();
    return grid.dx * s;
}

Matrix QField::gyroscope_marginal() const {
    Matrix s = Matrix::Zero(values.front().rows(), values.front().cols());
    for (const Matrix& m : values) s += m;
    return grid.dx * s;
}

double QField::mean_position() const {
    double s = 0.0;
    for (int i = 0; i < grid.n_points; ++i) s += grid.x(i) * values[i].trace().real();
    return grid.dx * s;
}

QField evolve_Q(const LindbladGenerator& g, const QField& q0, double t, double dt) {
    check_cfl(q0.grid, dt);
    if (static_cast<int>(q0.values.size()) != q0.grid.n_points) throw DimensionError("evolve_Q: grid/value size mismatch");
    for (const Matrix& m : q0.values) {
        if (m.rows() != g.dim() || m.cols() != g.dim()) throw DimensionError("evolve_Q: site matrix dimension mismatch");
    }
    const int steps = step_count(t, dt);
    QField q = q0;
    if (steps == 0) return q;
    q.leaked += evolve_line_any(g, q.grid.dx, q.values, t / steps, steps);
    return q;
}

double summed_trace_distance(const QField& a, const QField& b) {
    if (a.values.size() != b.values.size()) throw DimensionError("summed_trace_distance: grids differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += trace_norm(a.values[i] - b.values[i]);
    return a.grid.dx * s;
}

KKernel KKernel::zero(const Grid& grid, int dim) {
    KKernel k;
    k.grid = grid;
    k.values.assign(static_cast<std::size_t>(grid.n_points) * grid.n_points, Matrix::Zero(dim, dim));
    return k;
}

QField KKernel::diagonal() const {
    QField q;
    q.grid = grid;
    q.leaked = leaked;
    for (int i = 0; i < grid.n_points; ++i) q.values.push_back(at(i, i));
    return q;
}

double KKernel::hermitian_asymmetry() const {
    double worst = 0.0;
    for (int i = 0; i < grid.n_points; ++i) {
        for (int j = i; j < grid.n_points; ++j) worst = std::max(worst, op_norm(at(i, j) - at(j, i).adjoint()));
    }
    return worst;
}

KKernel evolve_K(const LindbladGenerator& g, const KKernel& k0, double t, double dt) {
    check_cfl(k0.grid, dt);
    const int n = k0.grid.n_points;
    if (k0.values.size() != static_cast<std::size_t>(n) * n) throw DimensionError("evolve_K: grid/value size mismatch");
    const int steps = step_count(t, dt);
    KKernel k = k0;
    if (steps == 0) return k;
    const double h = t / steps;
    // Line of offset o: points (i, i - o) for o >= 0 and (j + o, j) style below.
    for (int o = -(n - 1); o <= n - 1; ++o) {
        std::vector<Matrix> line;
        const int i0 = std::max(0, o);
        const int len = n - std::abs(o);
        line.reserve(len);
        for (int s = 0; s < len; ++s) line.push_back(k.at(i0 + s, i0 + s - o));
        double leak = evolve_line_any(g, k.grid.dx, line, h, steps);
        if (o == 0) k.leaked += leak;
        for (int s = 0; s < len; ++s) k.at(i0 + s, i0 + s - o) = line[s];
    }
    return k;
}

DegenerateInvariant::DegenerateInvariant(InvariantReport report)
    : std::runtime_error("invariant state is not unique: null space of dimension " + std::to_string(report.null_dim)),
      report_(std::move(report)) {}

InvariantReport invariant_states(const LindbladGenerator& g) {
    const int d = g.dim();
    const Matrix l = superoperator(g);
    Eigen::JacobiSVD<Matrix> svd(l, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& sv = svd.singularValues();
    const double threshold = 1e-10 * sv(0);
    std::vector<int> null_cols;
    for (int k = 0; k < sv.size(); ++k) {
        if (sv(k) <= threshold) null_cols.push_back(k);
    }
    InvariantReport report;
    report.null_dim = static_cast<int>(null_cols.size());
    if (null_cols.empty()) throw ContractViolation("invariant_states: generator has no null space");

    const int k = report.null_dim;
    Matrix right(d * d, k), left(d * d, k);
    for (int c = 0; c < k; ++c) {
        right.col(c) = svd.matrixV().col(null_cols[c]);
        left.col(c) = svd.matrixU().col(null_cols[c]);
    }
    // Spectral projection onto ker L along ran L (the eigenvalue 0 of a
    // Lindblad generator is semisimple).
    const Matrix projection = right * (left.adjoint() * right).inverse() * left.adjoint();

    // A generic Hermitian element of the null space; its spectral projectors,
    // projected back, are the extreme invariant states.
    Rng rng(0x9E3779B97F4A7C15ULL);
    Matrix generic = Matrix::Zero(d, d);
    for (int c = 0; c < k; ++c) generic += cplx(rng.normal(), rng.normal()) * unvec(right.col(c), d);
    generic = hermitize(generic);
    if (op_norm(generic) < 1e-12) generic = hermitize(kI * generic);
    Eigen::SelfAdjointEigenSolver<Matrix> es(generic);
    const RealVector& ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    int start = 0;
    while (start < d) {
        int end = start + 1;
        while (end < d && ev(end) - ev(end - 1) <= 1e-8 * scale) ++end;
        Matrix pi = Matrix::Zero(d, d);
        for (int c = start; c < end; ++c) pi += es.eigenvectors().col(c) * es.eigenvectors().col(c).adjoint();
        start = end;
        Matrix state = hermitize(unvec(projection * vec(pi), d));
        const double tr = state.trace().real();
        if (tr <= 1e-12) continue;
        state /= tr;
        if (min_eigenvalue(state) < -tolerances().psd) state = psd_project(state, 1e-8);
        bool duplicate = false;
        for (const DensityMatrix& s : report.states) {
            if (trace_norm(s.matrix() - state) < 1e-8) duplicate = true;
        }
        if (duplicate) continue;
        report.residual = std::max(report.residual, op_norm(lindblad_rhs(g, state)));
        report.speeds.push_back(((g.N() + g.N().adjoint()) * state).trace().real());
        report.states.emplace_back(std::move(state), 1e-9);
    }
    return report;
}

DensityMatrix invariant_state(const LindbladGenerator& g) {
    InvariantReport report = invariant_states(g);
    if (!report.unique()) throw DegenerateInvariant(std::move(report));
    return report.states.front();
}

double ballistic_speed(const LindbladGenerator& g) {
    InvariantReport report = invariant_states(g);
    if (!report.unique()) throw DegenerateInvariant(std::move(report));
    return report.speeds.front();
}

}  // namespace oqbm
