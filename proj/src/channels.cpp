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

#include "oqbm/channels.hpp"

#include <cmath>
#include <string>

#include "oqbm/errors.hpp"

namespace oqbm {

namespace {

// Normalizes a (numerically) PSD matrix of positive trace into a state,
// absorbing round-off that small-probability outcomes amplify.
DensityMatrix normalized_state(const Matrix& unnormalized, double trace) {
    Matrix m = hermitize(unnormalized / trace);
    if (min_eigenvalue(m) < -tolerances().psd) m = psd_project(m, 1e-6);
    m /= m.trace().real();
    return DensityMatrix(std::move(m), 1e-9);
}

}  // namespace

KrausChannel::KrausChannel(std::vector<Matrix> kraus, double completeness_tol)
    : kraus_(std::move(kraus)), completeness_tol_(completeness_tol) {
    if (kraus_.empty()) throw ContractViolation("KrausChannel: empty Kraus family");
    dim_ = static_cast<int>(kraus_.front().rows());
    for (const Matrix& k : kraus_) {
        if (k.rows() != dim_ || k.cols() != dim_) throw DimensionError("KrausChannel: Kraus operators of mixed shape");
    }
    double defect = completeness_defect();
    if (defect > completeness_tol_) {
        throw ContractViolation("KrausChannel: completeness defect " + std::to_string(defect) +
                                " exceeds tolerance " + std::to_string(completeness_tol_));
    }
}

KrausChannel KrausChannel::identity(int dim) { return KrausChannel({Matrix::Identity(dim, dim)}); }

double KrausChannel::completeness_defect() const {
    Matrix s = Matrix::Zero(dim_, dim_);
    for (const Matrix& k : kraus_) s += k.adjoint() * k;
    return op_norm(s - Matrix::Identity(dim_, dim_));
}

Matrix apply_channel(const KrausChannel& ch, const Matrix& rho) {
    if (rho.rows() != ch.dim() || rho.cols() != ch.dim()) {
        throw DimensionError("apply_channel: state of size " + std::to_string(rho.rows()) +
                             " for a channel on dimension " + std::to_string(ch.dim()));
    }
    Matrix out = Matrix::Zero(ch.dim(), ch.dim());
    for (const Matrix& k : ch.kraus()) out.noalias() += k * rho * k.adjoint();
    return out;
}

DensityMatrix apply_channel(const KrausChannel& ch, const DensityMatrix& rho) {
    Matrix out = hermitize(apply_channel(ch, rho.matrix()));
    double trace_tol = std::max(tolerances().trace, 10.0 * ch.completeness_tol());
    return DensityMatrix(std::move(out), trace_tol);
}

DensityMatrix stinespring_step(const DensityMatrix& rho_s, const Matrix& v, const DensityMatrix& rho_p) {
    const int ds = rho_s.dim();
    const int dp = rho_p.dim();
    if (v.rows() != ds * dp || v.cols() != ds * dp) {
        throw DimensionError("stinespring_step: unitary does not act on system (x) environment");
    }
    double defect = unitarity_defect(v);
    if (defect > tolerances().unitary) {
        throw ContractViolation("stinespring_step: coupling is not unitary (defect " + std::to_string(defect) + ")");
    }
    Matrix joint = kron(rho_s.matrix(), rho_p.matrix());
    Matrix evolved = v * joint * v.adjoint();
    return DensityMatrix(hermitize(partial_trace(evolved, ds, dp, Keep::First)));
}

std::vector<Matrix> kraus_from_stinespring(const Matrix& v, int dim_s, const Vector& phi) {
    const int dp = static_cast<int>(phi.size());
    if (v.rows() != dim_s * dp || v.cols() != dim_s * dp) {
        throw DimensionError("kraus_from_stinespring: unitary does not act on system (x) environment");
    }
    std::vector<Matrix> out;
    out.reserve(dp);
    for (int k = 0; k < dp; ++k) {
        Matrix kk = Matrix::Zero(dim_s, dim_s);
        for (int i = 0; i < dim_s; ++i)
            for (int j = 0; j < dim_s; ++j) {
                cplx s = 0.0;
                for (int m = 0; m < dp; ++m) s += v(i * dp + k, j * dp + m) * phi(m);
                kk(i, j) = s;
            }
        out.push_back(std::move(kk));
    }
    return out;
}

Matrix choi_matrix(const KrausChannel& ch) {
    const int d = ch.dim();
    Vector omega = Vector::Zero(d * d);
    for (int i = 0; i < d; ++i) omega(i * d + i) = 1.0;
    Matrix out = Matrix::Zero(d * d, d * d);
    const Matrix id = Matrix::Identity(d, d);
    for (const Matrix& k : ch.kraus()) {
        Vector w = kron(k, id) * omega;
        out.noalias() += w * w.adjoint();
    }
    return out;
}

std::vector<ConditionalState> measure_discrete(const DensityMatrix& rho, const std::vector<Matrix>& projectors) {
    const int d = rho.dim();
    Matrix sum = Matrix::Zero(d, d);
    for (std::size_t a = 0; a < projectors.size(); ++a) {
        const Matrix& p = projectors[a];
        if (p.rows() != d || p.cols() != d) throw DimensionError("measure_discrete: projector of wrong size");
        sum += p;
        for (std::size_t b = a + 1; b < projectors.size(); ++b) {
            if ((p * projectors[b]).cwiseAbs().maxCoeff() > 1e-10) {
                throw ContractViolation("measure_discrete: projectors are not mutually orthogonal");
            }
        }
    }
    if (op_norm(sum - Matrix::Identity(d, d)) > 1e-10) {
        throw ContractViolation("measure_discrete: projectors do not resolve the identity");
    }
    std::vector<ConditionalState> out;
    out.reserve(projectors.size());
    for (std::size_t a = 0; a < projectors.size(); ++a) {
        const Matrix& p = projectors[a];
        Matrix post = p * rho.matrix() * p;
        double prob = post.trace().real();
        ConditionalState cs;
        cs.outcome = static_cast<int>(a);
        cs.probability = std::max(prob, 0.0);
        if (prob >= kNullProbability) cs.state = normalized_state(post, prob);
        out.push_back(std::move(cs));
    }
    return out;
}

std::vector<Matrix> unnormalized_state(const Matrix& rho, int dim_g, int n_outcomes) {
    if (rho.rows() != static_cast<Eigen::Index>(dim_g) * n_outcomes || rho.cols() != rho.rows()) {
        throw DimensionError("unnormalized_state: operator does not act on H_G (x) C^|X|");
    }
    std::vector<Matrix> out;
    out.reserve(n_outcomes);
    for (int x = 0; x < n_outcomes; ++x) {
        Matrix s(dim_g, dim_g);
        for (int i = 0; i < dim_g; ++i)
            for (int j = 0; j < dim_g; ++j) s(i, j) = rho(i * n_outcomes + x, j * n_outcomes + x);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ConditionalState> conditional_states(const std::vector<Matrix>& unnormalized) {
    std::vector<ConditionalState> out;
    out.reserve(unnormalized.size());
    for (std::size_t x = 0; x < unnormalized.size(); ++x) {
        ConditionalState cs;
        cs.outcome = static_cast<int>(x);
        double p = unnormalized[x].trace().real();
        cs.probability = std::max(p, 0.0);
        if (p >= kNullProbability) cs.state = normalized_state(unnormalized[x], p);
        out.push_back(std::move(cs));
    }
    return out;
}

PointerMap::PointerMap(std::vector<std::vector<int>> table) : table_(std::move(table)) {
    if (table_.empty()) throw ContractViolation("PointerMap: empty system set");
    n_pointer_ = static_cast<int>(table_.front().size());
    if (n_pointer_ == 0) throw ContractViolation("PointerMap: empty pointer set");
    inverse_.assign(table_.size(), std::vector<int>(n_pointer_, -1));
    for (std::size_t x = 0; x < table_.size(); ++x) {
        if (static_cast<int>(table_[x].size()) != n_pointer_) {
            throw ContractViolation("PointerMap: ragged table");
        }
        for (int y = 0; y < n_pointer_; ++y) {
            int image = table_[x][y];
            if (image < 0 || image >= n_pointer_ || inverse_[x][image] != -1) {
                throw ContractViolation("PointerMap: psi(" + std::to_string(x) + ", .) is not a bijection");
            }
            inverse_[x][image] = y;
        }
    }
}

PointerMap PointerMap::perfect(int n, int a0) {
    // psi(x, .) is the transposition (a0 x), so psi(x, a0) = x.
    std::vector<std::vector<int>> t(n, std::vector<int>(n));
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) t[x][y] = (y == a0) ? x : (y == x ? a0 : y);
    return PointerMap(std::move(t));
}

PointerMap PointerMap::trivial(int n_system, int n_pointer) {
    std::vector<std::vector<int>> t(n_system, std::vector<int>(n_pointer));
    for (int x = 0; x < n_system; ++x)
        for (int y = 0; y < n_pointer; ++y) t[x][y] = y;
    return PointerMap(std::move(t));
}

PointerMap PointerMap::cyclic_shift(int n) {
    std::vector<std::vector<int>> t(n, std::vector<int>(n));
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) t[x][y] = (x + y) % n;
    return PointerMap(std::move(t));
}

Matrix pointer_unitary(const std::vector<Matrix>& system_projectors, const PointerMap& psi, int dim_g) {
    if (static_cast<int>(system_projectors.size()) != psi.n_system()) {
        throw DimensionError("pointer_unitary: one projector per system outcome is required");
    }
    const int db = static_cast<int>(system_projectors.front().rows());
    const int ny = psi.n_pointer();
    const Matrix id_g = Matrix::Identity(dim_g, dim_g);
    Matrix z = Matrix::Zero(dim_g * db * ny, dim_g * db * ny);
    for (int x = 0; x < psi.n_system(); ++x) {
        Matrix perm = Matrix::Zero(ny, ny);
        for (int y = 0; y < ny; ++y) perm(psi(x, y), y) = 1.0;
        z += kron(kron(id_g, system_projectors[x]), perm);
    }
    return z;
}

std::vector<Matrix> computational_projectors(int n) {
    std::vector<Matrix> out;
    out.reserve(n);
    for (int x = 0; x < n; ++x) out.push_back(projector(basis_vector(n, x)));
    return out;
}

namespace {

Matrix coupled_state(const DensityMatrix& rho, int dim_g, const PointerMap& psi, const DensityMatrix& sigma) {
    const int nx = psi.n_system();
    if (rho.dim() != dim_g * nx) {
        throw DimensionError("indirect_measure: state does not act on H_G (x) C^|X|");
    }
    if (sigma.dim() != psi.n_pointer()) throw DimensionError("indirect_measure: pointer state of wrong size");
    Matrix z = pointer_unitary(computational_projectors(nx), psi, dim_g);
    return z * kron(rho.matrix(), sigma.matrix()) * z.adjoint();
}

}  // namespace

std::vector<ConditionalState> indirect_measure(const DensityMatrix& rho, int dim_g, const PointerMap& psi,
                                               const DensityMatrix& sigma) {
    Matrix joint = coupled_state(rho, dim_g, psi, sigma);
    // The pointer is the fastest index, so unnormalized_state reads it out.
    return conditional_states(unnormalized_state(joint, dim_g * psi.n_system(), psi.n_pointer()));
}

Matrix indirect_nonselective(const DensityMatrix& rho, int dim_g, const PointerMap& psi, const DensityMatrix& sigma) {
    Matrix joint = coupled_state(rho, dim_g, psi, sigma);
    return partial_trace(joint, dim_g * psi.n_system(), psi.n_pointer(), Keep::First);
}

}  // namespace oqbm
