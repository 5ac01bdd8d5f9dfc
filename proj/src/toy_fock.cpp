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

#include "oqbm/toy_fock.hpp"

#include <cmath>
#include <string>

#include "oqbm/errors.hpp"

namespace oqbm {

namespace {

void check_probe(const ToyFockRegister& reg, int probe) {
    if (probe < 0 || probe >= reg.n_probes()) {
        throw DomainError("probe index " + std::to_string(probe) + " outside the register");
    }
}

}  // namespace

ToyFockRegister::ToyFockRegister(int gyro_dim, int window, int n_probes, Vector state)
    : gyro_dim_(gyro_dim), window_(window), n_probes_(n_probes), state_(std::move(state)) {
    if (n_probes_ < 0 || n_probes_ > kMaxProbes) {
        throw CapacityError("ToyFockRegister: " + std::to_string(n_probes_) + " probes exceeds the cap of " +
                            std::to_string(kMaxProbes));
    }
    if (gyro_dim_ <= 0 || window_ <= 0) throw ContractViolation("ToyFockRegister: empty factor");
    const Eigen::Index len = static_cast<Eigen::Index>(gyro_dim_) * window_ << n_probes_;
    if (state_.size() != len) throw DimensionError("ToyFockRegister: state vector of wrong length");
    if (std::abs(state_.norm() - 1.0) > 1e-10) throw ContractViolation("ToyFockRegister: state not normalized");
}

ToyFockRegister ToyFockRegister::product(const Vector& gyro, int window, int site, int n_probes) {
    if (site < 0 || site >= window) throw DomainError("ToyFockRegister::product: site outside the window");
    if (n_probes < 0 || n_probes > kMaxProbes) throw CapacityError("ToyFockRegister::product: too many probes");
    const int d = static_cast<int>(gyro.size());
    const Eigen::Index stride = Eigen::Index{1} << n_probes;
    Vector state = Vector::Zero(static_cast<Eigen::Index>(d) * window * stride);
    for (int g = 0; g < d; ++g) state((static_cast<Eigen::Index>(g) * window + site) * stride) = gyro(g);
    return ToyFockRegister(d, window, n_probes, std::move(state));
}

Matrix ToyFockRegister::reduced_state() const {
    const Eigen::Index stride = Eigen::Index{1} << n_probes_;
    const Eigen::Index rows = static_cast<Eigen::Index>(gyro_dim_) * window_;
    // Column-major map: column r holds the probe amplitudes of system index r.
    Eigen::Map<const Matrix> psi(state_.data(), stride, rows);
    return psi.transpose() * psi.conjugate();
}

void apply_interaction(const Matrix& v, int probe, ToyFockRegister& reg) {
    check_probe(reg, probe);
    const int d = reg.gyro_dim();
    if (v.rows() != 2 * d || v.cols() != 2 * d) throw DimensionError("apply_interaction: V must act on gyroscope (x) qubit");
    const Eigen::Index stride = Eigen::Index{1} << reg.n_probes();
    const Eigen::Index bit = Eigen::Index{1} << (reg.n_probes() - 1 - probe);
    const Eigen::Index gyro_stride = static_cast<Eigen::Index>(reg.window()) * stride;
    Vector& s = reg.state();
    Vector local(2 * d);
    for (Eigen::Index rest = 0; rest < gyro_stride; ++rest) {
        if (rest & bit) continue;
        for (int g = 0; g < d; ++g) {
            local(2 * g) = s(g * gyro_stride + rest);
            local(2 * g + 1) = s(g * gyro_stride + rest + bit);
        }
        Vector out = v * local;
        for (int g = 0; g < d; ++g) {
            s(g * gyro_stride + rest) = out(2 * g);
            s(g * gyro_stride + rest + bit) = out(2 * g + 1);
        }
    }
}

void apply_shift(int probe, ToyFockRegister& reg) {
    check_probe(reg, probe);
    const int w = reg.window();
    const Eigen::Index stride = Eigen::Index{1} << reg.n_probes();
    const Eigen::Index bit = Eigen::Index{1} << (reg.n_probes() - 1 - probe);
    const double s2 = 1.0 / std::sqrt(2.0);
    Vector& s = reg.state();
    Vector plus(w), minus(w);
    for (int g = 0; g < reg.gyro_dim(); ++g) {
        const Eigen::Index base = static_cast<Eigen::Index>(g) * w * stride;
        for (Eigen::Index low = 0; low < stride; ++low) {
            if (low & bit) continue;
            // Decompose the probe qubit in the |+>, |-> basis, shift, recombine.
            for (int z = 0; z < w; ++z) {
                const cplx a0 = s(base + z * stride + low);
                const cplx a1 = s(base + z * stride + low + bit);
                plus((z + 1) % w) = s2 * (a0 + a1);
                minus((z + w - 1) % w) = s2 * (a0 - a1);
            }
            for (int z = 0; z < w; ++z) {
                s(base + z * stride + low) = s2 * (plus(z) + minus(z));
                s(base + z * stride + low + bit) = s2 * (plus(z) - minus(z));
            }
        }
    }
}

ToyFockRegister toyfock_evolve(const OQBMParams& p, const ToyFockRegister& psi0, int n_steps, FockOrder order) {
    if (p.dim() != psi0.gyro_dim()) throw DimensionError("toyfock_evolve: gyroscope dimension mismatch");
    if (n_steps < 0 || n_steps > psi0.n_probes()) {
        throw CapacityError("toyfock_evolve: " + std::to_string(n_steps) + " steps need as many probes, register has " +
                            std::to_string(psi0.n_probes()));
    }
    if (p.has_M()) throw Unsupported("toyfock_evolve: the dilation is defined for M = 0 only");
    const Matrix v = vtau(p);
    ToyFockRegister reg = psi0;
    if (order == FockOrder::Interleaved) {
        for (int k = 0; k < n_steps; ++k) {
            apply_interaction(v, k, reg);
            apply_shift(k, reg);
        }
    } else {
        for (int k = 0; k < n_steps; ++k) apply_interaction(v, k, reg);
        for (int k = 0; k < n_steps; ++k) apply_shift(k, reg);
    }
    return reg;
}

Vector apply_noise(int i, int j, int probe, const ToyFockRegister& reg) {
    check_probe(reg, probe);
    if (i < 0 || i > 1 || j < 0 || j > 1) throw DomainError("apply_noise: indices must be 0 or 1");
    const Eigen::Index bit = Eigen::Index{1} << (reg.n_probes() - 1 - probe);
    const Vector& s = reg.state();
    Vector out = Vector::Zero(s.size());
    for (Eigen::Index idx = 0; idx < s.size(); ++idx) {
        const int b = (idx & bit) ? 1 : 0;
        if (b != i) continue;
        const Eigen::Index target = j ? (idx | bit) : (idx & ~bit);
        out(target) += s(idx);
    }
    return out;
}

Matrix noise_operator(int i, int j, int probe, int n_probes) {
    if (n_probes > 10) throw CapacityError("noise_operator: dense probe operators limited to 10 probes");
    if (probe < 0 || probe >= n_probes) throw DomainError("noise_operator: probe outside the register");
    Matrix single = Matrix::Zero(2, 2);
    single(j, i) = 1.0;
    Matrix out = Matrix::Identity(1, 1);
    for (int k = 0; k < n_probes; ++k) out = kron(out, k == probe ? single : Matrix::Identity(2, 2));
    return out;
}

}  // namespace oqbm
