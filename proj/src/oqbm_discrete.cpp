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

#include "oqbm/oqbm_discrete.hpp"

#include <cmath>
#include <string>

#include "oqbm/errors.hpp"
#include "oqbm/parallel.hpp"

namespace oqbm {

namespace {

Matrix zero_like(const Matrix& a) { return Matrix::Zero(a.rows(), a.cols()); }

// Binary unravelling of the pair (K_+, K_-) in a fixed matrix type.
template <class Mat>
struct BinarySampler {
    Mat plus, minus, effect_plus_conj, effect_minus_conj;

    explicit BinarySampler(const KrausPair& k)
        : plus(k.plus),
          minus(k.minus),
          effect_plus_conj((k.plus.adjoint() * k.plus).conjugate()),
          effect_minus_conj((k.minus.adjoint() * k.minus).conjugate()) {}

    // Returns the increment and updates rho in place.
    int step(Mat& rho, Rng& rng) const {
        double pp = std::max(0.0, effect_plus_conj.cwiseProduct(rho).sum().real());
        double pm = std::max(0.0, effect_minus_conj.cwiseProduct(rho).sum().real());
        double total = pp + pm;
        if (total < kNullProbability) throw DegenerateStep("probe measurement: both outcomes have zero probability");
        double u = rng.uniform() * total;
        bool right = pp > 0.0 && (u < pp || pm == 0.0);
        const Mat& k = right ? plus : minus;
        Mat next = k * rho * k.adjoint();
        rho = (next + next.adjoint()) * (0.5 / (right ? pp : pm));
        return right ? 1 : -1;
    }
};

struct EnsembleBlock {
    std::vector<double> endpoints;
    Matrix sum;
    Eigen::MatrixXd sum_sq;
};

template <class Mat>
void run_unravel(const KrausPair& k, const Matrix& rho0, double x0, double delta, int n_steps, std::size_t n_paths,
                 std::uint64_t seed, int threads, UnravelEnsemble& out) {
    const BinarySampler<Mat> sampler(k);
    const Mat start = rho0;
    const int d = static_cast<int>(rho0.rows());
    const std::size_t n_blocks = block_count(n_paths);
    std::vector<EnsembleBlock> blocks(n_blocks);
    parallel_blocks(n_blocks, threads, [&](std::size_t b) {
        EnsembleBlock& blk = blocks[b];
        const std::size_t begin = b * kEnsembleBlock;
        const std::size_t end = std::min(n_paths, begin + kEnsembleBlock);
        blk.sum = Matrix::Zero(d, d);
        blk.sum_sq = Eigen::MatrixXd::Zero(d, d);
        blk.endpoints.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = Rng::stream(seed, i);
            Mat rho = start;
            long walk = 0;
            for (int s = 0; s < n_steps; ++s) walk += sampler.step(rho, rng);
            blk.endpoints.push_back(x0 + delta * static_cast<double>(walk));
            blk.sum += rho;
            blk.sum_sq += rho.cwiseAbs2();
        }
    });
    Matrix sum = Matrix::Zero(d, d);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(d, d);
    out.endpoints.clear();
    out.endpoints.reserve(n_paths);
    for (const EnsembleBlock& blk : blocks) {
        out.endpoints.insert(out.endpoints.end(), blk.endpoints.begin(), blk.endpoints.end());
        sum += blk.sum;
        sum_sq += blk.sum_sq;
    }
    const double n = static_cast<double>(n_paths);
    out.mean_state = sum / n;
    Eigen::MatrixXd var = (sum_sq / n - out.mean_state.cwiseAbs2()).cwiseMax(0.0);
    out.mean_state_stderr = std::sqrt(d * var.sum() / n);
}

}  // namespace

OQBMParams::OQBMParams(Matrix n, Matrix h, double tau, Matrix m)
    : n_(std::move(n)), h_(std::move(h)), m_(std::move(m)), tau_(tau) {
    if (!(tau_ > 0.0) || !std::isfinite(tau_)) throw ContractViolation("OQBMParams: tau must be positive");
    if (n_.rows() != n_.cols() || n_.rows() == 0) throw DimensionError("OQBMParams: N must be square");
    if (h_.rows() != n_.rows() || h_.cols() != n_.cols()) throw DimensionError("OQBMParams: H and N differ in shape");
    if (m_.size() == 0) m_ = zero_like(n_);
    if (m_.rows() != n_.rows() || m_.cols() != n_.cols()) throw DimensionError("OQBMParams: M and N differ in shape");
    if (hermitian_defect(h_) > tolerances().hermitian) throw ContractViolation("OQBMParams: H is not Hermitian");
}

double OQBMParams::delta() const { return std::sqrt(tau_); }

bool OQBMParams::has_M() const { return !m_.isZero(0.0); }

KrausPair kraus_truncated(const OQBMParams& p) {
    const int d = p.dim();
    const Matrix id = Matrix::Identity(d, d);
    const double delta = p.delta();
    const Matrix drift = -kI * p.H() - 0.5 * p.N().adjoint() * p.N();
    const double s = 1.0 / std::sqrt(2.0);
    return {s * (id + delta * p.N() + p.tau() * (drift + p.M())),
            s * (id - delta * p.N() + p.tau() * (drift - p.M()))};
}

Matrix vtau(const OQBMParams& p) {
    Matrix up = Matrix::Zero(2, 2);    // |1><0|
    Matrix down = Matrix::Zero(2, 2);  // |0><1|
    up(1, 0) = 1.0;
    down(0, 1) = 1.0;
    Matrix gen = -kI * p.tau() * kron(p.H(), Matrix::Identity(2, 2)) +
                 p.delta() * (kron(p.N(), up) - kron(p.N().adjoint(), down));
    return matrix_exp(gen);
}

KrausPair kraus_exact(const OQBMParams& p) {
    if (p.has_M()) throw Unsupported("kraus_exact: the dilation is defined for M = 0 only");
    const int d = p.dim();
    const Matrix v = vtau(p);
    Vector plus(2), minus(2), zero(2);
    const double s = 1.0 / std::sqrt(2.0);
    plus << s, s;
    minus << s, -s;
    zero << 1.0, 0.0;
    KrausPair k{Matrix::Zero(d, d), Matrix::Zero(d, d)};
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            cplx cp = 0.0;
            cplx cm = 0.0;
            for (int a = 0; a < 2; ++a) {
                const cplx col = v(2 * i + a, 2 * j);  // <i, a| V |j, 0>
                cp += std::conj(plus(a)) * col;
                cm += std::conj(minus(a)) * col;
            }
            k.plus(i, j) = cp;
            k.minus(i, j) = cm;
        }
    }
    return k;
}

double completeness_defect(const KrausPair& k) {
    const int d = static_cast<int>(k.plus.rows());
    return op_norm(k.plus.adjoint() * k.plus + k.minus.adjoint() * k.minus - Matrix::Identity(d, d));
}

Matrix gyroscope_step(const KrausPair& k, const Matrix& rho) {
    return k.plus * rho * k.plus.adjoint() + k.minus * rho * k.minus.adjoint();
}

KrausChannel gyroscope_channel(const OQBMParams& p) {
    KrausPair k = kraus_exact(p);
    return KrausChannel({k.plus, k.minus});
}

LatticeField::LatticeField(double delta, int first_index, std::vector<Matrix> sites, Boundary boundary)
    : delta_(delta), first_index_(first_index), sites_(std::move(sites)), boundary_(boundary) {
    if (!(delta_ > 0.0)) throw ContractViolation("LatticeField: delta must be positive");
    if (sites_.empty()) throw ContractViolation("LatticeField: empty window");
    const auto d = sites_.front().rows();
    for (const Matrix& m : sites_) {
        if (m.rows() != d || m.cols() != d) throw DimensionError("LatticeField: site matrices of mixed shape");
    }
}

LatticeField LatticeField::centered(double delta, int half_sites, int dim, Boundary boundary) {
    if (half_sites < 0) throw ContractViolation("LatticeField::centered: negative half-width");
    return LatticeField(delta, -half_sites, std::vector<Matrix>(2 * half_sites + 1, Matrix::Zero(dim, dim)),
                        boundary);
}

int LatticeField::site_of(int lattice_index) const {
    int i = lattice_index - first_index_;
    return (i >= 0 && i < n_sites()) ? i : -1;
}

double LatticeField::total_trace() const {
    double t = 0.0;
    for (const Matrix& m : sites_) t += m.trace().real();
    return t;
}

Matrix LatticeField::gyroscope_marginal() const {
    Matrix s = zero_like(sites_.front());
    for (const Matrix& m : sites_) s += m;
    return s;
}

DiagonalState LatticeField::diagonal_state() const {
    DiagonalState s;
    s.sites = sites_;
    return s;
}

Matrix LatticeField::embedded() const {
    const int d = dim();
    const int w = n_sites();
    Matrix out = Matrix::Zero(d * w, d * w);
    for (int z = 0; z < w; ++z) {
        for (int g = 0; g < d; ++g) {
            for (int h = 0; h < d; ++h) out(g * w + z, h * w + z) = sites_[z](g, h);
        }
    }
    return out;
}

double default_half_width(const OQBMParams& p, double t, double x_range) {
    const double v_max = op_norm(p.N() + p.N().adjoint());
    return std::max(6.0 * std::sqrt(t), 6.0 * v_max * t) + x_range;
}

LatticeField oqbm_step(const KrausPair& k, const LatticeField& field) {
    if (field.dim() != k.plus.rows()) throw DimensionError("oqbm_step: field and Kraus dimensions differ");
    const int w = field.n_sites();
    const int d = field.dim();
    std::vector<Matrix> out(w, Matrix::Zero(d, d));
    const Matrix plus_adj = k.plus.adjoint();
    const Matrix minus_adj = k.minus.adjoint();
    double leak = 0.0;
    for (int i = 0; i < w; ++i) {
        const Matrix& rho = field[i];
        if (rho.isZero(0.0)) continue;
        Matrix right = k.plus * rho * plus_adj;
        Matrix left = k.minus * rho * minus_adj;
        if (i + 1 < w) {
            out[i + 1] += right;
        } else if (field.boundary() == Boundary::Reflect) {
            out[i] += right;
        } else {
            leak += right.trace().real();
        }
        if (i > 0) {
            out[i - 1] += left;
        } else if (field.boundary() == Boundary::Reflect) {
            out[i] += left;
        } else {
            leak += left.trace().real();
        }
    }
    LatticeField next(field.delta(), field.first_index(), std::move(out), field.boundary());
    next.add_leak(field.leaked() + leak);
    return next;
}

LatticeField oqbm_step(const OQBMParams& p, const LatticeField& field, bool use_exact) {
    return oqbm_step(use_exact ? kraus_exact(p) : kraus_truncated(p), field);
}

OQWKernel oqbm_ring_kernel(const OQBMParams& p, int n_sites) {
    KrausPair k = kraus_exact(p);
    return ring_kernel(k.plus, k.minus, n_sites);
}

Matrix shift_unitary(int window) {
    Matrix shift = Matrix::Zero(window, window);
    for (int z = 0; z < window; ++z) shift((z + 1) % window, z) = 1.0;
    Matrix plus = Matrix::Constant(2, 2, 0.5);
    Matrix minus = plus;
    minus(0, 1) = minus(1, 0) = -0.5;
    return kron(shift, plus) + kron(shift.adjoint(), minus);
}

double dilation_check(const OQBMParams& p, const LatticeField& field, bool use_exact) {
    const int w = field.n_sites();
    const int d = field.dim();
    if (d != p.dim()) throw DimensionError("dilation_check: field and parameter dimensions differ");
    if (w < 5) throw PaddingError("dilation_check: window too small");
    for (int i : {0, 1, w - 2, w - 1}) {
        if (!field[i].isZero(0.0)) throw PaddingError("dilation_check: the two outermost sites at each end must be empty");
    }
    const Matrix v = vtau(p);
    const int n = d * w * 2;
    // V on gyroscope (x) probe, identity on the window in between.
    Matrix v_full = Matrix::Zero(n, n);
    for (int g = 0; g < d; ++g) {
        for (int a = 0; a < 2; ++a) {
            for (int h = 0; h < d; ++h) {
                for (int b = 0; b < 2; ++b) {
                    const cplx c = v(2 * g + a, 2 * h + b);
                    if (c == cplx(0.0)) continue;
                    for (int z = 0; z < w; ++z) v_full((g * w + z) * 2 + a, (h * w + z) * 2 + b) = c;
                }
            }
        }
    }
    const Matrix r_full = kron(Matrix::Identity(d, d), shift_unitary(w));
    Matrix rho = Matrix::Zero(n, n);
    for (int z = 0; z < w; ++z) {
        for (int g = 0; g < d; ++g) {
            for (int h = 0; h < d; ++h) rho((g * w + z) * 2, (h * w + z) * 2) = field[z](g, h);
        }
    }
    const Matrix u = r_full * v_full;
    const Matrix evolved = u * rho * u.adjoint();
    const Matrix reduced = partial_trace(evolved, d * w, 2, Keep::First);
    const LatticeField stepped = oqbm_step(p, field, use_exact);
    return trace_norm(reduced - stepped.embedded());
}

LatticeTrajectory probe_measurement_unravel(const OQBMParams& p, const DensityMatrix& rho0, double x0, int n_steps,
                                            std::uint64_t seed, std::uint64_t stream) {
    if (rho0.dim() != p.dim()) throw DimensionError("probe_measurement_unravel: state dimension mismatch");
    const BinarySampler<Matrix> sampler(kraus_exact(p));
    LatticeTrajectory path;
    path.x0 = x0;
    path.delta = p.delta();
    path.rng_seed = seed;
    path.stream = stream;
    path.positions.push_back(x0);
    path.states.push_back(rho0);
    Rng rng = Rng::stream(seed, stream);
    Matrix rho = rho0.matrix();
    long walk = 0;
    for (int s = 0; s < n_steps; ++s) {
        int inc = sampler.step(rho, rng);
        walk += inc;
        path.increments.push_back(inc);
        path.positions.push_back(x0 + path.delta * static_cast<double>(walk));
        path.states.emplace_back(rho, 1e-9);
    }
    return path;
}

UnravelEnsemble unravel_ensemble(const OQBMParams& p, const DensityMatrix& rho0, double x0, int n_steps,
                                 std::size_t n_paths, std::uint64_t seed, int threads) {
    if (rho0.dim() != p.dim()) throw DimensionError("unravel_ensemble: state dimension mismatch");
    if (n_paths == 0) throw ContractViolation("unravel_ensemble: no paths");
    const KrausPair k = kraus_exact(p);
    UnravelEnsemble out;
    if (p.dim() == 2) {
        run_unravel<Eigen::Matrix2cd>(k, rho0.matrix(), x0, p.delta(), n_steps, n_paths, seed, threads, out);
    } else {
        run_unravel<Matrix>(k, rho0.matrix(), x0, p.delta(), n_steps, n_paths, seed, threads, out);
    }
    return out;
}

}  // namespace oqbm
