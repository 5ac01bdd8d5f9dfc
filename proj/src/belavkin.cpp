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

#include "oqbm/belavkin.hpp"

#include <cmath>
#include <string>

#include "oqbm/errors.hpp"
#include "oqbm/parallel.hpp"
#include "oqbm/rng.hpp"

namespace oqbm {

namespace {

double smallest_eigenvalue(const Eigen::Matrix2cd& m) {
    const double a = m(0, 0).real();
    const double d = m(1, 1).real();
    const double half = 0.5 * (a - d);
    return 0.5 * (a + d) - std::sqrt(half * half + std::norm(m(0, 1)));
}

double smallest_eigenvalue(const Matrix& m) { return min_eigenvalue(m); }

// Fixed-type Euler-Maruyama kernels; the dimension-2 instance avoids heap
// traffic in the ensemble loops.
template <class Mat>
struct SdeKernel {
    Mat h, n, n_adj, jump, speed_conj;

    explicit SdeKernel(const LindbladGenerator& g)
        : h(g.H()),
          n(g.N()),
          n_adj(g.N().adjoint()),
          jump(g.N().adjoint() * g.N()),
          speed_conj((g.N() + g.N().adjoint()).conjugate()) {}

    double speed(const Mat& rho) const { return speed_conj.cwiseProduct(rho).sum().real(); }

    Mat lindblad(const Mat& q) const {
        return cplx(0.0, -1.0) * (h * q - q * h) + n * q * n_adj - 0.5 * (jump * q + q * jump);
    }

    // Normalized step; returns the pre-normalization trace and adds removed
    // eigenvalue mass to `clipped`.
    double step(Mat& rho, double& x, double dB, double dt, bool renormalize, double& clipped) const {
        const double t = speed(rho);
        Mat noise = n * rho + rho * n_adj - t * rho;
        Mat next = rho + lindblad(rho) * dt + noise * dB;
        rho = 0.5 * (next + next.adjoint());
        const double pre = rho.trace().real();
        if (!(pre >= 1e-12)) {
            throw IntegrationFailure("belavkin_step: state collapsed (trace " + std::to_string(pre) + ")");
        }
        if (smallest_eigenvalue(rho) < -tolerances().psd) {
            PsdProjection proj = psd_project_report(Matrix(rho), 1e-6);
            rho = proj.matrix;
            clipped += proj.clipped;
        }
        if (renormalize) rho /= rho.trace().real();
        x += t * dt + dB;
        return pre;
    }

    void unnormalized(Mat& sigma, double dW, double dt) const {
        Mat next = sigma + lindblad(sigma) * dt + (n * sigma + sigma * n_adj) * dW;
        sigma = 0.5 * (next + next.adjoint());
    }
};

struct Neumaier {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + c; }
};

struct CheckpointSums {
    Matrix state;
    Eigen::MatrixXd state_sq;
    double x = 0.0;
    double x_sq = 0.0;
};

struct NormalizedBlock {
    std::vector<CheckpointSums> sums;
    std::vector<double> endpoints;
    double max_clipped = 0.0;
    std::size_t projected = 0;
};

template <class Mat>
void run_normalized(const LindbladGenerator& g, const Matrix& rho0, const InitialPosition& x0, std::size_t n_paths,
                    const SDEConfig& cfg, const std::vector<int>& checkpoint_steps, int threads,
                    std::vector<NormalizedBlock>& blocks) {
    const SdeKernel<Mat> kernel(g);
    const Mat start = rho0;
    const int d = g.dim();
    const int n_steps = cfg.n_steps();
    const double sq = std::sqrt(cfg.dt);
    blocks.assign(block_count(n_paths), NormalizedBlock{});
    parallel_blocks(blocks.size(), threads, [&](std::size_t b) {
        NormalizedBlock& blk = blocks[b];
        blk.sums.assign(checkpoint_steps.size(), CheckpointSums{Matrix::Zero(d, d), Eigen::MatrixXd::Zero(d, d)});
        const std::size_t begin = b * kEnsembleBlock;
        const std::size_t end = std::min(n_paths, begin + kEnsembleBlock);
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = Rng::stream(cfg.seed, i);
            Mat rho = start;
            double x = x0.mean;
            if (x0.stddev > 0.0) x += x0.stddev * rng.normal();
            double clipped = 0.0;
            std::size_t c = 0;
            for (int s = 0; s <= n_steps; ++s) {
                if (c < checkpoint_steps.size() && checkpoint_steps[c] == s) {
                    CheckpointSums& cs = blk.sums[c];
                    cs.state += rho;
                    cs.state_sq += rho.cwiseAbs2();
                    cs.x += x;
                    cs.x_sq += x * x;
                    ++c;
                }
                if (s == n_steps) break;
                kernel.step(rho, x, sq * rng.normal(), cfg.dt, cfg.renormalize, clipped);
            }
            blk.endpoints.push_back(x);
            blk.max_clipped = std::max(blk.max_clipped, clipped);
            if (clipped > 0.0) ++blk.projected;
        }
    });
}

struct ReferenceBlock {
    Matrix sum;
    Eigen::MatrixXd sum_sq;
    std::vector<double> endpoints, weights, girsanov;
};

template <class Mat>
void run_reference(const LindbladGenerator& g, const Matrix& rho0, double x0, std::size_t n_paths,
                   const SDEConfig& cfg, int threads, std::vector<ReferenceBlock>& blocks) {
    const SdeKernel<Mat> kernel(g);
    const Mat start = rho0;
    const int d = g.dim();
    const int n_steps = cfg.n_steps();
    const double sq = std::sqrt(cfg.dt);
    blocks.assign(block_count(n_paths), ReferenceBlock{});
    parallel_blocks(blocks.size(), threads, [&](std::size_t b) {
        ReferenceBlock& blk = blocks[b];
        blk.sum = Matrix::Zero(d, d);
        blk.sum_sq = Eigen::MatrixXd::Zero(d, d);
        const std::size_t begin = b * kEnsembleBlock;
        const std::size_t end = std::min(n_paths, begin + kEnsembleBlock);
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = Rng::stream(cfg.seed, i);
            Mat sigma = start;
            double w = 0.0;
            double log_weight = 0.0;
            for (int s = 0; s < n_steps; ++s) {
                const double dW = sq * rng.normal();
                const double t = kernel.speed(sigma) / sigma.trace().real();
                log_weight += t * dW - 0.5 * t * t * cfg.dt;
                kernel.unnormalized(sigma, dW, cfg.dt);
                w += dW;
            }
            blk.sum += sigma;
            blk.sum_sq += sigma.cwiseAbs2();
            blk.endpoints.push_back(x0 + w);
            blk.weights.push_back(sigma.trace().real());
            blk.girsanov.push_back(std::exp(log_weight));
        }
    });
}

}  // namespace

int SDEConfig::n_steps() const {
    if (!(dt > 0.0)) throw ConfigError("SDEConfig: dt must be positive");
    return static_cast<int>(std::llround(t_final / dt));
}

void SDEConfig::validate(const LindbladGenerator& g) const {
    if (!(dt > 0.0) || !(t_final > 0.0)) throw ConfigError("SDEConfig: dt and t_final must be positive");
    if (dt > t_final) throw ConfigError("SDEConfig: dt exceeds t_final");
    if (std::abs(n_steps() * dt - t_final) > 1e-9 * t_final) {
        throw ConfigError("SDEConfig: t_final is not a whole number of steps");
    }
    const double nn = op_norm(g.N());
    if (dt * nn * nn > 0.1) throw ConfigError("SDEConfig: dt ||N||^2 exceeds 0.1");
}

double drift_speed(const LindbladGenerator& g, const Matrix& rho) {
    return ((g.N() + g.N().adjoint()) * rho).trace().real();
}

BelavkinUpdate belavkin_step(const LindbladGenerator& g, const Matrix& rho, double x, double dB, double dt,
                             bool renormalize) {
    if (rho.rows() != g.dim() || rho.cols() != g.dim()) throw DimensionError("belavkin_step: state dimension mismatch");
    const SdeKernel<Matrix> kernel(g);
    BelavkinUpdate out;
    out.state = rho;
    out.x = x;
    out.pre_trace = kernel.step(out.state, out.x, dB, dt, renormalize, out.clipped);
    return out;
}

Matrix unnormalized_step(const LindbladGenerator& g, const Matrix& sigma, double dW, double dt) {
    if (sigma.rows() != g.dim() || sigma.cols() != g.dim()) throw DimensionError("unnormalized_step: dimension mismatch");
    const SdeKernel<Matrix> kernel(g);
    Matrix out = sigma;
    kernel.unnormalized(out, dW, dt);
    return out;
}

SDEPath belavkin_path(const LindbladGenerator& g, const DensityMatrix& rho0, double x0, const SDEConfig& cfg,
                      std::uint64_t stream) {
    cfg.validate(g);
    const SdeKernel<Matrix> kernel(g);
    const int n_steps = cfg.n_steps();
    const double sq = std::sqrt(cfg.dt);
    Rng rng = Rng::stream(cfg.seed, stream);
    SDEPath path;
    Matrix rho = rho0.matrix();
    double x = x0;
    path.times.push_back(0.0);
    path.states.push_back(rho);
    path.positions.push_back(x);
    for (int s = 0; s < n_steps; ++s) {
        const double dB = sq * rng.normal();
        kernel.step(rho, x, dB, cfg.dt, cfg.renormalize, path.clipped);
        path.increments.push_back(dB);
        path.times.push_back((s + 1) * cfg.dt);
        path.states.push_back(rho);
        path.positions.push_back(x);
    }
    return path;
}

ReferencePath unnormalized_path(const LindbladGenerator& g, const DensityMatrix& rho0, double x0,
                                const SDEConfig& cfg, std::uint64_t stream) {
    cfg.validate(g);
    const SdeKernel<Matrix> kernel(g);
    const int n_steps = cfg.n_steps();
    const double sq = std::sqrt(cfg.dt);
    Rng rng = Rng::stream(cfg.seed, stream);
    ReferencePath path;
    Matrix sigma = rho0.matrix();
    double x = x0;
    double log_weight = 0.0;
    path.times.push_back(0.0);
    path.states.push_back(sigma);
    path.positions.push_back(x);
    path.girsanov.push_back(1.0);
    for (int s = 0; s < n_steps; ++s) {
        const double dW = sq * rng.normal();
        const double t = kernel.speed(sigma) / sigma.trace().real();
        log_weight += t * dW - 0.5 * t * t * cfg.dt;
        kernel.unnormalized(sigma, dW, cfg.dt);
        x += dW;
        path.increments.push_back(dW);
        path.times.push_back((s + 1) * cfg.dt);
        path.states.push_back(sigma);
        path.positions.push_back(x);
        path.girsanov.push_back(std::exp(log_weight));
    }
    return path;
}

double girsanov_weight(const LindbladGenerator& g, const ReferencePath& path, double dt) {
    if (path.states.size() != path.increments.size() + 1) {
        throw ContractViolation("girsanov_weight: path needs one more state than increments");
    }
    double log_weight = 0.0;
    for (std::size_t k = 0; k < path.increments.size(); ++k) {
        const Matrix& s = path.states[k];
        const double t = drift_speed(g, s) / s.trace().real();
        log_weight += t * path.increments[k] - 0.5 * t * t * dt;
    }
    return std::exp(log_weight);
}

EnsembleStats ensemble_run(const LindbladGenerator& g, const DensityMatrix& rho0, const InitialPosition& x0,
                           std::size_t n_paths, const SDEConfig& cfg, int n_checkpoints, int threads) {
    cfg.validate(g);
    if (n_paths == 0) throw ContractViolation("ensemble_run: no paths");
    if (rho0.dim() != g.dim()) throw DimensionError("ensemble_run: state dimension mismatch");
    n_checkpoints = std::max(1, n_checkpoints);
    const int n_steps = cfg.n_steps();
    std::vector<int> checkpoint_steps{0};
    for (int c = 1; c <= n_checkpoints; ++c) {
        int s = static_cast<int>((static_cast<long long>(n_steps) * c) / n_checkpoints);
        if (s > checkpoint_steps.back()) checkpoint_steps.push_back(s);
    }
    std::vector<NormalizedBlock> blocks;
    if (g.dim() == 2) {
        run_normalized<Eigen::Matrix2cd>(g, rho0.matrix(), x0, n_paths, cfg, checkpoint_steps, threads, blocks);
    } else {
        run_normalized<Matrix>(g, rho0.matrix(), x0, n_paths, cfg, checkpoint_steps, threads, blocks);
    }
    const int d = g.dim();
    const double n = static_cast<double>(n_paths);
    EnsembleStats stats;
    stats.endpoints.reserve(n_paths);
    for (std::size_t c = 0; c < checkpoint_steps.size(); ++c) {
        Matrix sum = Matrix::Zero(d, d);
        Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(d, d);
        Neumaier sx, sxx;
        for (const NormalizedBlock& blk : blocks) {
            sum += blk.sums[c].state;
            sum_sq += blk.sums[c].state_sq;
            sx.add(blk.sums[c].x);
            sxx.add(blk.sums[c].x_sq);
        }
        Matrix mean = sum / n;
        Eigen::MatrixXd var = (sum_sq / n - mean.cwiseAbs2()).cwiseMax(0.0);
        const double mx = sx.value() / n;
        stats.times.push_back(checkpoint_steps[c] * cfg.dt);
        stats.mean_state.push_back(mean);
        stats.state_stderr.push_back(std::sqrt(d * var.sum() / n));
        stats.mean_x.push_back(mx);
        stats.var_x.push_back(std::max(0.0, sxx.value() / n - mx * mx));
    }
    for (const NormalizedBlock& blk : blocks) {
        stats.endpoints.insert(stats.endpoints.end(), blk.endpoints.begin(), blk.endpoints.end());
        stats.max_clipped = std::max(stats.max_clipped, blk.max_clipped);
        stats.projected_paths += blk.projected;
    }
    return stats;
}

ReferenceStats reference_run(const LindbladGenerator& g, const DensityMatrix& rho0, double x0, std::size_t n_paths,
                             const SDEConfig& cfg, int threads) {
    cfg.validate(g);
    if (n_paths == 0) throw ContractViolation("reference_run: no paths");
    if (rho0.dim() != g.dim()) throw DimensionError("reference_run: state dimension mismatch");
    std::vector<ReferenceBlock> blocks;
    if (g.dim() == 2) {
        run_reference<Eigen::Matrix2cd>(g, rho0.matrix(), x0, n_paths, cfg, threads, blocks);
    } else {
        run_reference<Matrix>(g, rho0.matrix(), x0, n_paths, cfg, threads, blocks);
    }
    const int d = g.dim();
    const double n = static_cast<double>(n_paths);
    ReferenceStats stats;
    Matrix sum = Matrix::Zero(d, d);
    Eigen::MatrixXd sum_sq = Eigen::MatrixXd::Zero(d, d);
    for (const ReferenceBlock& blk : blocks) {
        sum += blk.sum;
        sum_sq += blk.sum_sq;
        stats.endpoints.insert(stats.endpoints.end(), blk.endpoints.begin(), blk.endpoints.end());
        stats.weights.insert(stats.weights.end(), blk.weights.begin(), blk.weights.end());
        stats.girsanov.insert(stats.girsanov.end(), blk.girsanov.begin(), blk.girsanov.end());
    }
    stats.mean_unnormalized = sum / n;
    Eigen::MatrixXd var = (sum_sq / n - stats.mean_unnormalized.cwiseAbs2()).cwiseMax(0.0);
    stats.unnormalized_stderr = std::sqrt(d * var.sum() / n);
    return stats;
}

}  // namespace oqbm
