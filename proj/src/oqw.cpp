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

#include "oqbm/oqw.hpp"

#include <cmath>
#include <string>

#include "oqbm/channels.hpp"
#include "oqbm/errors.hpp"
#include "oqbm/parallel.hpp"

namespace oqbm {

namespace {

// Per-vertex sampling tables in a fixed matrix type so that the hot loop of
// the dimension-2 case runs on stack-allocated Matrix2cd.
template <class Mat>
struct WalkTables {
    std::vector<Mat> kraus;
    std::vector<Mat> effect_conj;  // conj(K^*K): Tr(K^*K rho) = sum(effect_conj .* rho)
    std::vector<int> target;
    const OQWKernel* kernel = nullptr;

    explicit WalkTables(const OQWKernel& k) : kernel(&k) {
        for (const OQWEdge& e : k.edges()) {
            kraus.push_back(e.kraus);
            effect_conj.push_back((e.kraus.adjoint() * e.kraus).conjugate());
            target.push_back(e.to);
        }
    }

    double weight(int edge, const Mat& rho) const {
        double p = effect_conj[edge].cwiseProduct(rho).sum().real();
        return p > 0.0 ? p : 0.0;
    }

    // Advances (rho, x) by one step; rho stays normalized.
    void step(Mat& rho, int& x, Rng& rng) const {
        const std::vector<int>& out = kernel->out_edges(x);
        double total = 0.0;
        for (int e : out) total += weight(e, rho);
        if (total < kNullProbability) {
            throw DegenerateStep("sample_step: all transition probabilities vanish at vertex " + std::to_string(x));
        }
        const double u = rng.uniform() * total;
        std::size_t chosen = 0;
        double acc = 0.0;
        for (std::size_t j = 0; j < out.size(); ++j) {
            double pj = weight(out[j], rho);
            if (pj == 0.0) continue;
            chosen = j;
            acc += pj;
            if (u < acc) break;
        }
        const int e = out[chosen];
        Mat next = kraus[e] * rho * kraus[e].adjoint();
        double tr = next.trace().real();
        rho = (next + next.adjoint()) * (0.5 / tr);
        x = target[e];
    }
};

struct BlockSums {
    std::vector<Matrix> sum;
    std::vector<Eigen::MatrixXd> sum_sq;
};

template <class Mat>
BlockSums run_block(const WalkTables<Mat>& tables, const Mat& rho0, int x0, int n_steps, std::size_t begin,
                    std::size_t end, std::uint64_t seed, int n_vertices, int dim) {
    BlockSums out;
    out.sum.assign(n_vertices, Matrix::Zero(dim, dim));
    out.sum_sq.assign(n_vertices, Eigen::MatrixXd::Zero(dim, dim));
    for (std::size_t i = begin; i < end; ++i) {
        Rng rng = Rng::stream(seed, i);
        Mat rho = rho0;
        int x = x0;
        for (int s = 0; s < n_steps; ++s) tables.step(rho, x, rng);
        out.sum[x] += rho;
        out.sum_sq[x] += rho.cwiseAbs2();
    }
    return out;
}

template <class Mat>
void accumulate(const OQWKernel& kernel, const Matrix& rho0, int x0, int n_steps, std::size_t n_samples,
                std::uint64_t seed, int threads, std::vector<Matrix>& sum, std::vector<Eigen::MatrixXd>& sum_sq) {
    WalkTables<Mat> tables(kernel);
    const std::size_t n_blocks = block_count(n_samples);
    std::vector<BlockSums> blocks(n_blocks);
    const Mat rho = rho0;
    parallel_blocks(n_blocks, threads, [&](std::size_t b) {
        std::size_t begin = b * kEnsembleBlock;
        std::size_t end = std::min(n_samples, begin + kEnsembleBlock);
        blocks[b] = run_block(tables, rho, x0, n_steps, begin, end, seed, kernel.n_vertices(), kernel.dim());
    });
    for (const BlockSums& blk : blocks) {
        for (int x = 0; x < kernel.n_vertices(); ++x) {
            sum[x] += blk.sum[x];
            sum_sq[x] += blk.sum_sq[x];
        }
    }
}

void require_vertex(const OQWKernel& kernel, int x, const char* what) {
    if (x < 0 || x >= kernel.n_vertices()) {
        throw DomainError(std::string(what) + ": vertex " + std::to_string(x) + " outside the graph");
    }
}

}  // namespace

OQWKernel::OQWKernel(int n_vertices, std::vector<OQWEdge> edges, double tol)
    : n_vertices_(n_vertices), edges_(std::move(edges)), out_(n_vertices) {
    if (n_vertices <= 0) throw ContractViolation("OQWKernel: empty vertex set");
    if (edges_.empty()) throw ContractViolation("OQWKernel: no edges");
    dim_ = static_cast<int>(edges_.front().kraus.rows());
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        const OQWEdge& e = edges_[i];
        if (e.from < 0 || e.from >= n_vertices || e.to < 0 || e.to >= n_vertices) {
            throw DomainError("OQWKernel: edge " + std::to_string(e.from) + " -> " + std::to_string(e.to) +
                              " leaves the vertex set");
        }
        if (e.kraus.rows() != dim_ || e.kraus.cols() != dim_) {
            throw DimensionError("OQWKernel: Kraus operators of mixed shape");
        }
        out_[e.from].push_back(static_cast<int>(i));
    }
    for (int x = 0; x < n_vertices; ++x) {
        Matrix s = Matrix::Zero(dim_, dim_);
        for (int e : out_[x]) s += edges_[e].kraus.adjoint() * edges_[e].kraus;
        double defect = op_norm(s - Matrix::Identity(dim_, dim_));
        if (defect > tol) {
            throw ContractViolation("OQWKernel: completeness defect " + std::to_string(defect) + " at vertex " +
                                    std::to_string(x));
        }
    }
}

bool OQWKernel::has_edge(int from, int to) const {
    if (from < 0 || from >= n_vertices_) return false;
    for (int e : out_[from]) {
        if (edges_[e].to == to) return true;
    }
    return false;
}

OQWKernel classical_walk_kernel(const Eigen::MatrixXd& transition, int dim) {
    const int n = static_cast<int>(transition.rows());
    if (transition.cols() != n) throw DimensionError("classical_walk_kernel: transition matrix not square");
    std::vector<OQWEdge> edges;
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            double p = transition(x, y);
            if (p < 0.0) throw ContractViolation("classical_walk_kernel: negative transition probability");
            if (p > 0.0) edges.push_back({x, y, std::sqrt(p) * Matrix::Identity(dim, dim)});
        }
    }
    return OQWKernel(n, std::move(edges));
}

OQWKernel random_oqw_kernel(int n_vertices, int dim, Rng& rng) {
    if (n_vertices <= 0 || dim <= 0) throw ContractViolation("random_oqw_kernel: empty graph or gyroscope");
    std::vector<OQWEdge> edges;
    for (int x = 0; x < n_vertices; ++x) {
        const Matrix u = random_unitary(dim * n_vertices, rng);
        for (int y = 0; y < n_vertices; ++y) edges.push_back({x, y, u.block(y * dim, 0, dim, dim)});
    }
    return OQWKernel(n_vertices, std::move(edges));
}

OQWKernel ring_kernel(const Matrix& right, const Matrix& left, int n_sites) {
    if (n_sites < 3) throw ContractViolation("ring_kernel: need at least three sites");
    std::vector<OQWEdge> edges;
    edges.reserve(2 * n_sites);
    for (int x = 0; x < n_sites; ++x) {
        edges.push_back({x, (x + 1) % n_sites, right});
        edges.push_back({x, (x + n_sites - 1) % n_sites, left});
    }
    return OQWKernel(n_sites, std::move(edges));
}

DiagonalState DiagonalState::point(int n_vertices, int vertex, const Matrix& rho) {
    if (vertex < 0 || vertex >= n_vertices) throw DomainError("DiagonalState::point: vertex outside the graph");
    DiagonalState s;
    s.sites.assign(n_vertices, Matrix::Zero(rho.rows(), rho.cols()));
    s.sites[vertex] = rho;
    return s;
}

double DiagonalState::total_trace() const {
    double t = 0.0;
    for (const Matrix& m : sites) t += m.trace().real();
    return t;
}

Matrix DiagonalState::gyroscope_marginal() const {
    if (sites.empty()) return Matrix();
    Matrix s = Matrix::Zero(sites.front().rows(), sites.front().cols());
    for (const Matrix& m : sites) s += m;
    return s;
}

DiagonalState oqw_apply(const OQWKernel& kernel, const DiagonalState& state) {
    if (state.n_vertices() != kernel.n_vertices()) {
        throw DomainError("oqw_apply: state indexed by " + std::to_string(state.n_vertices()) +
                          " vertices, kernel has " + std::to_string(kernel.n_vertices()));
    }
    const int d = kernel.dim();
    DiagonalState out;
    out.sites.assign(kernel.n_vertices(), Matrix::Zero(d, d));
    for (const Matrix& m : state.sites) {
        if (m.rows() != d || m.cols() != d) throw DimensionError("oqw_apply: site matrix of wrong dimension");
    }
    for (const OQWEdge& e : kernel.edges()) {
        const Matrix& rho = state.sites[e.from];
        if (rho.isZero(0.0)) continue;
        out.sites[e.to].noalias() += e.kraus * rho * e.kraus.adjoint();
    }
    return out;
}

double summed_trace_distance(const DiagonalState& a, const DiagonalState& b) {
    if (a.n_vertices() != b.n_vertices()) throw DimensionError("summed_trace_distance: vertex counts differ");
    double d = 0.0;
    for (int x = 0; x < a.n_vertices(); ++x) d += trace_norm(a.sites[x] - b.sites[x]);
    return d;
}

std::pair<int, DensityMatrix> sample_step(const OQWKernel& kernel, const DensityMatrix& rho, int vertex, Rng& rng) {
    require_vertex(kernel, vertex, "sample_step");
    if (rho.dim() != kernel.dim()) throw DimensionError("sample_step: state dimension does not match kernel");
    double total = 0.0;
    for (int e : kernel.out_edges(vertex)) {
        const Matrix& k = kernel.edges()[e].kraus;
        total += (k * rho.matrix() * k.adjoint()).trace().real();
    }
    if (total < kNullProbability) {
        throw DegenerateStep("sample_step: all transition probabilities vanish at vertex " + std::to_string(vertex));
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ContractViolation("sample_step: out-edge probabilities sum to " + std::to_string(total));
    }
    WalkTables<Matrix> tables(kernel);
    Matrix m = rho.matrix();
    int x = vertex;
    tables.step(m, x, rng);
    return {x, DensityMatrix(std::move(m), 1e-9)};
}

QuantumTrajectory sample_trajectory(const OQWKernel& kernel, const DensityMatrix& rho0, int x0, int n_steps,
                                    std::uint64_t seed, std::uint64_t stream) {
    require_vertex(kernel, x0, "sample_trajectory");
    QuantumTrajectory path;
    path.rng_seed = seed;
    path.stream = stream;
    path.positions.push_back(x0);
    path.states.push_back(rho0);
    Rng rng = Rng::stream(seed, stream);
    for (int s = 0; s < n_steps; ++s) {
        auto [x, rho] = sample_step(kernel, path.states.back(), path.positions.back(), rng);
        path.positions.push_back(x);
        path.states.push_back(std::move(rho));
    }
    return path;
}

ExpectationReport expectation_identity_check(const OQWKernel& kernel, const DensityMatrix& rho0, int x0, int n_steps,
                                             std::size_t n_samples, std::uint64_t seed, int threads,
                                             const std::optional<DiagonalState>& reference) {
    require_vertex(kernel, x0, "expectation_identity_check");
    if (rho0.dim() != kernel.dim()) throw DimensionError("expectation_identity_check: state dimension mismatch");
    if (n_samples == 0) throw ContractViolation("expectation_identity_check: no samples");
    const int nv = kernel.n_vertices();
    const int d = kernel.dim();

    DiagonalState ref;
    if (reference) {
        ref = *reference;
        if (ref.n_vertices() != nv) throw DimensionError("expectation_identity_check: reference vertex count");
    } else {
        ref = DiagonalState::point(nv, x0, rho0.matrix());
        for (int s = 0; s < n_steps; ++s) ref = oqw_apply(kernel, ref);
    }

    std::vector<Matrix> sum(nv, Matrix::Zero(d, d));
    std::vector<Eigen::MatrixXd> sum_sq(nv, Eigen::MatrixXd::Zero(d, d));
    if (d == 2) {
        accumulate<Eigen::Matrix2cd>(kernel, rho0.matrix(), x0, n_steps, n_samples, seed, threads, sum, sum_sq);
    } else {
        accumulate<Matrix>(kernel, rho0.matrix(), x0, n_steps, n_samples, seed, threads, sum, sum_sq);
    }

    ExpectationReport report;
    report.n_steps = n_steps;
    report.n_samples = n_samples;
    report.estimate.sites.resize(nv);
    const double n = static_cast<double>(n_samples);
    for (int x = 0; x < nv; ++x) {
        Matrix mean = sum[x] / n;
        Eigen::MatrixXd var = sum_sq[x] / n - mean.cwiseAbs2();
        double v = var.cwiseMax(0.0).sum();
        double se = std::sqrt(d * v / n);
        double dist = trace_norm(mean - ref.sites[x]);
        report.estimate.sites[x] = std::move(mean);
        report.site_distance.push_back(dist);
        report.site_stderr.push_back(se);
        report.discrepancy += dist;
        report.stderr += se;
    }
    report.pass = report.discrepancy <= 5.0 * report.stderr + 1e-12;
    return report;
}

}  // namespace oqbm
