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

#ifndef OQBM_OQW_HPP
#define OQBM_OQW_HPP

// Open quantum walks on finite directed graphs: the channel action on
// diagonal states and the associated quantum trajectories.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "oqbm/linalg.hpp"
#include "oqbm/rng.hpp"

namespace oqbm {

struct OQWEdge {
    int from = 0;
    int to = 0;
    Matrix kraus;  // K_(to <- from) on H_G
};

class OQWKernel {
public:
    // Every vertex needs out-edges with sum K^*K = I within `tol`.
    OQWKernel(int n_vertices, std::vector<OQWEdge> edges, double tol = 1e-10);

    int dim() const { return dim_; }
    int n_vertices() const { return n_vertices_; }
    const std::vector<OQWEdge>& edges() const { return edges_; }
    const std::vector<int>& out_edges(int vertex) const { return out_[vertex]; }
    bool has_edge(int from, int to) const;

private:
    int dim_ = 0;
    int n_vertices_ = 0;
    std::vector<OQWEdge> edges_;
    std::vector<std::vector<int>> out_;
};

// K_(y <- x) = sqrt(p(x, y)) I for a row-stochastic matrix p.
OQWKernel classical_walk_kernel(const Eigen::MatrixXd& transition, int dim);

// Kernel whose out-edges at each vertex are the blocks of a Haar-random
// isometry C^d -> C^d (x) C^n_vertices (complete graph with self-loops).
OQWKernel random_oqw_kernel(int n_vertices, int dim, Rng& rng);

// Nearest-neighbour walk on the ring Z/n: `right` moves x -> x+1, `left`
// moves x -> x-1.
OQWKernel ring_kernel(const Matrix& right, const Matrix& left, int n_sites);

// rho = sum_x rho(x) (x) |x><x|.
struct DiagonalState {
    std::vector<Matrix> sites;

    static DiagonalState point(int n_vertices, int vertex, const Matrix& rho);
    int n_vertices() const { return static_cast<int>(sites.size()); }
    double total_trace() const;
    Matrix gyroscope_marginal() const;
};

// output(y) = sum_{x : (y <- x) in E} K rho(x) K^*.
DiagonalState oqw_apply(const OQWKernel& kernel, const DiagonalState& state);

// Summed trace distance sum_x ||a(x) - b(x)||_1.
double summed_trace_distance(const DiagonalState& a, const DiagonalState& b);

struct QuantumTrajectory {
    std::vector<int> positions;
    std::vector<DensityMatrix> states;
    std::uint64_t rng_seed = 0;
    std::uint64_t stream = 0;
};

// One step of the trajectory: y with probability Tr(K rho K^*), then the
// normalized post-state.
std::pair<int, DensityMatrix> sample_step(const OQWKernel& kernel, const DensityMatrix& rho, int vertex, Rng& rng);

QuantumTrajectory sample_trajectory(const OQWKernel& kernel, const DensityMatrix& rho0, int x0, int n_steps,
                                    std::uint64_t seed, std::uint64_t stream);

struct ExpectationReport {
    int n_steps = 0;
    std::size_t n_samples = 0;
    std::vector<double> site_distance;  // ||mean(x) - reference(x)||_1
    std::vector<double> site_stderr;
    double discrepancy = 0.0;  // sum of site_distance
    double stderr = 0.0;       // sum of site_stderr
    bool pass = false;         // discrepancy <= 5 stderr
    DiagonalState estimate;
};

// Monte-Carlo estimate of E(rho_n (x) |X_n><X_n|) against the n-fold channel
// iterate (or an explicit reference). The per-site standard error is the
// Frobenius bound sqrt(d * sum_ij Var(entry_ij) / n_samples), which dominates
// the expected trace-norm error of the sample mean.
ExpectationReport expectation_identity_check(const OQWKernel& kernel, const DensityMatrix& rho0, int x0, int n_steps,
                                             std::size_t n_samples, std::uint64_t seed, int threads = 0,
                                             const std::optional<DiagonalState>& reference = std::nullopt);

}  // namespace oqbm

#endif  // OQBM_OQW_HPP
