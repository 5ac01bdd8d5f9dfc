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

#ifndef OQBM_BELAVKIN_HPP
#define OQBM_BELAVKIN_HPP

// Euler-Maruyama integration of the diffusive Belavkin equation
//   d rho = L(rho) dt + (N rho + rho N^* - T(rho) rho) dB,
//   dX    = T(rho) dt + dB,      T(rho) = Tr((N + N^*) rho),
// its linear (unnormalized) form under the reference Wiener measure, and the
// Girsanov weight linking the two.

#include <cstdint>
#include <vector>

#include "oqbm/lindblad.hpp"
#include "oqbm/linalg.hpp"

namespace oqbm {

struct SDEConfig {
    double dt = 1e-3;
    double t_final = 1.0;
    bool renormalize = true;
    std::uint64_t seed = 0;

    int n_steps() const;
    // Throws ConfigError on dt > t_final or dt ||N||^2 > 0.1.
    void validate(const LindbladGenerator& g) const;
};

double drift_speed(const LindbladGenerator& g, const Matrix& rho);

struct BelavkinUpdate {
    Matrix state;
    double x = 0.0;
    double pre_trace = 1.0;  // trace before renormalization
    double clipped = 0.0;    // eigenvalue mass removed by the PSD projection
};

BelavkinUpdate belavkin_step(const LindbladGenerator& g, const Matrix& rho, double x, double dB, double dt,
                             bool renormalize = true);

// sigma + L(sigma) dt + (N sigma + sigma N^*) dW
Matrix unnormalized_step(const LindbladGenerator& g, const Matrix& sigma, double dW, double dt);

struct SDEPath {
    std::vector<double> times;
    std::vector<Matrix> states;
    std::vector<double> positions;
    std::vector<double> increments;  // dB (or dW) of each step
    double clipped = 0.0;            // total over the path
};

// One path; noise from Rng::stream(cfg.seed, stream).
SDEPath belavkin_path(const LindbladGenerator& g, const DensityMatrix& rho0, double x0, const SDEConfig& cfg,
                      std::uint64_t stream);

struct ReferencePath {
    std::vector<double> times;
    std::vector<Matrix> states;       // unnormalized sigma_t
    std::vector<double> positions;    // X_t = X_0 + W_t
    std::vector<double> girsanov;     // exp(int T dW - int T^2 dt / 2), left point
    std::vector<double> increments;
};

ReferencePath unnormalized_path(const LindbladGenerator& g, const DensityMatrix& rho0, double x0,
                                const SDEConfig& cfg, std::uint64_t stream);

// Weight of a reference path from its recorded increments, evaluating T on
// the normalized states sigma_t / Tr sigma_t.
double girsanov_weight(const LindbladGenerator& g, const ReferencePath& path, double dt);

struct InitialPosition {
    double mean = 0.0;
    double stddev = 0.0;  // Gaussian spread; 0 for a point
};

struct EnsembleStats {
    std::vector<double> times;
    std::vector<Matrix> mean_state;
    std::vector<double> state_stderr;  // Frobenius bound on E||mean error||_1
    std::vector<double> mean_x;
    std::vector<double> var_x;
    std::vector<double> endpoints;     // X_T per path, in path order
    double max_clipped = 0.0;          // worst per-path clipped mass
    std::size_t projected_paths = 0;   // paths where the PSD projection fired
};

// Normalized dynamics. Statistics at `n_checkpoints` equally spaced times
// (plus t = 0). Deterministic in (cfg.seed, n_paths) for any thread count.
EnsembleStats ensemble_run(const LindbladGenerator& g, const DensityMatrix& rho0, const InitialPosition& x0,
                           std::size_t n_paths, const SDEConfig& cfg, int n_checkpoints = 1, int threads = 0);

struct ReferenceStats {
    Matrix mean_unnormalized;      // E_ref(sigma_T)
    double unnormalized_stderr = 0.0;
    std::vector<double> endpoints;  // X_T per path
    std::vector<double> weights;    // Tr sigma_T per path
    std::vector<double> girsanov;   // Girsanov weight per path
};

// Linear dynamics under the reference measure, endpoint statistics only.
ReferenceStats reference_run(const LindbladGenerator& g, const DensityMatrix& rho0, double x0, std::size_t n_paths,
                             const SDEConfig& cfg, int threads = 0);

}  // namespace oqbm

#endif  // OQBM_BELAVKIN_HPP
