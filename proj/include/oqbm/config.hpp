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

#ifndef OQBM_CONFIG_HPP
#define OQBM_CONFIG_HPP

// Experiment configuration read from JSON. Complex numbers are [re, im]
// pairs (plain numbers are read as real), matrices are row-major nested
// arrays, and the names "identity", "zero", "sigma_x", "sigma_y", "sigma_z",
// "sigma_minus", "sigma_plus" stand for the usual 2x2 matrices. A matrix may
// also be {"matrix": <literal or name>, "scale": [re, im]}.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "oqbm/linalg.hpp"
#include "oqbm/oqbm_discrete.hpp"

namespace oqbm {

struct ExperimentConfig {
    std::string kind;
    std::string source;  // file the config came from, for diagnostics

    Matrix N, H, M;
    Matrix rho0;
    double x0 = 0.0;

    std::vector<double> tau;  // strictly decreasing
    double dt = 1e-3;
    double dx = 0.05;
    double t_final = 1.0;
    double initial_variance = 1.0;  // Gaussian initial data of the PDE runs

    Boundary boundary = Boundary::Absorb;
    double half_width = 0.0;  // 0 selects the default window policy

    std::size_t n_paths = 10000;
    int n_steps = 20;
    int n_probes = 8;
    int window = 65;
    std::uint64_t seed = 1;

    std::vector<double> lambdas;        // regime-map scan of N -> lambda N
    std::vector<double> expected_slopes;  // expected speeds per unit lambda
    std::vector<double> pointer_noise;  // read-out noise distribution of the pointers

    std::map<std::string, double> tolerances;

    double tolerance(const std::string& name, double fallback) const;
};

const std::vector<std::string>& experiment_kinds();

// Throws ConfigError naming the offending field.
Matrix parse_matrix(const nlohmann::json& j, const std::string& field);
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& source = "<memory>");
// Parse errors carry line and column.
ExperimentConfig load_config(const std::string& path);
nlohmann::json matrix_to_json(const Matrix& m);

}  // namespace oqbm

#endif  // OQBM_CONFIG_HPP
