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

#ifndef OQBM_EXPERIMENTS_HPP
#define OQBM_EXPERIMENTS_HPP

// Experiment drivers behind the command line. Every metric names the module
// that produced it and the oracle it was compared with; report() is a pure
// function of (config, seed) so it can be diffed across thread counts.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "oqbm/config.hpp"
#include "oqbm/csv.hpp"

namespace oqbm {

struct Metric {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    std::string relation;  // "<=", "<", ">=" or ">": value relation bound
    std::string module;
    std::string oracle;
    bool pass = false;
};

Metric make_metric(std::string name, double value, std::string relation, double bound, std::string module,
                   std::string oracle);

struct OutputTable {
    CsvTable table;
    std::string module;
    std::string oracle;
};

struct ExperimentResult {
    std::string kind;
    std::uint64_t seed = 0;
    std::vector<Metric> metrics;
    std::vector<OutputTable> tables;
    nlohmann::json details = nlohmann::json::object();
    double wall_clock = 0.0;  // seconds; kept out of report()

    bool pass() const;
    nlohmann::json report() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0);

// <dir>/<table>.csv, <dir>/report.json and <dir>/timing.json. Creates dir.
void write_outputs(const ExperimentResult& result, const std::string& dir);

// Experiment kinds a CLI subcommand accepts; empty for unknown subcommands.
const std::vector<std::string>& subcommand_kinds(const std::string& subcommand);
const std::vector<std::string>& subcommands();

}  // namespace oqbm

#endif  // OQBM_EXPERIMENTS_HPP
