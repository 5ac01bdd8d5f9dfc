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

// Command-line front end: one subcommand per experiment family.
//
//   oqbm <subcommand> --config <file> --out <dir> [--seed <u64>] [--threads <n>]
//
// Exit status: 0 when every declared tolerance passes, 1 when a metric
// fails, 2 on configuration or runtime errors.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "oqbm/config.hpp"
#include "oqbm/errors.hpp"
#include "oqbm/experiments.hpp"
#include "oqbm/parallel.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

int run(const std::string& subcommand, const Options& opt) {
    oqbm::ExperimentConfig cfg = oqbm::load_config(opt.config);
    const auto& allowed = oqbm::subcommand_kinds(subcommand);
    if (std::find(allowed.begin(), allowed.end(), cfg.kind) == allowed.end()) {
        std::string list;
        for (const auto& k : allowed) list += (list.empty() ? "" : ", ") + k;
        throw oqbm::ConfigError(opt.config + ": kind: '" + cfg.kind + "' cannot be run by '" + subcommand +
                                "' (expected " + list + ")");
    }
    if (opt.seed) cfg.seed = *opt.seed;
    const int threads = oqbm::resolve_threads(opt.threads);
    const oqbm::ExperimentResult result = oqbm::run_experiment(cfg, threads);
    oqbm::write_outputs(result, opt.out);
    for (const auto& m : result.metrics) {
        std::printf("%-4s %-32s %.6g %s %.6g  [%s vs %s]\n", m.pass ? "ok" : "FAIL", m.name.c_str(), m.value,
                    m.relation.c_str(), m.bound, m.module.c_str(), m.oracle.c_str());
    }
    std::printf("%s: %s (%.2f s, %d threads) -> %s\n", cfg.kind.c_str(), result.pass() ? "pass" : "FAIL",
                result.wall_clock, threads, opt.out.c_str());
    return result.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Open quantum Brownian motion toolkit"};
    app.require_subcommand(1);
    Options opt;
    std::string chosen;
    for (const auto& name : oqbm::subcommands()) {
        std::string kinds;
        for (const auto& k : oqbm::subcommand_kinds(name)) kinds += (kinds.empty() ? "" : ", ") + k;
        CLI::App* sub = app.add_subcommand(name, "Run a " + kinds + " experiment");
        sub->add_option("--config", opt.config, "Experiment configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "Output directory")->required();
        sub->add_option("--seed", opt.seed, "Override the configured seed");
        sub->add_option("--threads", opt.threads, "Worker threads (default: OQBM_THREADS, then all cores)")
            ->check(CLI::NonNegativeNumber);
        sub->callback([&chosen, name] { chosen = name; });
    }
    CLI11_PARSE(app, argc, argv);
    try {
        return run(chosen, opt);
    } catch (const oqbm::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
    }
    return 2;
}
