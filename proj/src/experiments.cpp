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

#include "oqbm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>

#include "oqbm/belavkin.hpp"
#include "oqbm/errors.hpp"
#include "oqbm/lindblad.hpp"
#include "oqbm/nondemolition.hpp"
#include "oqbm/oqbm_discrete.hpp"
#include "oqbm/oqw.hpp"
#include "oqbm/rng.hpp"
#include "oqbm/stats.hpp"
#include "oqbm/toy_fock.hpp"

namespace oqbm {

using nlohmann::json;

Metric make_metric(std::string name, double value, std::string relation, double bound, std::string module,
                   std::string oracle) {
    bool pass = false;
    if (relation == "<=") pass = value <= bound;
    else if (relation == "<") pass = value < bound;
    else if (relation == ">=") pass = value >= bound;
    else if (relation == ">") pass = value > bound;
    else throw ContractViolation("make_metric: unknown relation " + relation);
    // NaN never passes.
    if (std::isnan(value)) pass = false;
    return {std::move(name), value, bound, std::move(relation), std::move(module), std::move(oracle), pass};
}

bool ExperimentResult::pass() const {
    return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.pass; });
}

json ExperimentResult::report() const {
    json j;
    j["kind"] = kind;
    j["seed"] = seed;
    j["pass"] = pass();
    json ms = json::array();
    for (const Metric& m : metrics) {
        ms.push_back({{"name", m.name},
                      {"value", std::isfinite(m.value) ? json(m.value) : json(format_double(m.value))},
                      {"relation", m.relation},
                      {"bound", m.bound},
                      {"pass", m.pass},
                      {"module", m.module},
                      {"oracle", m.oracle}});
    }
    j["metrics"] = ms;
    json ts = json::array();
    for (const OutputTable& t : tables) {
        ts.push_back({{"file", t.table.name + ".csv"},
                      {"columns", t.table.header},
                      {"rows", t.table.rows.size()},
                      {"module", t.module},
                      {"oracle", t.oracle}});
    }
    j["tables"] = ts;
    j["details"] = details;
    return j;
}

void write_outputs(const ExperimentResult& result, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    for (const OutputTable& t : result.tables) write_csv(t.table, (base / (t.table.name + ".csv")).string());
    auto dump = [&](const std::string& file, const json& j) {
        std::ofstream out(base / file);
        if (!out) throw std::runtime_error("cannot write " + (base / file).string());
        out << j.dump(2) << '\n';
    };
    dump("report.json", result.report());
    dump("timing.json", json{{"wall_clock_seconds", result.wall_clock}});
}

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"simulate-oqw", "simulate-belavkin", "solve-lindblad", "dilate",
                                                "converge",     "regimes",           "consistency"};
    return names;
}

const std::vector<std::string>& subcommand_kinds(const std::string& subcommand) {
    static const std::map<std::string, std::vector<std::string>> table{
        {"simulate-oqw", {"oqw-simulation"}},
        {"simulate-belavkin", {"belavkin-ensemble"}},
        {"solve-lindblad", {"lindblad-solve"}},
        {"dilate", {"dilation-audit"}},
        {"converge", {"trajectory-convergence", "channel-convergence"}},
        {"regimes", {"regime-map"}},
        {"consistency", {"consistency-audit"}},
    };
    static const std::vector<std::string> none;
    auto it = table.find(subcommand);
    return it == table.end() ? none : it->second;
}

namespace {

std::uint64_t subseed(std::uint64_t seed, std::uint64_t k) { return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (k + 1))); }

double gaussian(double x, double mean, double var) {
    return std::exp(-(x - mean) * (x - mean) / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Symmetric grid of spacing dx around `centre` covering +-half_width.
Grid centred_grid(double centre, double half_width, double dx) {
    const int half = static_cast<int>(std::ceil(half_width / dx));
    return Grid{centre - half * dx, dx, 2 * half + 1};
}

QField gaussian_field(const Grid& grid, double mean, double var, const Matrix& rho0) {
    QField q = QField::zero(grid, static_cast<int>(rho0.rows()));
    for (int i = 0; i < grid.n_points; ++i) q.values[i] = gaussian(grid.x(i), mean, var) * rho0;
    return q;
}

// E X_t - X_0 = int_0^t Tr((N + N^*) e^{sL} rho0) ds, composite Simpson.
double mean_drift(const LindbladGenerator& g, const Matrix& rho0, double t) {
    if (t <= 0.0) return 0.0;
    const int n = 256;
    const double h = t / n;
    const Matrix step = matrix_exp(superoperator(g) * h);
    const int d = g.dim();
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d);
    const Matrix speed = g.N() + g.N().adjoint();
    double sum = 0.0;
    for (int k = 0; k <= n; ++k) {
        Matrix rho = Eigen::Map<const Matrix>(v.data(), d, d);
        const double f = (speed * rho).trace().real();
        sum += (k == 0 || k == n) ? f : (k % 2 ? 4.0 * f : 2.0 * f);
        v = step * v;
    }
    return sum * h / 3.0;
}

json model_json(const ExperimentConfig& cfg) {
    json j{{"N", matrix_to_json(cfg.N)}, {"H", matrix_to_json(cfg.H)}, {"rho0", matrix_to_json(cfg.rho0)}};
    if (cfg.M.size() > 0) j["M"] = matrix_to_json(cfg.M);
    return j;
}

// ---------------------------------------------------------------------------

void run_oqw_simulation(const ExperimentConfig& cfg, int threads, ExperimentResult& r) {
    const OQBMParams p(cfg.N, cfg.H, cfg.tau.front(), cfg.M);
    const int w = cfg.window;
    const int centre = w / 2;
    const int x0 = centre + static_cast<int>(std::llround(cfg.x0 / p.delta()));
    if (x0 < 0 || x0 >= w) throw ConfigError(cfg.source + ": x0: outside the window");
    const DensityMatrix rho0(cfg.rho0);
    const OQWKernel kernel = oqbm_ring_kernel(p, w);

    DiagonalState reference = DiagonalState::point(w, x0, rho0);
    for (int s = 0; s < cfg.n_steps; ++s) reference = oqw_apply(kernel, reference);

    const double sigmas = cfg.tolerance("expectation_sigmas", 5.0);
    const ExpectationReport rep =
        expectation_identity_check(kernel, rho0, x0, cfg.n_steps, cfg.n_paths, cfg.seed, threads, reference);
    r.metrics.push_back(make_metric("expectation_discrepancy", rep.discrepancy, "<=", sigmas * rep.stderr + 1e-12,
                                    "oqw", "n-fold channel iterate (oqw_apply)"));

    std::vector<double> xs;
    for (int i = 0; i < w; ++i) xs.push_back((i - centre) * p.delta());

    // Away from the seam the ring walk is the lattice channel.
    if (x0 - cfg.n_steps >= 0 && x0 + cfg.n_steps < w) {
        LatticeField f = LatticeField::centered(p.delta(), centre, p.dim());
        f[x0] = rho0.matrix();
        for (int s = 0; s < cfg.n_steps; ++s) f = oqbm_step(p, f, true);
        double dist = 0.0;
        for (int i = 0; i < w; ++i) dist += trace_norm(f[i] - reference.sites[i]);
        r.metrics.push_back(make_metric("ring_vs_lattice", dist, "<=", cfg.tolerance("ring_vs_lattice", 1e-12),
                                        "oqbm-discrete", "lattice channel iterate (oqbm_step)"));
    }

    CsvTable sites{"oqw_expectation", {"x", "distance", "stderr", "trace_estimate", "trace_reference"}, {}};
    for (int i = 0; i < w; ++i) {
        sites.add_row({xs[i], rep.site_distance[i], rep.site_stderr[i], rep.estimate.sites[i].trace().real(),
                       reference.sites[i].trace().real()});
    }
    r.tables.push_back({std::move(sites), "oqw", "n-fold channel iterate (oqw_apply)"});
    r.tables.push_back({field_table("oqw_estimate", xs, rep.estimate.sites), "oqw", "none (Monte-Carlo estimate)"});
    r.tables.push_back({field_table("oqw_reference", xs, reference.sites), "oqw", "none (channel iterate)"});

    const QuantumTrajectory traj = sample_trajectory(kernel, rho0, x0, cfg.n_steps, cfg.seed, 0);
    std::vector<std::string> header{"step", "x"};
    for (const auto& c : matrix_columns(p.dim())) header.push_back(c);
    CsvTable path{"oqw_trajectory", header, {}};
    for (std::size_t s = 0; s < traj.positions.size(); ++s) {
        std::vector<double> row{static_cast<double>(s), (traj.positions[s] - centre) * p.delta()};
        append_matrix(row, traj.states[s].matrix());
        path.add_row(std::move(row));
    }
    r.tables.push_back({std::move(path), "oqw", "none (single trajectory, stream 0)"});
    r.details["tau"] = p.tau();
    r.details["window"] = w;
    r.details["n_steps"] = cfg.n_steps;
    r.details["n_paths"] = cfg.n_paths;
}

// ---------------------------------------------------------------------------

void run_belavkin_ensemble(const ExperimentConfig& cfg, int threads, ExperimentResult& r) {
    const LindbladGenerator g(cfg.N, cfg.H);
    const DensityMatrix rho0(cfg.rho0);
    const SDEConfig sc{cfg.dt, cfg.t_final, true, cfg.seed};
    sc.validate(g);
    const int checkpoints = std::max(1, std::min(10, sc.n_steps()));
    const EnsembleStats st = ensemble_run(g, rho0, InitialPosition{cfg.x0, 0.0}, cfg.n_paths, sc, checkpoints, threads);

    const double state_sigmas = cfg.tolerance("state_sigmas", 3.0);
    const double bias = cfg.tolerance("state_bias_per_dt", 10.0);
    const double speed_norm = op_norm(g.N() + g.N().adjoint());
    std::vector<std::string> header{"t", "mean_x", "var_x", "mean_x_expected", "distance", "stderr"};
    for (const auto& c : matrix_columns(g.dim(), "mean_")) header.push_back(c);
    CsvTable table{"belavkin_moments", header, {}};
    // Each check is reported as error / allowed error, so <= 1 passes.
    double state_ratio = 0.0, mean_ratio = 0.0, worst_state = 0.0, worst_mean = 0.0;
    for (std::size_t c = 0; c < st.times.size(); ++c) {
        const double t = st.times[c];
        const Matrix expected = semigroup_apply(g, rho0, t);
        const double dist = trace_norm(st.mean_state[c] - expected);
        const double bound = state_sigmas * st.state_stderr[c] + bias * cfg.dt;
        const double mean_expected = cfg.x0 + mean_drift(g, rho0, t);
        const double mean_err = std::abs(st.mean_x[c] - mean_expected);
        const double mean_bound = 5.0 * std::sqrt(st.var_x[c] / cfg.n_paths) + bias * cfg.dt * speed_norm * t + 1e-12;
        state_ratio = std::max(state_ratio, dist / bound);
        mean_ratio = std::max(mean_ratio, mean_err / mean_bound);
        worst_state = std::max(worst_state, dist);
        worst_mean = std::max(worst_mean, mean_err);
        std::vector<double> row{t, st.mean_x[c], st.var_x[c], mean_expected, dist, st.state_stderr[c]};
        append_matrix(row, st.mean_state[c]);
        table.add_row(std::move(row));
    }
    r.metrics.push_back(make_metric("mean_state_error_ratio", state_ratio, "<=", 1.0, "belavkin-sde",
                                    "semigroup e^{tL} rho0; allowed error 3 stderr + 10 dt"));
    r.metrics.push_back(make_metric("mean_position_error_ratio", mean_ratio, "<=", 1.0, "belavkin-sde",
                                    "x0 + int Tr((N+N^*) e^{sL} rho0) ds; allowed error 5 stderr + O(dt) bias"));
    // Positivity repairs are reported, not gated: near pure states every
    // Euler-Maruyama step with dB^2 > dt leaves a negative eigenvalue of
    // order dt, whatever the step size.
    r.details["psd_projection"] = {{"projected_paths", st.projected_paths}, {"max_clipped_mass", st.max_clipped}};
    r.tables.push_back({std::move(table), "belavkin-sde", "semigroup e^{tL} rho0 and integrated drift"});

    CsvTable ends{"belavkin_endpoints", {"path", "x_T"}, {}};
    for (std::size_t i = 0; i < st.endpoints.size(); ++i) ends.add_row({static_cast<double>(i), st.endpoints[i]});
    r.tables.push_back({std::move(ends), "belavkin-sde", "none (samples)"});
    r.details["worst_state_distance"] = worst_state;
    r.details["worst_mean_position_error"] = worst_mean;
    r.details["n_paths"] = cfg.n_paths;
    r.details["dt"] = cfg.dt;
}

// ---------------------------------------------------------------------------

void run_lindblad_solve(const ExperimentConfig& cfg, ExperimentResult& r) {
    const LindbladGenerator g(cfg.N, cfg.H);
    const double var0 = cfg.initial_variance;
    if (!(var0 > 0.0)) throw ConfigError(cfg.source + ": initial_variance: must be positive");
    const OQBMParams p(cfg.N, cfg.H, cfg.dx * cfg.dx);
    const double half = cfg.half_width > 0.0 ? cfg.half_width : default_half_width(p, cfg.t_final, 6.0 * std::sqrt(var0));
    const Grid grid = centred_grid(cfg.x0, half, cfg.dx);
    QField q = gaussian_field(grid, cfg.x0, var0, cfg.rho0);
    const double mass0 = q.mass();

    const int segments = 10;
    CsvTable summary{"lindblad_summary", {"t", "mass", "leaked", "mean_position", "mean_expected", "marginal_error"}, {}};
    double worst_marginal = 0.0, worst_mean = 0.0, worst_mass = 0.0;
    auto record = [&](double t) {
        const double mass = q.mass();
        const Matrix expected = semigroup_apply(g, cfg.rho0, t) * mass0;
        // The leaked mass has left the grid with an unknown gyroscope state.
        const double marginal = std::max(0.0, trace_norm(q.gyroscope_marginal() - expected) - q.leaked);
        const double mean_expected = cfg.x0 + mean_drift(g, cfg.rho0, t);
        const double mean_err = std::abs(q.mean_position() - mean_expected);
        worst_marginal = std::max(worst_marginal, marginal);
        worst_mean = std::max(worst_mean, mean_err);
        worst_mass = std::max(worst_mass, std::abs(mass + q.leaked - mass0));
        summary.add_row({t, mass, q.leaked, q.mean_position(), mean_expected, marginal});
    };
    record(0.0);
    for (int s = 1; s <= segments; ++s) {
        q = evolve_Q(g, q, cfg.t_final / segments, cfg.dt);
        record(cfg.t_final * s / segments);
    }
    r.metrics.push_back(make_metric("mass_balance", worst_mass, "<=", cfg.tolerance("mass_balance", 1e-9),
                                    "lindblad-pde", "mass on grid + leaked flux = initial mass"));
    r.metrics.push_back(make_metric("gyroscope_marginal_error", worst_marginal, "<=", cfg.tolerance("marginal", 1e-6),
                                    "lindblad-pde", "semigroup e^{tL} rho0"));
    if (q.leaked < 1e-8) {
        r.metrics.push_back(make_metric("mean_position_error", worst_mean, "<=", cfg.tolerance("mean_position", 1e-6),
                                        "lindblad-pde", "x0 + int Tr((N+N^*) e^{sL} rho0) ds"));
    }
    if (cfg.N.isZero(0.0) && cfg.H.isZero(0.0)) {
        const QField heat = gaussian_field(grid, cfg.x0, var0 + cfg.t_final, cfg.rho0);
        r.metrics.push_back(make_metric("heat_kernel_error", summed_trace_distance(q, heat), "<=",
                                        cfg.tolerance("heat_kernel", 1e-4), "lindblad-pde",
                                        "Gaussian heat kernel N(x0, var0 + t) rho0"));
    }
    r.tables.push_back({std::move(summary), "lindblad-pde", "semigroup e^{tL} rho0 and integrated drift"});
    r.tables.push_back({qfield_table("lindblad_Q", q), "lindblad-pde", "none (solution at t_final)"});
    r.details["grid"] = {{"x_min", grid.x_min}, {"dx", grid.dx}, {"n_points", grid.n_points}};
    r.details["dt"] = cfg.dt;
    r.details["leaked"] = q.leaked;
}

// ---------------------------------------------------------------------------

// Random PSD field of unit trace with two empty sites at each end.
LatticeField random_field(double delta, int half_sites, int dim, Rng& rng) {
    LatticeField f = LatticeField::centered(delta, half_sites, dim);
    double total = 0.0;
    for (int i = 2; i < f.n_sites() - 2; ++i) {
        f[i] = random_density_matrix(dim, rng).matrix() * rng.uniform();
        total += f[i].trace().real();
    }
    for (auto& m : f.sites()) m /= total;
    return f;
}

void run_dilation_audit(const ExperimentConfig& cfg, ExperimentResult& r) {
    if (cfg.window < 5) throw ConfigError(cfg.source + ": window: at least 5 sites are needed");
    const int dim = static_cast<int>(cfg.N.rows());
    Rng rng(cfg.seed);
    CsvTable table{"dilation_audit",
                   {"tau", "exact_discrepancy", "truncated_discrepancy", "truncated_over_tau32", "exact_defect",
                    "truncated_defect", "truncated_defect_over_tau32"},
                   {}};
    double worst = 0.0;
    for (double tau : cfg.tau) {
        const OQBMParams p(cfg.N, cfg.H, tau);
        const LatticeField f = random_field(p.delta(), cfg.window / 2, dim, rng);
        const double exact = dilation_check(p, f, true);
        const double trunc = dilation_check(p, f, false);
        const double t32 = std::pow(tau, 1.5);
        const double d_exact = completeness_defect(kraus_exact(p));
        const double d_trunc = completeness_defect(kraus_truncated(p));
        worst = std::max(worst, exact);
        table.add_row({tau, exact, trunc, trunc / t32, d_exact, d_trunc, d_trunc / t32});
    }
    r.metrics.push_back(make_metric("dilation_discrepancy", worst, "<=", cfg.tolerance("dilation", 1e-11),
                                    "oqbm-discrete", "Tr_p(R V (rho (x) |0><0|) V^* R^*) on the dense window"));
    r.tables.push_back({std::move(table), "oqbm-discrete", "dense Stinespring dilation"});

    // Toy Fock space: one probe per step, traced out at the end.
    const int n = cfg.n_probes;
    const int tw = 2 * n + 17;
    const OQBMParams p(cfg.N, cfg.H, cfg.tau.front());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cfg.rho0);
    Matrix interleaved = Matrix::Zero(dim * tw, dim * tw);
    Matrix shifts_after = interleaved;
    for (int k = 0; k < dim; ++k) {
        const double w = eig.eigenvalues()(k);
        if (w < 1e-14) continue;
        const ToyFockRegister psi = ToyFockRegister::product(eig.eigenvectors().col(k), tw, tw / 2, n);
        interleaved += w * toyfock_evolve(p, psi, n, FockOrder::Interleaved).reduced_state();
        shifts_after += w * toyfock_evolve(p, psi, n, FockOrder::ShiftsAfter).reduced_state();
    }
    LatticeField f = LatticeField::centered(p.delta(), tw / 2, dim);
    f[tw / 2] = cfg.rho0;
    for (int s = 0; s < n; ++s) f = oqbm_step(p, f, true);
    const double duality = trace_norm(interleaved - f.embedded());
    const double order = trace_norm(interleaved - shifts_after);
    r.metrics.push_back(make_metric("toyfock_duality", duality, "<=", cfg.tolerance("toyfock", 1e-10), "oqbm-discrete",
                                    "iterated lattice channel (oqbm_step)"));
    r.metrics.push_back(make_metric("toyfock_shift_order", order, "<=", cfg.tolerance("toyfock", 1e-10),
                                    "oqbm-discrete", "shifts applied after all interactions"));
    CsvTable fock{"toyfock_duality", {"tau", "n_probes", "window", "duality_distance", "order_distance"}, {}};
    fock.add_row({p.tau(), static_cast<double>(n), static_cast<double>(tw), duality, order});
    r.tables.push_back({std::move(fock), "oqbm-discrete", "iterated lattice channel (oqbm_step)"});
    r.details["window"] = cfg.window;
}

// ---------------------------------------------------------------------------

int whole_steps(double t, double tau, const std::string& source) {
    const long long n = std::llround(t / tau);
    if (n <= 0 || std::abs(n * tau - t) > 1e-9 * t) {
        throw ConfigError(source + ": tau: t_final is not a whole number of steps of " + format_double(tau));
    }
    return static_cast<int>(n);
}

void run_trajectory_convergence(const ExperimentConfig& cfg, int threads, ExperimentResult& r) {
    const LindbladGenerator g(cfg.N, cfg.H);
    const DensityMatrix rho0(cfg.rho0);
    const SDEConfig sc{cfg.dt, cfg.t_final, true, subseed(cfg.seed, 0)};
    sc.validate(g);
    const EnsembleStats sde = ensemble_run(g, rho0, InitialPosition{cfg.x0, 0.0}, cfg.n_paths, sc, 1, threads);
    const bool free_motion = cfg.N.isZero(0.0) && cfg.H.isZero(0.0);

    CsvTable table{"trajectory_convergence", {"tau", "n_steps", "ks_walk_vs_sde", "ks_walk_vs_normal", "mean_walk",
                                              "var_walk", "mean_sde", "var_sde"}, {}};
    const Moments ms = moments(sde.endpoints);
    std::vector<double> ks;
    for (std::size_t k = 0; k < cfg.tau.size(); ++k) {
        const OQBMParams p(cfg.N, cfg.H, cfg.tau[k], cfg.M);
        const int n = whole_steps(cfg.t_final, p.tau(), cfg.source);
        const UnravelEnsemble walk = unravel_ensemble(p, rho0, cfg.x0, n, cfg.n_paths, subseed(cfg.seed, k + 1), threads);
        const double d = ks_distance(walk.endpoints, sde.endpoints);
        const double x0 = cfg.x0, t = cfg.t_final;
        const double dn = free_motion ? ks_distance_to(walk.endpoints, [&](double x) { return normal_cdf(x, x0, t); })
                                      : std::nan("");
        const Moments mw = moments(walk.endpoints);
        table.add_row({p.tau(), static_cast<double>(n), d, dn, mw.mean, mw.variance, ms.mean, ms.variance});
        ks.push_back(d);
    }
    double worst_increase = -1.0;
    for (std::size_t k = 1; k < ks.size(); ++k) worst_increase = std::max(worst_increase, ks[k] - ks[k - 1]);
    if (ks.size() > 1) {
        r.metrics.push_back(make_metric("ks_largest_increase", worst_increase, "<", 0.0, "harness-cli",
                                        "Belavkin SDE law of X_T (ensemble_run)"));
    }
    r.metrics.push_back(make_metric("ks_finest", ks.back(), "<=", cfg.tolerance("ks_final", 0.02), "harness-cli",
                                    "Belavkin SDE law of X_T (ensemble_run)"));
    r.tables.push_back({std::move(table), "oqbm-discrete", "Belavkin SDE law of X_T (ensemble_run)"});
    r.details["sde_dt"] = cfg.dt;
    r.details["n_paths"] = cfg.n_paths;
}

void run_channel_convergence(const ExperimentConfig& cfg, ExperimentResult& r) {
    const LindbladGenerator g(cfg.N, cfg.H);
    const double var0 = cfg.initial_variance;
    if (!(var0 > 0.0)) throw ConfigError(cfg.source + ": initial_variance: must be positive");
    const int dim = static_cast<int>(cfg.N.rows());
    CsvTable table{"channel_convergence", {"tau", "dx", "pde_dt", "error", "ratio", "lattice_leak", "pde_leak"}, {}};
    std::vector<double> errors;
    for (double tau : cfg.tau) {
        const OQBMParams p(cfg.N, cfg.H, tau);
        const double delta = p.delta();
        const double reach = cfg.half_width > 0.0 ? cfg.half_width
                                                  : default_half_width(p, cfg.t_final, 6.0 * std::sqrt(var0));
        const int half = static_cast<int>(std::ceil((std::abs(cfg.x0) + reach) / delta));
        const Grid grid{-half * delta, delta, 2 * half + 1};
        const QField q0 = gaussian_field(grid, cfg.x0, var0, cfg.rho0);
        LatticeField f = LatticeField::centered(delta, half, dim, cfg.boundary);
        for (int i = 0; i < grid.n_points; ++i) f[i] = delta * q0.values[i];
        const KrausPair k = kraus_exact(p);
        const int n = whole_steps(cfg.t_final, tau, cfg.source);
        for (int s = 0; s < n; ++s) f = oqbm_step(k, f);
        const double pde_dt = std::min(cfg.dt, 0.4 * delta * delta);
        const QField q = evolve_Q(g, q0, cfg.t_final, pde_dt);
        double err = 0.0;
        for (int i = 0; i < grid.n_points; ++i) err += trace_norm(f[i] - delta * q.values[i]);
        const double ratio = errors.empty() ? std::nan("") : errors.back() / err;
        table.add_row({tau, delta, pde_dt, err, ratio, f.leaked(), q.leaked});
        errors.push_back(err);
    }
    double worst_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < errors.size(); ++k) worst_ratio = std::min(worst_ratio, errors[k - 1] / errors[k]);
    if (errors.size() > 1) {
        r.metrics.push_back(make_metric("smallest_error_ratio", worst_ratio, ">=", cfg.tolerance("min_ratio", 2.0),
                                        "harness-cli", "Lindblad PDE solution (evolve_Q) with dx = delta"));
    }
    r.metrics.push_back(make_metric("finest_error", errors.back(), "<=", cfg.tolerance("finest_error", 1e-2),
                                    "harness-cli", "Lindblad PDE solution (evolve_Q) with dx = delta"));
    r.tables.push_back({std::move(table), "oqbm-discrete", "Lindblad PDE solution (evolve_Q)"});
    r.details["initial_variance"] = var0;
}

// ---------------------------------------------------------------------------

void run_regime_map(const ExperimentConfig& cfg, ExperimentResult& r) {
    if (cfg.lambdas.empty()) throw ConfigError(cfg.source + ": lambdas: the regime map needs at least one value");
    CsvTable table{"regime_map", {"lambda", "null_dim", "state", "speed", "expected_speed", "residual"}, {}};
    double worst = 0.0, worst_residual = 0.0;
    bool compared = false;
    json per_lambda = json::array();
    for (double lambda : cfg.lambdas) {
        const LindbladGenerator g(lambda * cfg.N, cfg.H);
        const InvariantReport rep = invariant_states(g);
        std::vector<double> speeds = rep.speeds;
        std::sort(speeds.begin(), speeds.end());
        std::vector<double> expected;
        for (double s : cfg.expected_slopes) expected.push_back(s * lambda);
        std::sort(expected.begin(), expected.end());
        const bool match = !expected.empty() && expected.size() == speeds.size();
        for (std::size_t k = 0; k < speeds.size(); ++k) {
            const double e = match ? expected[k] : std::nan("");
            if (match) {
                worst = std::max(worst, std::abs(speeds[k] - e));
                compared = true;
            }
            table.add_row({lambda, static_cast<double>(rep.null_dim), static_cast<double>(k), speeds[k], e, rep.residual});
        }
        if (!expected.empty() && !match) worst = std::numeric_limits<double>::infinity();
        worst_residual = std::max(worst_residual, rep.residual);
        per_lambda.push_back({{"lambda", lambda}, {"null_dim", rep.null_dim}, {"n_states", rep.states.size()}});
    }
    r.metrics.push_back(make_metric("invariant_residual", worst_residual, "<=", cfg.tolerance("residual", 1e-9),
                                    "lindblad-pde", "L(rho_inf) = 0"));
    if (!cfg.expected_slopes.empty()) {
        r.metrics.push_back(make_metric("speed_error", compared ? worst : std::numeric_limits<double>::infinity(), "<=",
                                        cfg.tolerance("speed", 1e-8), "lindblad-pde",
                                        "declared speeds lambda * expected_speed_slopes"));
    }
    r.tables.push_back({std::move(table), "lindblad-pde", "declared speeds lambda * expected_speed_slopes"});
    r.details["scan"] = per_lambda;
}

// ---------------------------------------------------------------------------

double consistency_row(CsvTable& table, double id, const ConsistencyReport& c) {
    table.add_row({id, c.nondemolition ? 1.0 : 0.0, c.joint_tv, c.state_distance, c.marginal_tv, c.mean_state_error,
                   c.discrepancy()});
    return c.discrepancy();
}

// Law of (X_0..X_n) and conditional states from products of Kraus operators.
struct PathLaw {
    std::map<std::vector<int>, double> probability;
    std::map<std::vector<int>, Matrix> state;
};

PathLaw path_products(const OQWKernel& kernel, const Matrix& rho0, int x0, int n_steps) {
    PathLaw law;
    std::vector<std::pair<std::vector<int>, Matrix>> frontier{{{x0}, rho0}};
    for (int s = 0; s < n_steps; ++s) {
        std::vector<std::pair<std::vector<int>, Matrix>> next;
        for (const auto& [h, rho] : frontier) {
            for (int e : kernel.out_edges(h.back())) {
                const OQWEdge& edge = kernel.edges()[e];
                std::vector<int> hh = h;
                hh.push_back(edge.to);
                next.emplace_back(std::move(hh), edge.kraus * rho * edge.kraus.adjoint());
            }
        }
        frontier = std::move(next);
    }
    for (const auto& [h, rho] : frontier) {
        const double p = rho.trace().real();
        law.probability[h] += p;
        law.state[h] = p > 0.0 ? Matrix(rho / p) : rho;
    }
    return law;
}

void run_consistency_audit(const ExperimentConfig& cfg, ExperimentResult& r) {
    const int nv = 3;
    const int dim = static_cast<int>(cfg.rho0.rows());
    const int x0 = static_cast<int>(std::llround(cfg.x0));
    if (x0 < 0 || x0 >= nv) throw ConfigError(cfg.source + ": x0: must be a vertex index in 0..2");
    std::vector<double> noise = cfg.pointer_noise.empty() ? std::vector<double>{0.7, 0.2, 0.1} : cfg.pointer_noise;
    if (static_cast<int>(noise.size()) != nv) throw ConfigError(cfg.source + ": pointer_noise: needs 3 entries");
    Rng rng(cfg.seed);
    const OQWKernel kernel = random_oqw_kernel(nv, dim, rng);
    const MeasuredEvolution me = oqw_dilation(kernel, cfg.n_steps);
    const Matrix state = oqw_dilation_state(cfg.rho0, x0, nv, cfg.n_steps);

    Matrix sigma = Matrix::Zero(nv, nv);
    for (int i = 0; i < nv; ++i) sigma(i, i) = noise[i];
    const DensityMatrix noisy(sigma);
    std::vector<PointerSpec> noisy_ptrs, perfect_ptrs;
    for (int k = 0; k < me.n_times(); ++k) {
        noisy_ptrs.push_back({PointerMap::cyclic_shift(nv), noisy});
        perfect_ptrs.push_back({PointerMap::perfect(nv), DensityMatrix::basis_state(nv, 0)});
    }
    CsvTable table{"consistency",
                   {"instance", "nondemolition", "joint_tv", "state_distance", "marginal_tv", "mean_state_error",
                    "discrepancy"},
                   {}};
    const double tol = cfg.tolerance("consistency", 1e-10);
    const ConsistencyReport with_noise = consistency_check(me, state, noisy_ptrs);
    const ConsistencyReport exact = consistency_check(me, state, perfect_ptrs);
    r.metrics.push_back(make_metric("noisy_pointer_discrepancy", consistency_row(table, 0, with_noise), "<=", tol,
                                    "nondemolition-consistency", "pushforward of the exact unraveling"));
    r.metrics.push_back(make_metric("perfect_pointer_discrepancy", consistency_row(table, 1, exact), "<=", tol,
                                    "nondemolition-consistency", "pushforward of the exact unraveling"));
    r.metrics.push_back(make_metric("oqw_dilation_nondemolition", with_noise.nondemolition ? 1.0 : 0.0, ">=", 1.0,
                                    "nondemolition-consistency", "commutation of propagated projectors"));

    // Independent route: Kraus path products of the walk itself.
    const UnravelingDistribution dist = exact_unraveling(me, state);
    const PathLaw law = path_products(kernel, cfg.rho0, x0, cfg.n_steps);
    const UnravelingLevel& last = dist.final_level();
    std::map<std::vector<int>, double> unravel_prob;
    double state_err = 0.0;
    for (std::size_t a = 0; a < last.histories.size(); ++a) {
        unravel_prob[last.histories[a]] += last.probability[a];
        auto it = law.state.find(last.histories[a]);
        if (last.probability[a] >= 1e-9 && it != law.state.end() && law.probability.at(last.histories[a]) >= 1e-9) {
            state_err = std::max(state_err, trace_norm(last.conditional_state(static_cast<int>(a))->matrix() - it->second));
        }
    }
    double tv = 0.0;
    for (const auto& [h, p] : law.probability) {
        auto it = unravel_prob.find(h);
        tv += std::abs(p - (it == unravel_prob.end() ? 0.0 : it->second));
    }
    for (const auto& [h, p] : unravel_prob) {
        if (!law.probability.count(h)) tv += p;
    }
    tv *= 0.5;
    r.metrics.push_back(make_metric("path_law_tv", tv, "<=", tol, "nondemolition-consistency",
                                    "products of the walk's Kraus operators along each path"));
    r.metrics.push_back(make_metric("path_state_distance", state_err, "<=", tol, "nondemolition-consistency",
                                    "products of the walk's Kraus operators along each path"));

    const MeasuredInstance bad = demolition_counterexample();
    std::vector<PointerSpec> bad_ptrs(bad.evolution.n_times(),
                                      PointerSpec{PointerMap::perfect(2), DensityMatrix::basis_state(2, 0)});
    const ConsistencyReport broken = consistency_check(bad.evolution, bad.state, bad_ptrs);
    r.metrics.push_back(make_metric("counterexample_discrepancy", consistency_row(table, 2, broken), ">",
                                    cfg.tolerance("counterexample", 1e-3), "nondemolition-consistency",
                                    "Born marginal of the second measurement"));
    r.tables.push_back({std::move(table), "nondemolition-consistency",
                        "pushforward of the exact unraveling; rows: noisy, perfect, counterexample"});
    r.details["n_steps"] = cfg.n_steps;
    r.details["pointer_noise"] = noise;
    r.details["histories"] = last.histories.size();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
    const auto start = std::chrono::steady_clock::now();
    ExperimentResult r;
    r.kind = cfg.kind;
    r.seed = cfg.seed;
    r.details["model"] = model_json(cfg);
    if (cfg.kind == "oqw-simulation") run_oqw_simulation(cfg, threads, r);
    else if (cfg.kind == "belavkin-ensemble") run_belavkin_ensemble(cfg, threads, r);
    else if (cfg.kind == "lindblad-solve") run_lindblad_solve(cfg, r);
    else if (cfg.kind == "dilation-audit") run_dilation_audit(cfg, r);
    else if (cfg.kind == "trajectory-convergence") run_trajectory_convergence(cfg, threads, r);
    else if (cfg.kind == "channel-convergence") run_channel_convergence(cfg, r);
    else if (cfg.kind == "regime-map") run_regime_map(cfg, r);
    else if (cfg.kind == "consistency-audit") run_consistency_audit(cfg, r);
    else throw ConfigError(cfg.source + ": kind: unknown experiment kind '" + cfg.kind + "'");
    r.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

}  // namespace oqbm
