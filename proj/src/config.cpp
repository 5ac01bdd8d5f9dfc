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

#include "oqbm/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "oqbm/errors.hpp"

namespace oqbm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ConfigError("field '" + field + "': " + what);
}

cplx parse_complex(const json& j, const std::string& field) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    fail(field, "expected a number or an [re, im] pair");
}

Matrix named_matrix(const std::string& name, const std::string& field) {
    if (name == "identity") return pauli::identity(2);
    if (name == "zero") return Matrix::Zero(2, 2);
    if (name == "sigma_x") return pauli::x();
    if (name == "sigma_y") return pauli::y();
    if (name == "sigma_z") return pauli::z();
    if (name == "sigma_minus") return pauli::minus();
    if (name == "sigma_plus") return pauli::plus();
    fail(field, "unknown matrix name '" + name + "'");
}

double number(const json& j, const std::string& field) {
    if (!j.is_number()) fail(field, "expected a number");
    double v = j.get<double>();
    if (!std::isfinite(v)) fail(field, "not finite");
    return v;
}

double positive(const json& j, const std::string& field) {
    double v = number(j, field);
    if (!(v > 0.0)) fail(field, "must be positive");
    return v;
}

std::int64_t integer(const json& j, const std::string& field, std::int64_t lo) {
    if (!j.is_number_integer() && !j.is_number_unsigned()) fail(field, "expected an integer");
    std::int64_t v = j.get<std::int64_t>();
    if (v < lo) fail(field, "must be at least " + std::to_string(lo));
    return v;
}

std::vector<double> number_list(const json& j, const std::string& field) {
    if (!j.is_array()) fail(field, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

Matrix parse_state(const json& j, const std::string& field) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        const double r = 1.0 / std::sqrt(2.0);
        Vector v(2);
        if (s == "plus") {
            v << r, r;
        } else if (s == "minus") {
            v << r, -r;
        } else if (s == "zero") {
            v << 1.0, 0.0;
        } else if (s == "one") {
            v << 0.0, 1.0;
        } else if (s == "maximally_mixed") {
            return Matrix::Identity(2, 2) / 2.0;
        } else {
            fail(field, "unknown state name '" + s + "'");
        }
        return projector(v);
    }
    if (j.is_object() && j.contains("pure")) {
        const json& amp = j["pure"];
        if (!amp.is_array() || amp.empty()) fail(field + ".pure", "expected a non-empty amplitude array");
        Vector v(static_cast<Eigen::Index>(amp.size()));
        for (std::size_t i = 0; i < amp.size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = parse_complex(amp[i], field + ".pure[" + std::to_string(i) + "]");
        }
        if (v.norm() == 0.0) fail(field + ".pure", "zero vector");
        return projector(v / v.norm());
    }
    return parse_matrix(j, field);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "kind",      "model",          "initial_state", "x0",       "tau",        "dt",
        "dx",        "t_final",        "initial_variance", "window", "n_paths",   "n_steps",
        "n_probes",  "seed",           "lambdas",       "expected_speed_slopes", "pointer_noise",
        "tolerances", "description"};
    return keys;
}

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

double ExperimentConfig::tolerance(const std::string& name, double fallback) const {
    auto it = tolerances.find(name);
    return it == tolerances.end() ? fallback : it->second;
}

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"oqw-simulation",       "belavkin-ensemble",   "lindblad-solve",
                                                "dilation-audit",       "trajectory-convergence",
                                                "channel-convergence",  "regime-map",          "consistency-audit"};
    return kinds;
}

Matrix parse_matrix(const json& j, const std::string& field) {
    if (j.is_string()) return named_matrix(j.get<std::string>(), field);
    if (j.is_object()) {
        if (!j.contains("matrix")) fail(field, "object form needs a 'matrix' entry");
        Matrix m = parse_matrix(j["matrix"], field + ".matrix");
        if (j.contains("scale")) m *= parse_complex(j["scale"], field + ".scale");
        return m;
    }
    if (!j.is_array() || j.empty()) fail(field, "expected a matrix name or a non-empty array of rows");
    const std::size_t rows = j.size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string rf = field + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != rows) fail(rf, "expected a row of length " + std::to_string(rows));
        for (std::size_t c = 0; c < rows; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_complex(j[r][c], rf + "[" + std::to_string(c) + "]");
        }
    }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

ExperimentConfig parse_config(const json& j, const std::string& source) {
    if (!j.is_object()) throw ConfigError(source + ": top level must be an object");
    for (const auto& item : j.items()) {
        if (!known_keys().count(item.key())) fail(item.key(), "unknown field");
    }
    ExperimentConfig cfg;
    cfg.source = source;
    if (!j.contains("kind") || !j["kind"].is_string()) fail("kind", "required string");
    cfg.kind = j["kind"].get<std::string>();
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), cfg.kind) == kinds.end()) fail("kind", "unknown experiment kind '" + cfg.kind + "'");

    cfg.N = Matrix::Zero(2, 2);
    cfg.H = Matrix::Zero(2, 2);
    if (j.contains("model")) {
        const json& model = j["model"];
        if (!model.is_object()) fail("model", "expected an object with N, H, M");
        for (const auto& item : model.items()) {
            if (item.key() != "N" && item.key() != "H" && item.key() != "M") fail("model." + item.key(), "unknown field");
        }
        if (model.contains("N")) cfg.N = parse_matrix(model["N"], "model.N");
        if (model.contains("H")) cfg.H = parse_matrix(model["H"], "model.H");
        if (model.contains("M")) cfg.M = parse_matrix(model["M"], "model.M");
    }
    const auto d = cfg.N.rows();
    if (cfg.H.rows() != d) fail("model.H", "dimension differs from model.N");
    if (cfg.M.size() == 0) cfg.M = Matrix::Zero(d, d);
    if (cfg.M.rows() != d) fail("model.M", "dimension differs from model.N");
    if (hermitian_defect(cfg.H) > tolerances().hermitian) fail("model.H", "not Hermitian");

    cfg.rho0 = j.contains("initial_state") ? parse_state(j["initial_state"], "initial_state")
                                           : Matrix(Matrix::Identity(d, d) / static_cast<double>(d));
    if (cfg.rho0.rows() != d) fail("initial_state", "dimension differs from model.N");
    try {
        DensityMatrix check(cfg.rho0);
    } catch (const std::exception& e) {
        fail("initial_state", e.what());
    }

    if (j.contains("x0")) cfg.x0 = number(j["x0"], "x0");
    if (j.contains("tau")) {
        cfg.tau = j["tau"].is_array() ? number_list(j["tau"], "tau") : std::vector<double>{number(j["tau"], "tau")};
        for (std::size_t i = 0; i < cfg.tau.size(); ++i) {
            if (!(cfg.tau[i] > 0.0)) fail("tau[" + std::to_string(i) + "]", "must be positive");
            if (i > 0 && !(cfg.tau[i] < cfg.tau[i - 1])) fail("tau", "sweep must be strictly decreasing");
        }
    }
    if (cfg.tau.empty()) cfg.tau = {0.01};
    if (j.contains("dt")) cfg.dt = positive(j["dt"], "dt");
    if (j.contains("dx")) cfg.dx = positive(j["dx"], "dx");
    if (j.contains("t_final")) cfg.t_final = positive(j["t_final"], "t_final");
    if (j.contains("initial_variance")) cfg.initial_variance = positive(j["initial_variance"], "initial_variance");
    if (j.contains("window")) {
        const json& w = j["window"];
        if (!w.is_object()) fail("window", "expected an object");
        for (const auto& item : w.items()) {
            const std::string f = "window." + item.key();
            if (item.key() == "policy") {
                if (!item.value().is_string()) fail(f, "expected \"absorb\" or \"reflect\"");
                const std::string p = item.value().get<std::string>();
                if (p == "absorb") {
                    cfg.boundary = Boundary::Absorb;
                } else if (p == "reflect") {
                    cfg.boundary = Boundary::Reflect;
                } else {
                    fail(f, "expected \"absorb\" or \"reflect\"");
                }
            } else if (item.key() == "half_width") {
                cfg.half_width = positive(item.value(), f);
            } else if (item.key() == "sites") {
                cfg.window = static_cast<int>(integer(item.value(), f, 5));
            } else {
                fail(f, "unknown field");
            }
        }
    }
    if (j.contains("n_paths")) cfg.n_paths = static_cast<std::size_t>(integer(j["n_paths"], "n_paths", 1));
    if (j.contains("n_steps")) cfg.n_steps = static_cast<int>(integer(j["n_steps"], "n_steps", 0));
    if (j.contains("n_probes")) cfg.n_probes = static_cast<int>(integer(j["n_probes"], "n_probes", 0));
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) fail("seed", "expected an integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("lambdas")) cfg.lambdas = number_list(j["lambdas"], "lambdas");
    if (j.contains("expected_speed_slopes")) {
        cfg.expected_slopes = number_list(j["expected_speed_slopes"], "expected_speed_slopes");
    }
    if (j.contains("pointer_noise")) {
        cfg.pointer_noise = number_list(j["pointer_noise"], "pointer_noise");
        double s = 0.0;
        for (double p : cfg.pointer_noise) {
            if (p < 0.0) fail("pointer_noise", "probabilities must be non-negative");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12) fail("pointer_noise", "probabilities must sum to 1");
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) fail("tolerances", "expected an object of named numbers");
        for (const auto& item : t.items()) cfg.tolerances[item.key()] = number(item.value(), "tolerances." + item.key());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte);
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
    }
    try {
        return parse_config(j, path);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace oqbm
