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

#include "oqbm/nondemolition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "oqbm/errors.hpp"

namespace oqbm {

namespace {

// Conditional states are compared only where both routes give at least this
// probability; below it the division amplifies round-off.
constexpr double kComparableProbability = 1e-9;

double noise(const PointerSpec& p, int x, int y) { return p.sigma.matrix()(p.psi.inverse(x, y), p.psi.inverse(x, y)).real(); }

Matrix block_of_pointer(const Matrix& big, int dim_sys, int n_pointer, int y) {
    Matrix out(dim_sys, dim_sys);
    for (int i = 0; i < dim_sys; ++i)
        for (int j = 0; j < dim_sys; ++j) out(i, j) = big(i * n_pointer + y, j * n_pointer + y);
    return out;
}

Matrix evolve_to(const MeasuredEvolution& me, const Matrix& state, int k) {
    const Matrix u = k == 0 ? me.unitary(0) : me.propagator(k, k - 1);
    return u * state * u.adjoint();
}

}  // namespace

MeasuredEvolution::MeasuredEvolution(int dim_g, int dim_b, std::vector<Matrix> unitaries,
                                     std::vector<std::vector<Matrix>> algebras)
    : dim_g_(dim_g), dim_b_(dim_b), unitaries_(std::move(unitaries)), algebras_(std::move(algebras)) {
    if (dim_g_ <= 0 || dim_b_ <= 0) throw ContractViolation("MeasuredEvolution: empty factor");
    if (unitaries_.empty() || unitaries_.size() != algebras_.size()) {
        throw ContractViolation("MeasuredEvolution: need one unitary and one algebra per time");
    }
    const int n = dim_g_ * dim_b_;
    for (const Matrix& u : unitaries_) {
        if (u.rows() != n || u.cols() != n) throw DimensionError("MeasuredEvolution: unitary of wrong size");
        if (unitarity_defect(u) > tolerances().unitary) throw ContractViolation("MeasuredEvolution: U_t not unitary");
    }
    for (const auto& alg : algebras_) {
        if (alg.empty()) throw ContractViolation("MeasuredEvolution: empty measurement");
        Matrix sum = Matrix::Zero(dim_b_, dim_b_);
        for (std::size_t a = 0; a < alg.size(); ++a) {
            if (alg[a].rows() != dim_b_ || alg[a].cols() != dim_b_) {
                throw DimensionError("MeasuredEvolution: projector of wrong size");
            }
            for (std::size_t b = 0; b < alg.size(); ++b) {
                Matrix expect = a == b ? alg[a] : Matrix::Zero(dim_b_, dim_b_);
                if (op_norm(alg[a] * alg[b] - expect) > 1e-10) {
                    throw ContractViolation("MeasuredEvolution: projectors are not mutually orthogonal projections");
                }
            }
            sum += alg[a];
        }
        if (op_norm(sum - Matrix::Identity(dim_b_, dim_b_)) > 1e-10) {
            throw ContractViolation("MeasuredEvolution: projectors do not resolve the identity");
        }
    }
}

Matrix MeasuredEvolution::lifted(int k, int x) const {
    return kron(Matrix::Identity(dim_g_, dim_g_), algebras_[k][x]);
}

Matrix MeasuredEvolution::propagator(int k, int j) const { return unitaries_[k] * unitaries_[j].adjoint(); }

NondemolitionReport check_nondemolition(const MeasuredEvolution& me, double tol) {
    NondemolitionReport r;
    const int dg = me.dim_g();
    const int db = me.dim_b();
    for (int k = 0; k < me.n_times(); ++k) {
        for (int j = 0; j <= k; ++j) {
            const Matrix u = me.propagator(k, j);
            for (std::size_t x = 0; x < me.algebra(j).size(); ++x) {
                const Matrix q = u * me.lifted(j, static_cast<int>(x)) * u.adjoint();
                const Matrix reduced = partial_trace(q, dg, db, Keep::Second) / static_cast<double>(dg);
                r.max_factorization =
                    std::max(r.max_factorization, op_norm(q - kron(Matrix::Identity(dg, dg), reduced)));
                for (std::size_t y = 0; y < me.algebra(k).size(); ++y) {
                    const Matrix p = me.lifted(k, static_cast<int>(y));
                    r.max_commutator = std::max(r.max_commutator, op_norm(q * p - p * q));
                }
            }
        }
    }
    r.pass = r.max_commutator <= tol && r.max_factorization <= tol;
    return r;
}

std::optional<DensityMatrix> UnravelingLevel::conditional_state(int atom) const {
    const double p = probability[atom];
    if (p < kNullProbability) return std::nullopt;
    Matrix m = hermitize(unnormalized[atom] / p);
    if (min_eigenvalue(m) < -tolerances().psd) m = psd_project(m, 1e-6);
    return DensityMatrix(m / m.trace().real(), 1e-9);
}

std::vector<int> UnravelingDistribution::connecting_map(int s, int t) const {
    if (s < 0 || t >= static_cast<int>(levels.size()) || s > t) throw DomainError("connecting_map: need 0 <= s <= t");
    std::vector<int> map(levels[t].histories.size());
    for (std::size_t a = 0; a < map.size(); ++a) {
        int idx = static_cast<int>(a);
        for (int k = t; k > s; --k) idx = levels[k].parent[idx];
        map[a] = idx;
    }
    return map;
}

UnravelingDistribution exact_unraveling(const MeasuredEvolution& me, const Matrix& rho0) {
    const int n = me.dim_g() * me.dim_b();
    if (rho0.rows() != n || rho0.cols() != n) throw DimensionError("exact_unraveling: state of wrong size");
    std::size_t total = 1;
    for (int k = 0; k < me.n_times(); ++k) {
        total *= me.algebra(k).size();
        if (total > kMaxHistories) throw CapacityError("exact_unraveling: more than 10^4 outcome histories");
    }
    UnravelingDistribution dist;
    dist.nondemolition = check_nondemolition(me).pass;
    std::vector<Matrix> atoms{Matrix::Identity(n, n)};
    std::vector<std::vector<int>> histories{{}};
    Matrix rho = rho0;
    for (int k = 0; k < me.n_times(); ++k) {
        rho = evolve_to(me, rho, k);
        const Matrix u = k == 0 ? Matrix::Identity(n, n) : me.propagator(k, k - 1);
        UnravelingLevel level;
        std::vector<Matrix> next_atoms;
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            const Matrix carried = u * atoms[a] * u.adjoint();
            for (std::size_t x = 0; x < me.algebra(k).size(); ++x) {
                Matrix pi = me.lifted(k, static_cast<int>(x)) * carried;
                if (op_norm(pi) < 1e-12) continue;
                std::vector<int> h = histories[a];
                h.push_back(static_cast<int>(x));
                const Matrix weighted = pi * rho * pi.adjoint();
                level.histories.push_back(std::move(h));
                level.probability.push_back(std::max(0.0, weighted.trace().real()));
                level.unnormalized.push_back(partial_trace(weighted, me.dim_g(), me.dim_b(), Keep::First));
                level.phi.push_back(static_cast<int>(x));
                level.parent.push_back(k == 0 ? -1 : static_cast<int>(a));
                next_atoms.push_back(std::move(pi));
            }
        }
        atoms = std::move(next_atoms);
        histories = level.histories;
        dist.levels.push_back(std::move(level));
    }
    return dist;
}

std::vector<double> born_marginal(const MeasuredEvolution& me, const Matrix& rho0, int k) {
    if (k < 0 || k >= me.n_times()) throw DomainError("born_marginal: time index out of range");
    const Matrix rho = me.unitary(k) * rho0 * me.unitary(k).adjoint();
    std::vector<double> p;
    for (std::size_t x = 0; x < me.algebra(k).size(); ++x) {
        p.push_back(std::max(0.0, (me.lifted(k, static_cast<int>(x)) * rho).trace().real()));
    }
    return p;
}

double ConsistencyReport::discrepancy() const {
    return std::max({joint_tv, state_distance, marginal_tv, mean_state_error});
}

ConsistencyReport consistency_check(const MeasuredEvolution& me, const Matrix& rho0,
                                    const std::vector<PointerSpec>& pointers) {
    if (static_cast<int>(pointers.size()) != me.n_times()) {
        throw ContractViolation("consistency_check: one pointer per measurement time is required");
    }
    for (int k = 0; k < me.n_times(); ++k) {
        if (pointers[k].psi.n_system() != static_cast<int>(me.algebra(k).size())) {
            throw DimensionError("consistency_check: pointer map does not match the outcome set at time " +
                                 std::to_string(k));
        }
        if (pointers[k].sigma.dim() != pointers[k].psi.n_pointer()) {
            throw DimensionError("consistency_check: pointer state of wrong size");
        }
    }
    std::size_t total = 1;
    for (const PointerSpec& p : pointers) {
        total *= p.psi.n_pointer();
        if (total > kMaxHistories) throw CapacityError("consistency_check: more than 10^4 pointer histories");
    }

    ConsistencyReport report;
    const UnravelingDistribution exact = exact_unraveling(me, rho0);
    report.nondemolition = exact.nondemolition;
    const int dg = me.dim_g();
    const int db = me.dim_b();
    const int n = dg * db;

    // Route A: branches keyed by pointer history, unnormalized on G (x) B.
    std::map<std::vector<int>, Matrix> branches{{{}, rho0}};
    Matrix rho_t = rho0;
    for (int k = 0; k < me.n_times(); ++k) {
        const PointerSpec& ptr = pointers[k];
        const int ny = ptr.psi.n_pointer();
        const Matrix z = pointer_unitary(me.algebra(k), ptr.psi, dg);
        std::map<std::vector<int>, Matrix> next;
        for (const auto& [hist, omega] : branches) {
            const Matrix evolved = evolve_to(me, omega, k);
            const Matrix big = z * kron(evolved, ptr.sigma.matrix()) * z.adjoint();
            for (int y = 0; y < ny; ++y) {
                std::vector<int> h = hist;
                h.push_back(y);
                next.emplace(std::move(h), block_of_pointer(big, n, ny, y));
            }
        }
        branches = std::move(next);

        // Route B at this level: pushforward of the exact unraveling.
        const UnravelingLevel& level = exact.levels[k];
        double tv = 0.0;
        std::vector<double> marginal_a(ny, 0.0);
        for (const auto& [hist, omega] : branches) {
            const double pa = std::max(0.0, omega.trace().real());
            const Matrix sa = partial_trace(omega, dg, db, Keep::First);
            marginal_a[hist.back()] += pa;
            double pb = 0.0;
            Matrix sb = Matrix::Zero(dg, dg);
            for (std::size_t a = 0; a < level.histories.size(); ++a) {
                double w = 1.0;
                for (int r = 0; r <= k && w != 0.0; ++r) w *= noise(pointers[r], level.histories[a][r], hist[r]);
                if (w == 0.0) continue;
                pb += w * level.probability[a];
                sb += w * level.unnormalized[a];
            }
            tv += std::abs(pa - pb);
            if (pa >= kComparableProbability && pb >= kComparableProbability) {
                report.state_distance = std::max(report.state_distance, trace_norm(sa / pa - sb / pb));
            }
        }
        report.joint_tv = std::max(report.joint_tv, 0.5 * tv);

        // Born marginal at t_k read through the pointer noise.
        const std::vector<double> born = born_marginal(me, rho0, k);
        double mtv = 0.0;
        for (int y = 0; y < ny; ++y) {
            double q = 0.0;
            for (std::size_t x = 0; x < born.size(); ++x) q += born[x] * noise(ptr, static_cast<int>(x), y);
            mtv += std::abs(q - marginal_a[y]);
        }
        report.marginal_tv = std::max(report.marginal_tv, 0.5 * mtv);

        // Average of the unravelled states against the reduced evolution.
        rho_t = evolve_to(me, rho_t, k);
        Matrix mean = Matrix::Zero(dg, dg);
        for (const Matrix& s : level.unnormalized) mean += s;
        report.mean_state_error =
            std::max(report.mean_state_error, trace_norm(mean - partial_trace(rho_t, dg, db, Keep::First)));
    }
    return report;
}

MeasuredEvolution oqw_dilation(const OQWKernel& kernel, int n_steps, int reference_vertex) {
    const int nv = kernel.n_vertices();
    const int d = kernel.dim();
    if (n_steps < 0) throw ContractViolation("oqw_dilation: negative step count");
    if (reference_vertex < 0 || reference_vertex >= nv) throw DomainError("oqw_dilation: reference vertex");
    long long db_ll = 1;
    for (int k = 0; k <= n_steps; ++k) {
        db_ll *= nv;
        if (db_ll * d > 1024) throw CapacityError("oqw_dilation: dilation space exceeds 1024 dimensions");
    }
    const int db = static_cast<int>(db_ll);
    const int n = d * db;

    // V(x) on G (x) l2(V), index g * nv + z.
    std::vector<Matrix> vx(nv);
    for (int x = 0; x < nv; ++x) {
        Matrix w = Matrix::Zero(d * nv, d);
        for (int e : kernel.out_edges(x)) {
            const OQWEdge& edge = kernel.edges()[e];
            for (int g = 0; g < d; ++g)
                for (int h = 0; h < d; ++h) w(g * nv + edge.to, h) += edge.kraus(g, h);
        }
        Eigen::HouseholderQR<Matrix> qr(w);
        const Matrix q = qr.householderQ();
        Matrix v(d * nv, d * nv);
        int spare = d;
        for (int g = 0; g < d; ++g) {
            for (int z = 0; z < nv; ++z) {
                v.col(g * nv + z) = z == reference_vertex ? Vector(w.col(g)) : Vector(q.col(spare++));
            }
        }
        vx[x] = v;
    }

    // B index: position slowest, then probes 1..n_steps.
    std::vector<int> stride(n_steps + 1);
    for (int f = n_steps, s = 1; f >= 0; --f, s *= nv) stride[f] = s;
    auto digit = [&](int b, int f) { return (b / stride[f]) % nv; };

    std::vector<Matrix> steps;
    for (int k = 1; k <= n_steps; ++k) {
        Matrix u = Matrix::Zero(n, n);
        for (int g = 0; g < d; ++g) {
            for (int b = 0; b < db; ++b) {
                const int x = digit(b, 0);
                const int z = digit(b, k);
                // Output: position y, probe k holds x.
                const int base = b - x * stride[0] - z * stride[k] + x * stride[k];
                for (int gp = 0; gp < d; ++gp) {
                    for (int y = 0; y < nv; ++y) {
                        const cplx c = vx[x](gp * nv + y, g * nv + z);
                        if (c != cplx(0.0)) u(gp * db + base + y * stride[0], g * db + b) = c;
                    }
                }
            }
        }
        steps.push_back(std::move(u));
    }

    std::vector<Matrix> unitaries{Matrix::Identity(n, n)};
    for (const Matrix& s : steps) unitaries.push_back(s * unitaries.back());

    std::vector<Matrix> position;
    for (int x = 0; x < nv; ++x) {
        Matrix p = Matrix::Zero(db, db);
        for (int b = 0; b < db; ++b) {
            if (digit(b, 0) == x) p(b, b) = 1.0;
        }
        position.push_back(std::move(p));
    }
    std::vector<std::vector<Matrix>> algebras(n_steps + 1, position);
    return MeasuredEvolution(d, db, std::move(unitaries), std::move(algebras));
}

Matrix oqw_dilation_state(const Matrix& rho_g, int x0, int n_vertices, int n_steps, int reference_vertex) {
    Matrix b = projector(basis_vector(n_vertices, x0));
    const Matrix r = projector(basis_vector(n_vertices, reference_vertex));
    for (int k = 0; k < n_steps; ++k) b = kron(b, r);
    return kron(rho_g, b);
}

MeasuredInstance demolition_counterexample() {
    const double r = 1.0 / std::sqrt(2.0);
    Matrix hadamard(2, 2);
    hadamard << r, r, r, -r;
    Vector plus(2);
    plus << r, r;
    const Matrix id_g = Matrix::Identity(2, 2);
    std::vector<Matrix> unitaries{Matrix::Identity(4, 4), kron(id_g, hadamard)};
    std::vector<std::vector<Matrix>> algebras(2, computational_projectors(2));
    return {MeasuredEvolution(2, 2, std::move(unitaries), std::move(algebras)), kron(id_g / 2.0, projector(plus))};
}

}  // namespace oqbm
