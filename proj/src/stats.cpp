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

#include "oqbm/stats.hpp"

#include <algorithm>
#include <cmath>

#include "oqbm/errors.hpp"

namespace oqbm {

namespace {

struct Compensated {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        const double t = sum + v;
        c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + c; }
};

}  // namespace

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ContractViolation("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

Moments moments(const std::vector<double>& x) {
    if (x.empty()) throw ContractViolation("moments: empty sample");
    Compensated s;
    for (double v : x) s.add(v);
    const double n = static_cast<double>(x.size());
    Moments m;
    m.mean = s.value() / n;
    Compensated ss;
    for (double v : x) ss.add((v - m.mean) * (v - m.mean));
    m.variance = x.size() > 1 ? ss.value() / (n - 1.0) : 0.0;
    m.stderr = std::sqrt(m.variance / n);
    return m;
}

Moments weighted_moments(const std::vector<double>& x, const std::vector<double>& w) {
    if (x.size() != w.size()) throw DimensionError("weighted_moments: sizes differ");
    std::vector<double> prod(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) prod[i] = x[i] * w[i];
    return moments(prod);
}

double normal_cdf(double x, double mean, double variance) {
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

double kde_mode(const std::vector<double>& x, double lo, double hi, int grid) {
    std::vector<double> in;
    for (double v : x) {
        if (v >= lo && v <= hi) in.push_back(v);
    }
    if (in.size() < 2) throw ContractViolation("kde_mode: fewer than two samples in range");
    const Moments m = moments(in);
    std::vector<double> sorted = in;
    std::sort(sorted.begin(), sorted.end());
    const double iqr = sorted[sorted.size() * 3 / 4] - sorted[sorted.size() / 4];
    const double spread = std::min(std::sqrt(m.variance), iqr / 1.34);
    const double h = 0.9 * (spread > 0.0 ? spread : std::sqrt(m.variance) + 1e-12) *
                     std::pow(static_cast<double>(in.size()), -0.2);
    double best_x = lo;
    double best = -1.0;
    for (int k = 0; k < grid; ++k) {
        const double g = lo + (hi - lo) * k / (grid - 1);
        // Only samples within 6 bandwidths contribute noticeably.
        auto first = std::lower_bound(sorted.begin(), sorted.end(), g - 6.0 * h);
        auto last = std::upper_bound(sorted.begin(), sorted.end(), g + 6.0 * h);
        double dens = 0.0;
        for (auto it = first; it != last; ++it) {
            const double u = (g - *it) / h;
            dens += std::exp(-0.5 * u * u);
        }
        if (dens > best) {
            best = dens;
            best_x = g;
        }
    }
    return best_x;
}

}  // namespace oqbm
