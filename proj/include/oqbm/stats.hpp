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

#ifndef OQBM_STATS_HPP
#define OQBM_STATS_HPP

#include <vector>

namespace oqbm {

// sup_x |F_a(x) - F_b(x)| of the empirical CDFs. Throws on empty input.
double ks_distance(std::vector<double> a, std::vector<double> b);

// Two-sided distance to a continuous CDF.
template <class Cdf>
double ks_distance_to(std::vector<double> a, Cdf cdf);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double stderr = 0.0;    // of the mean
};

// Compensated summation; deterministic for a given input order.
Moments moments(const std::vector<double>& x);
Moments weighted_moments(const std::vector<double>& x, const std::vector<double>& w);

double normal_cdf(double x, double mean = 0.0, double variance = 1.0);

// Location of the maximum of a Gaussian kernel density estimate of the
// samples falling in [lo, hi] (Silverman bandwidth), searched on a grid.
double kde_mode(const std::vector<double>& x, double lo, double hi, int grid = 2001);

}  // namespace oqbm

#include "oqbm/stats_impl.hpp"

#endif  // OQBM_STATS_HPP
