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

#ifndef OQBM_STATS_IMPL_HPP
#define OQBM_STATS_IMPL_HPP

#include <algorithm>
#include <cmath>

#include "oqbm/errors.hpp"

namespace oqbm {

template <class Cdf>
double ks_distance_to(std::vector<double> a, Cdf cdf) {
    if (a.empty()) throw ContractViolation("ks_distance_to: empty sample");
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double f = cdf(a[i]);
        d = std::max({d, std::abs((i + 1) / n - f), std::abs(f - i / n)});
    }
    return d;
}

}  // namespace oqbm

#endif  // OQBM_STATS_IMPL_HPP
