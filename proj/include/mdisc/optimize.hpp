// Copyright 2026 The mdisc Authors
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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace mdisc::optimize {

struct Result {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
};

/// Nelder-Mead downhill simplex. Stops when the spread of function values
/// across the simplex falls below `ftol` or after `max_evals` evaluations.
inline Result nelder_mead(const std::function<double(const std::vector<double> &)> &f, std::vector<double> x0,
                          double step, double ftol, int max_evals) {
    const std::size_t n = x0.size();
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += step;
    }
    std::vector<double> values(n + 1);
    int evals = 0;
    auto eval = [&](const std::vector<double> &x) {
        ++evals;
        return f(x);
    };
    for (std::size_t i = 0; i <= n; ++i) {
        values[i] = eval(simplex[i]);
    }
    std::vector<std::size_t> order(n + 1);
    while (evals < max_evals) {
        for (std::size_t i = 0; i <= n; ++i) {
            order[i] = i;
        }
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[n - 1];
        if (std::abs(values[worst] - values[best]) <= ftol) {
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                centroid[j] += simplex[i][j] / static_cast<double>(n);
            }
        }
        auto along = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) {
                x[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
            }
            return x;
        };
        auto reflected = along(-1.0);
        const double fr = eval(reflected);
        if (fr < values[best]) {
            auto expanded = along(-2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[worst] = std::move(expanded);
                values[worst] = fe;
            } else {
                simplex[worst] = std::move(reflected);
                values[worst] = fr;
            }
            continue;
        }
        if (fr < values[second]) {
            simplex[worst] = std::move(reflected);
            values[worst] = fr;
            continue;
        }
        const bool outside = fr < values[worst];
        auto contracted = along(outside ? -0.5 : 0.5);
        const double fc = eval(contracted);
        if (fc < (outside ? fr : values[worst])) {
            simplex[worst] = std::move(contracted);
            values[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            }
            values[i] = eval(simplex[i]);
        }
    }
    const auto it = std::min_element(values.begin(), values.end());
    const auto idx = static_cast<std::size_t>(it - values.begin());
    return {simplex[idx], *it, evals};
}

}  // namespace mdisc::optimize
