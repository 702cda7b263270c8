/*
 * Copyright 2026 The jumpgp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "jgp/harness.hpp"

namespace jgp {

double rmse(const Vector& predictions, const Vector& truth) {
    if (predictions.size() != truth.size()) throw std::invalid_argument("rmse: length mismatch");
    if (truth.size() < 1) throw std::invalid_argument("rmse: empty input");
    return std::sqrt((predictions - truth).squaredNorm() / static_cast<double>(truth.size()));
}

double nlpd(const Vector& means, const Vector& vars, const Vector& truth, double noise_var) {
    if (means.size() != truth.size() || vars.size() != truth.size()) {
        throw std::invalid_argument("nlpd: length mismatch");
    }
    if (truth.size() < 1) throw std::invalid_argument("nlpd: empty input");
    if (!(noise_var >= 0.0)) throw std::invalid_argument("nlpd: negative noise variance");
    double s = 0.0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        const double v = vars(i) + noise_var;
        if (!(vars(i) > 0.0)) throw std::invalid_argument("nlpd: nonpositive variance");
        const double e = truth(i) - means(i);
        s += 0.5 * std::log(2.0 * std::numbers::pi * v) + e * e / (2.0 * v);
    }
    return s / static_cast<double>(truth.size());
}

namespace {

// Midranks of |d|, ascending.
std::vector<double> abs_ranks(const std::vector<double>& d, double* tie_term) {
    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
    std::vector<double> rank(n);
    double ties = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        const auto t = static_cast<double>(j - i + 1);
        ties += t * t * t - t;
        i = j + 1;
    }
    if (tie_term) *tie_term = ties;
    return rank;
}

}  // namespace

double wilcoxon_signed_rank(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("wilcoxon_signed_rank: length mismatch");
    if (a.size() < 5) throw std::invalid_argument("wilcoxon_signed_rank: need at least 5 pairs");
    std::vector<double> d;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double diff = a(i) - b(i);
        if (std::isnan(diff)) throw std::invalid_argument("wilcoxon_signed_rank: NaN in input");
        if (diff != 0.0) d.push_back(diff);
    }
    if (d.empty()) return 1.0;
    double ties = 0.0;
    const auto rank = abs_ranks(d, &ties);
    const std::size_t n = d.size();
    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] > 0.0) w_plus += rank[i];
    }

    if (n <= 12) {
        // Every sign pattern is equally likely under the null.
        const std::uint32_t total = 1u << n;
        std::uint32_t le = 0;
        std::uint32_t ge = 0;
        constexpr double eps = 1e-9;
        for (std::uint32_t mask = 0; mask < total; ++mask) {
            double w = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if ((mask >> i) & 1u) w += rank[i];
            }
            if (w <= w_plus + eps) ++le;
            if (w >= w_plus - eps) ++ge;
        }
        const double p = 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total);
        return std::min(1.0, p);
    }

    const auto nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - ties / 48.0;
    if (!(var > 0.0)) return 1.0;
    const double z = std::max(std::abs(w_plus - mean) - 0.5, 0.0) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::numbers::sqrt2));
}

}  // namespace jgp
