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

#pragma once

#include <random>

#include "jgp/core_math.hpp"
#include "jgp/gp.hpp"

namespace jgp::testing {

inline PointMatrix random_points(Eigen::Index n, Eigen::Index d, RngStream& rng, double lo = -0.5,
                                 double hi = 0.5) {
    std::uniform_real_distribution<double> u(lo, hi);
    PointMatrix X(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < d; ++c) X(i, c) = u(rng);
    }
    return X;
}

// Two regions split at x1 = 0 with means 0 (left) and `jump` (right).
inline Dataset step_data(Eigen::Index n, Eigen::Index d, RngStream& rng, double jump = 27.0,
                         double noise_sd = 2.0) {
    Dataset data;
    data.domain = Domain::cube(d, -0.5, 0.5);
    data.X = random_points(n, d, rng);
    data.y.resize(n);
    std::normal_distribution<double> e(0.0, noise_sd);
    for (Eigen::Index i = 0; i < n; ++i) data.y(i) = (data.X(i, 0) >= 0.0 ? jump : 0.0) + e(rng);
    return data;
}

// Explicit-inverse multivariate normal log density.
inline double dense_mvn_logpdf(const Vector& y, const Vector& mean, const Matrix& cov) {
    const Vector r = y - mean;
    const double quad = r.dot(cov.inverse() * r);
    return -0.5 * quad - 0.5 * std::log(cov.determinant()) -
           0.5 * static_cast<double>(y.size()) * std::log(2.0 * 3.14159265358979323846);
}

}  // namespace jgp::testing
