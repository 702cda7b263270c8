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

#include "jgp/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace jgp {

namespace {

double sq_dist(const PointMatrix& X, Eigen::Index i, Eigen::Index j) {
    return (X.row(i) - X.row(j)).squaredNorm();
}

class PairDistances {
public:
    explicit PairDistances(const PointMatrix& X) : D_(X.rows(), X.rows()) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            D_(i, i) = std::numeric_limits<double>::infinity();
            for (Eigen::Index j = 0; j < i; ++j) D_(i, j) = D_(j, i) = sq_dist(X, i, j);
        }
    }

    void update_row(const PointMatrix& X, Eigen::Index i) {
        for (Eigen::Index j = 0; j < X.rows(); ++j) {
            if (j != i) D_(i, j) = D_(j, i) = sq_dist(X, i, j);
        }
    }

    double min() const { return D_.minCoeff(); }

private:
    Matrix D_;
};

}  // namespace

PointMatrix maximin_lhd(Eigen::Index n, Eigen::Index d, RngStream& rng, int swaps) {
    if (n < 1) throw std::invalid_argument("maximin_lhd: need at least one point");
    if (d < 1) throw std::invalid_argument("maximin_lhd: need at least one dimension");
    PointMatrix X(n, d);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < d; ++c) {
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (Eigen::Index i = 0; i < n; ++i) {
            X(i, c) = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + 0.5) /
                      static_cast<double>(n);
        }
    }
    if (n < 3) return X;

    PairDistances dist(X);
    double current = dist.min();
    std::uniform_int_distribution<Eigen::Index> pick_row(0, n - 1);
    std::uniform_int_distribution<Eigen::Index> pick_col(0, d - 1);
    for (int s = 0; s < swaps; ++s) {
        const Eigen::Index c = pick_col(rng);
        const Eigen::Index i = pick_row(rng);
        Eigen::Index j = pick_row(rng);
        while (j == i) j = pick_row(rng);
        std::swap(X(i, c), X(j, c));
        dist.update_row(X, i);
        dist.update_row(X, j);
        const double trial = dist.min();
        if (trial >= current) {
            current = trial;
        } else {
            std::swap(X(i, c), X(j, c));
            dist.update_row(X, i);
            dist.update_row(X, j);
        }
    }
    return X;
}

PointMatrix maximin_lhd(Eigen::Index n, const Domain& domain, RngStream& rng, int swaps) {
    PointMatrix U = maximin_lhd(n, domain.dim(), rng, swaps);
    for (Eigen::Index i = 0; i < n; ++i) U.row(i) = domain.from_unit(U.row(i).transpose()).transpose();
    return U;
}

double min_pairwise_distance(const PointMatrix& X) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) best = std::min(best, sq_dist(X, i, j));
    }
    return std::sqrt(best);
}

double distance_to_set(const PointRef& x, const PointMatrix& X) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        best = std::min(best, (X.row(i).transpose() - x).squaredNorm());
    }
    return std::sqrt(best);
}

PointMatrix grid_points(const Domain& domain, Eigen::Index per_dim) {
    if (per_dim < 2) throw std::invalid_argument("grid_points: need at least two points per axis");
    const Eigen::Index d = domain.dim();
    Eigen::Index total = 1;
    for (Eigen::Index c = 0; c < d; ++c) total *= per_dim;
    PointMatrix G(total, d);
    for (Eigen::Index r = 0; r < total; ++r) {
        Eigen::Index rem = r;
        for (Eigen::Index c = 0; c < d; ++c) {
            const auto k = static_cast<double>(rem % per_dim);
            rem /= per_dim;
            G(r, c) = domain.lower(c) +
                      (domain.upper(c) - domain.lower(c)) * k / static_cast<double>(per_dim - 1);
        }
    }
    return G;
}

}  // namespace jgp
