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

#include "jgp/gp.hpp"

namespace jgp {

/// Latin hypercube on the unit cube with points at bin centers, improved by a
/// fixed number of random column swaps. A swap is kept when the minimum
/// pairwise distance does not decrease.
PointMatrix maximin_lhd(Eigen::Index n, Eigen::Index d, RngStream& rng, int swaps = 1000);

/// Same design mapped onto a box.
PointMatrix maximin_lhd(Eigen::Index n, const Domain& domain, RngStream& rng, int swaps = 1000);

double min_pairwise_distance(const PointMatrix& X);

/// Smallest distance from x to a row of X (infinity for an empty X).
double distance_to_set(const PointRef& x, const PointMatrix& X);

/// Regular grid with `per_dim` points per axis spanning the box, first
/// coordinate varying fastest.
PointMatrix grid_points(const Domain& domain, Eigen::Index per_dim);

}  // namespace jgp
