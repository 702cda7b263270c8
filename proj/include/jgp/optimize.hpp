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

#include <functional>

#include "jgp/core_math.hpp"

namespace jgp {

struct BoxBounds {
    Vector lower;
    Vector upper;

    Vector clamp(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
};

struct SimplexOptions {
    int max_iterations = 300;
    // Stop when the simplex characteristic size falls below this.
    double size_tolerance = 1e-4;
    // Initial simplex edge as a fraction of the box width in each coordinate.
    double step_fraction = 0.1;
};

struct MinimizeResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Nelder-Mead over a box. Points outside the box are evaluated at their
// projection plus a quadratic penalty on the distance, so the start point is
// evaluated exactly and the returned value never exceeds f(start).
MinimizeResult minimize_in_box(const std::function<double(const Vector&)>& f, const Vector& start,
                               const BoxBounds& box, const SimplexOptions& options = {});

}  // namespace jgp
