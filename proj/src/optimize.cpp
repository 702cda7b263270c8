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

#include "jgp/optimize.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace jgp {

namespace {

constexpr double kInfeasible = 1e300;
constexpr double kPenalty = 1e3;

struct Problem {
    const std::function<double(const Vector&)>* f;
    const BoxBounds* box;
    Vector scratch;
};

double evaluate(const gsl_vector* u, void* params) {
    auto* p = static_cast<Problem*>(params);
    const auto n = p->scratch.size();
    double outside = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double raw = gsl_vector_get(u, static_cast<std::size_t>(i));
        const double c = std::min(std::max(raw, p->box->lower(i)), p->box->upper(i));
        outside += (raw - c) * (raw - c);
        p->scratch(i) = c;
    }
    const double v = (*p->f)(p->scratch);
    if (!std::isfinite(v)) return kInfeasible;
    return v + kPenalty * outside;
}

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

}  // namespace

MinimizeResult minimize_in_box(const std::function<double(const Vector&)>& f, const Vector& start,
                               const BoxBounds& box, const SimplexOptions& options) {
    const auto n = static_cast<std::size_t>(start.size());
    if (box.lower.size() != start.size() || box.upper.size() != start.size()) {
        throw std::invalid_argument("minimize_in_box: bounds and start have different sizes");
    }
    // GSL's default handler aborts; errors are reported through return codes instead.
    static const auto previous_handler = gsl_set_error_handler_off();
    (void)previous_handler;

    Problem problem{&f, &box, Vector(start.size())};
    gsl_multimin_function fn;
    fn.n = n;
    fn.f = &evaluate;
    fn.params = &problem;

    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<Eigen::Index>(i);
        gsl_vector_set(x.get(), i, start(idx));
        double width = box.upper(idx) - box.lower(idx);
        if (!(width > 0.0)) width = 1.0;
        gsl_vector_set(step.get(), i, options.step_fraction * width);
    }

    MinimizeResult result;
    if (n == 0) {
        result.x = start;
        result.value = f(start);
        result.converged = true;
        return result;
    }

    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> minimizer(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
    gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get());

    int iter = 0;
    int status = GSL_CONTINUE;
    while (status == GSL_CONTINUE && iter < options.max_iterations) {
        ++iter;
        if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
        const double size = gsl_multimin_fminimizer_size(minimizer.get());
        status = gsl_multimin_test_size(size, options.size_tolerance);
    }

    const gsl_vector* best = gsl_multimin_fminimizer_x(minimizer.get());
    Vector raw(start.size());
    for (std::size_t i = 0; i < n; ++i) raw(static_cast<Eigen::Index>(i)) = gsl_vector_get(best, i);
    result.x = box.clamp(raw);
    result.value = f(result.x);
    if (!std::isfinite(result.value)) result.value = std::numeric_limits<double>::infinity();
    result.iterations = iter;
    result.converged = status == GSL_SUCCESS;
    return result;
}

}  // namespace jgp
