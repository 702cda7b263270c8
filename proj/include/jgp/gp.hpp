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

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "jgp/core_math.hpp"
#include "jgp/optimize.hpp"

namespace jgp {

/// Axis-aligned box [lower, upper] per input dimension.
struct Domain {
    Vector lower;
    Vector upper;

    static Domain cube(Eigen::Index dim, double lo, double hi);

    Eigen::Index dim() const { return lower.size(); }
    double diagonal() const { return (upper - lower).norm(); }
    bool contains(const PointRef& x, double tol = 1e-12) const;
    /// Maps a point of the unit cube onto the box.
    Vector from_unit(const PointRef& u) const;
};

/// Training inputs (one row per point) and responses.
struct Dataset {
    PointMatrix X;
    Vector y;
    Domain domain;

    Eigen::Index size() const { return X.rows(); }
    Eigen::Index dim() const { return X.cols(); }
    Vector point(Eigen::Index i) const { return X.row(i).transpose(); }

    /// Throws std::invalid_argument on an empty set, NaN/Inf, size mismatch or
    /// a point outside the domain.
    void validate() const;
    Dataset subset(std::span<const Eigen::Index> indices) const;
    void append(const PointRef& x, double y_new);
};

/// Search box for the log hyperparameters of an SE kernel with noise.
struct HyperBounds {
    double log_s2_lo = -6.0;
    double log_s2_hi = 3.0;
    double log_ell_lo = std::log(1e-3);
    double log_ell_hi = std::log(10.0);
    double log_sigma2_lo = std::log(1e-8);
    double log_sigma2_hi = 0.0;
    bool per_dimension = false;

    /// ell in [1e-3, 10] * domain diagonal, sigma2 in [1e-8, var(y)],
    /// log s2 in [log var(y) - 6, log var(y) + 3].
    static HyperBounds defaults(const Dataset& data, bool per_dimension = false);
};

struct GpHyper {
    KernelSpec kernel;
    double sigma2 = 1.0;
};

struct GpFitOptions {
    int restarts = 5;
    /// First start; when absent a data-driven start is used.
    std::optional<GpHyper> warm_start;
    SimplexOptions simplex{};
};

struct GpFit {
    double mu_hat = 0.0;
    double sigma2_hat = 1.0;
    KernelSpec kernel;
    CholeskyFactor chol;  // of sigma2_hat I + C_N
    Vector alpha;         // (sigma2_hat I + C_N)^{-1} (y - mu_hat 1)
    double log_likelihood = 0.0;
    bool converged = true;
};

struct GpPrediction {
    double mean = 0.0;
    double var = 0.0;      // clamped at 1e-12 * signal variance
    double var_raw = 0.0;  // before clamping
};

class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, GpHyper best, double best_value)
        : std::runtime_error(what), best_(std::move(best)), best_value_(best_value) {}
    const GpHyper& best() const { return best_; }
    double best_value() const { return best_value_; }

private:
    GpHyper best_;
    double best_value_;
};

constexpr double kVarianceFloor = 1e-12;

double log_marginal_likelihood(const Dataset& data, double mu, double sigma2, const KernelSpec& k);

/// Closed-form constant mean 1'K^{-1}y / 1'K^{-1}1 for K = sigma2 I + C.
double profile_mean(const CholeskyFactor& chol, const Vector& y);

/// Caches for fixed hyperparameters; mu defaults to the closed-form MLE.
GpFit make_gp_fit(const Dataset& data, const KernelSpec& k, double sigma2,
                  std::optional<double> mu = std::nullopt);

/// Multi-start bounded simplex search over (log s2, log ell, log sigma2) with
/// the mean profiled out. Throws FitError if no start yields a finite likelihood.
GpFit fit_gp(const Dataset& data, const HyperBounds& bounds, const GpFitOptions& options,
             RngStream& rng);

GpPrediction predict_gp(const GpFit& fit, const Dataset& data, const PointRef& xstar);

}  // namespace jgp
