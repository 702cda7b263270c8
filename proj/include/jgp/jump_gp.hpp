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

#include <cstdint>
#include <optional>
#include <vector>

#include "jgp/gp.hpp"

namespace jgp {

/// The n nearest training points to a test location, nearest first.
struct LocalSet {
    Vector center;
    std::vector<Eigen::Index> indices;  // into the parent dataset
    std::vector<double> distances;      // non-decreasing, aligned with indices
    double radius = 0.0;                // distance of the farthest member

    std::size_t size() const { return indices.size(); }
};

/// Ties in distance go to the lower dataset index.
LocalSet select_neighborhood(const Dataset& data, const PointRef& xstar, Eigen::Index n);

/// g(x) = omega' [1, x].
double boundary_score(const PointRef& x, const Vector& omega);
/// Logistic of the boundary score: prior probability that x shares x*'s region.
double membership_prob(const PointRef& x, const Vector& omega);

/// Density used for p(y_i | Z_i = 1) in the classification step.
enum class CStepDensity {
    /// Predictive density of y_i given the other selected points, updated
    /// one point at a time. Each update never lowers the complete-data objective.
    kConditional,
    /// N(m, s2 + sigma2), all points updated at once.
    kMarginal,
};

struct JgpConfig {
    /// L2 penalty on the boundary weights (inputs recentered at x*).
    double logistic_penalty = 1e-4;
    int max_iterations = 50;
    /// Restarts for the hyperparameter refit once the labels settle.
    int final_restarts = 5;
    /// Restarts for the warm-started refits between label updates.
    int inner_restarts = 1;
    /// When false, omega stays at its initial value (zero).
    bool update_boundary = true;
    /// Dummy likelihood for excluded points; default 1 / (range of local y).
    std::optional<double> dummy_density;
    CStepDensity cstep = CStepDensity::kConditional;
    /// When false, (theta, sigma2) are fit once per start and again at the end;
    /// the mean is always re-profiled.
    bool refit_hyper_each_iteration = true;
    bool per_dimension_lengthscale = false;
    SimplexOptions simplex{};
};

/// Converged classification-EM state for one test location.
struct JgpModel {
    Vector xstar;
    LocalSet local;
    PointMatrix x_local;  // local points in neighborhood order
    Vector y_local;

    Vector omega;                   // original coordinates, size d + 1
    Vector omega_centered;          // inputs recentered at xstar
    std::vector<std::uint8_t> z_hat;
    Vector logit;                   // g(x_i; omega)
    Vector p_hat;                   // logistic(logit)
    std::vector<Eigen::Index> selected;  // positions within the local set with z = 1

    double m_star_hat = 0.0;
    KernelSpec kernel_star;
    double sigma2_hat = 1.0;
    double u_const = 1.0;
    Vector alpha;
    Vector beta;

    CholeskyFactor chol_selected;  // of sigma2_hat I + C_**
    Vector c_star;                 // cov(selected, xstar)

    bool converged = false;
    bool forced_selection = false;
    int iterations = 0;
    double objective = 0.0;                 // complete-data log posterior
    std::vector<double> objective_trace;    // one entry per iteration

    std::size_t n_local() const { return local.size(); }
    std::size_t n_selected() const { return selected.size(); }
};

struct JgpPrediction {
    double mean = 0.0;
    double var = 0.0;
};

struct Weights {
    Vector alpha;
    Vector beta;
};

/// Fits the local model by classification EM from two starts (all selected;
/// 2-means on the responses) and keeps the one with the larger objective.
/// Requires at least 4 local points.
JgpModel fit_jgp(const LocalSet& local, const Dataset& data, const PointRef& xstar,
                 const JgpConfig& config, RngStream& rng);

/// Builds a model for given labels and parameters without running EM.
JgpModel assemble_jgp(const LocalSet& local, const Dataset& data, const PointRef& xstar,
                      const std::vector<std::uint8_t>& z, const GpHyper& hyper,
                      const Vector& omega, double u_const);

Weights weights_alpha_beta(const JgpModel& model);

JgpPrediction predict_jgp(const JgpModel& model);

/// Mean through the weight expansion sum a_i y_i + sum_ij a_i b_j (y_j - y_i).
double predict_jgp_mean_expanded(const JgpModel& model);

/// Complete-data log posterior of the model's own labels and parameters.
double complete_data_objective(const JgpModel& model, double logistic_penalty);

/// Classification step applied once to the model's parameters, starting from its labels.
std::vector<std::uint8_t> classify_step(const JgpModel& model, CStepDensity density);

}  // namespace jgp
