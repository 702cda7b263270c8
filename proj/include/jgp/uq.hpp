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
#include <vector>

#include "jgp/jump_gp.hpp"

namespace jgp {

/// Index pairing of the double sum in the bias formula.
enum class BiasPairing {
    /// alpha_j beta_i {p_j (1 - p_i) - (1 - p_j) p_i}, summed over i, j.
    kAsPrinted,
    /// alpha_i beta_j with the same bracket.
    kTransposed,
};

struct UqOptions {
    BiasPairing pairing = BiasPairing::kAsPrinted;
    /// When false the bias term is reported as 0 (variance-only criteria).
    bool include_bias = true;
};

/// Quantities known only in simulation, used to check the bias formula.
struct TruthSpec {
    double m_star = 0.0;  // mean of the region containing x*
    double m_o = 0.0;     // mean of the other region
    double p_star = 1.0;
    Vector p;             // P(Z_j = 1) for the selected points
};

struct PredictionRecord {
    Vector xstar;
    double mean = 0.0;
    double var_conditional = 0.0;  // s_J^2(x*; Z_hat)
    double bias_hat = 0.0;
    double var_hat = 0.0;
    double mspe_hat = 0.0;  // bias_hat^2 + var_hat
    int trunc_order = 0;
};

/// Largest local set the exhaustive 2^n variance sum accepts.
constexpr std::size_t kMaxExhaustiveLocal = 14;

double theoretical_bias(const Vector& alpha, const Vector& beta, const TruthSpec& truth,
                        BiasPairing pairing = BiasPairing::kAsPrinted);

/// Plug-in bias: m_star_hat, mean of the excluded responses, and the fitted
/// membership probabilities. Zero when no local point is excluded.
double estimate_bias(const JgpModel& model, BiasPairing pairing = BiasPairing::kAsPrinted);

/// log prod_i p_i^{Z_i} (1 - p_i)^{1 - Z_i}, computed from the logits.
double config_log_probability(const Vector& logit, const std::vector<std::uint8_t>& z);
double config_probability(const Vector& p, const std::vector<std::uint8_t>& z);

/// s_J^2(x*; Z) with (theta*, sigma2) held at the fitted values. Fewer than two
/// selected points give the prior value c(x*, x*) + sigma2.
double conditional_variance(const JgpModel& model, const std::vector<std::uint8_t>& z);

/// Sum of s_J^2(x*; Z) p(Z) over all 2^n labelings. Throws std::length_error
/// when n exceeds kMaxExhaustiveLocal; use variance_truncated instead.
double variance_exhaustive(const JgpModel& model);

/// Normalized sum over labelings within `order` flips of Z_hat. Order 0 is
/// exactly s_J^2(x*; Z_hat).
double variance_truncated(const JgpModel& model, int order);

PredictionRecord estimate_mspe(const JgpModel& model, int order, const UqOptions& options = {});

}  // namespace jgp
