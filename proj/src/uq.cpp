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

#include "jgp/uq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jgp {

namespace {

double log_sigmoid(double g) {
    return g >= 0.0 ? -std::log1p(std::exp(-g)) : g - std::log1p(std::exp(g));
}

// Local covariance and cross covariance, sliced per labeling.
class SubsetVariance {
public:
    explicit SubsetVariance(const JgpModel& model)
        : s2_(model.kernel_star.signal_variance), sigma2_(model.sigma2_hat) {
        K_ = cov_matrix(model.x_local, model.kernel_star, model.sigma2_hat).values();
        c_ = cov_vector(model.x_local, model.xstar, model.kernel_star);
    }

    double operator()(const std::vector<std::uint8_t>& z) const {
        std::vector<Eigen::Index> s;
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (z[i]) s.push_back(static_cast<Eigen::Index>(i));
        }
        if (s.size() < 2) return s2_ + sigma2_;
        const auto m = static_cast<Eigen::Index>(s.size());
        Matrix Ks(m, m);
        Vector c(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            c(a) = c_(s[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < m; ++b) {
                Ks(a, b) = K_(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
            }
        }
        const auto chol = cholesky_with_jitter(SymmetricMatrix(std::move(Ks)), s2_);
        const Vector v = chol.llt.matrixL().solve(c);
        return std::max(s2_ - v.squaredNorm(), kVarianceFloor * s2_);
    }

private:
    double s2_;
    double sigma2_;
    Matrix K_;
    Vector c_;
};

// Accumulates sum_Z v(Z) p(Z) / sum_Z p(Z) with weights given in log space.
class WeightedMean {
public:
    void add(double log_weight, double value) {
        terms_.emplace_back(log_weight, value);
        max_log_ = std::max(max_log_, log_weight);
    }

    double result() const {
        if (!std::isfinite(max_log_)) {
            throw std::domain_error("variance sum: every labeling has zero probability");
        }
        double num = 0.0;
        double den = 0.0;
        for (const auto& [lw, v] : terms_) {
            const double w = std::exp(lw - max_log_);
            num += w * v;
            den += w;
        }
        return num / den;
    }

private:
    std::vector<std::pair<double, double>> terms_;
    double max_log_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

double theoretical_bias(const Vector& alpha, const Vector& beta, const TruthSpec& truth,
                        BiasPairing pairing) {
    const Eigen::Index m = alpha.size();
    if (beta.size() != m || truth.p.size() != m) {
        throw std::invalid_argument("theoretical_bias: alpha, beta and p must have equal length");
    }
    const double gap = truth.m_star - truth.m_o;
    const double ps = truth.p_star;
    double first = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        const double pj = truth.p(j);
        first += alpha(j) * ((1.0 - pj) * ps - pj * (1.0 - ps));
    }
    double second = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double pi = truth.p(i);
            const double pj = truth.p(j);
            const double w = pairing == BiasPairing::kAsPrinted ? alpha(j) * beta(i) : alpha(i) * beta(j);
            second += w * (pj * (1.0 - pi) - (1.0 - pj) * pi);
        }
    }
    return gap * first + gap * second;
}

double estimate_bias(const JgpModel& model, BiasPairing pairing) {
    const std::size_t n = model.n_local();
    const std::size_t n_sel = model.n_selected();
    if (n_sel == n) return 0.0;
    double m_o = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!model.z_hat[i]) m_o += model.y_local(static_cast<Eigen::Index>(i));
    }
    m_o /= static_cast<double>(n - n_sel);

    TruthSpec plug;
    plug.m_star = model.m_star_hat;
    plug.m_o = m_o;
    plug.p_star = membership_prob(model.xstar, model.omega);
    plug.p.resize(static_cast<Eigen::Index>(n_sel));
    for (std::size_t a = 0; a < n_sel; ++a) {
        plug.p(static_cast<Eigen::Index>(a)) = model.p_hat(model.selected[a]);
    }
    return theoretical_bias(model.alpha, model.beta, plug, pairing);
}

double config_log_probability(const Vector& logit, const std::vector<std::uint8_t>& z) {
    if (static_cast<std::size_t>(logit.size()) != z.size()) {
        throw std::invalid_argument("config_log_probability: size mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double g = logit(static_cast<Eigen::Index>(i));
        s += z[i] ? log_sigmoid(g) : log_sigmoid(-g);
    }
    return s;
}

double config_probability(const Vector& p, const std::vector<std::uint8_t>& z) {
    if (static_cast<std::size_t>(p.size()) != z.size()) {
        throw std::invalid_argument("config_probability: size mismatch");
    }
    double prod = 1.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double pi = p(static_cast<Eigen::Index>(i));
        prod *= z[i] ? pi : 1.0 - pi;
    }
    return prod;
}

double conditional_variance(const JgpModel& model, const std::vector<std::uint8_t>& z) {
    if (z.size() != model.n_local()) throw std::invalid_argument("conditional_variance: size mismatch");
    return SubsetVariance(model)(z);
}

double variance_exhaustive(const JgpModel& model) {
    const std::size_t n = model.n_local();
    if (n > kMaxExhaustiveLocal) {
        throw std::length_error("variance_exhaustive: local set too large for 2^n enumeration; "
                                "use variance_truncated");
    }
    const SubsetVariance var(model);
    WeightedMean acc;
    std::vector<std::uint8_t> z(n);
    const std::uint32_t total = 1u << n;
    for (std::uint32_t mask = 0; mask < total; ++mask) {
        for (std::size_t i = 0; i < n; ++i) z[i] = (mask >> i) & 1u;
        const double lw = config_log_probability(model.logit, z);
        if (!std::isfinite(lw)) continue;
        acc.add(lw, var(z));
    }
    return acc.result();
}

double variance_truncated(const JgpModel& model, int order) {
    const auto n = static_cast<int>(model.n_local());
    if (order < 0 || order > n) throw std::invalid_argument("variance_truncated: order must be in [0, n]");
    if (order == 0) return predict_jgp(model).var;

    const SubsetVariance var(model);
    WeightedMean acc;
    std::vector<int> flip;
    for (int r = 0; r <= order; ++r) {
        // Lexicographic r-combinations of {0..n-1}.
        flip.resize(static_cast<std::size_t>(r));
        for (int k = 0; k < r; ++k) flip[static_cast<std::size_t>(k)] = k;
        while (true) {
            auto z = model.z_hat;
            for (int k : flip) z[static_cast<std::size_t>(k)] ^= 1u;
            const double lw = config_log_probability(model.logit, z);
            if (std::isfinite(lw)) acc.add(lw, var(z));
            int k = r - 1;
            while (k >= 0 && flip[static_cast<std::size_t>(k)] == n - r + k) --k;
            if (k < 0) break;
            ++flip[static_cast<std::size_t>(k)];
            for (int q = k + 1; q < r; ++q) flip[static_cast<std::size_t>(q)] = flip[static_cast<std::size_t>(q - 1)] + 1;
        }
    }
    return acc.result();
}

PredictionRecord estimate_mspe(const JgpModel& model, int order, const UqOptions& options) {
    PredictionRecord rec;
    rec.xstar = model.xstar;
    const auto pred = predict_jgp(model);
    rec.mean = pred.mean;
    rec.var_conditional = pred.var;
    rec.trunc_order = order;
    rec.bias_hat = options.include_bias ? estimate_bias(model, options.pairing) : 0.0;
    rec.var_hat = order == 0 ? pred.var : variance_truncated(model, order);
    rec.mspe_hat = rec.bias_hat * rec.bias_hat + rec.var_hat;
    return rec;
}

}  // namespace jgp
