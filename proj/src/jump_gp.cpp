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

#include "jgp/jump_gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sigmoid(double g) {
    return g >= 0.0 ? -std::log1p(std::exp(-g)) : g - std::log1p(std::exp(g));
}

double softplus(double g) {
    return g > 0.0 ? g + std::log1p(std::exp(-g)) : std::log1p(std::exp(g));
}

double sigmoid(double g) {
    if (g >= 0.0) return 1.0 / (1.0 + std::exp(-g));
    const double e = std::exp(g);
    return e / (1.0 + e);
}

std::vector<Eigen::Index> selected_positions(const std::vector<std::uint8_t>& z) {
    std::vector<Eigen::Index> s;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i]) s.push_back(static_cast<Eigen::Index>(i));
    }
    return s;
}

struct Params {
    GpHyper hyper;
    double mu = 0.0;
    Vector omega_centered;
    Vector omega;
    Vector logit;
};

struct RunResult {
    std::vector<std::uint8_t> z;
    Params params;
    double objective = kNegInf;
    std::vector<double> trace;
    int iterations = 0;
    bool converged = false;
    bool forced = false;
};

// The local neighborhood with everything the EM loop needs.
class LocalProblem {
public:
    LocalProblem(const LocalSet& local, const Dataset& data, const PointRef& xstar,
                 const JgpConfig& config)
        : config_(config), xstar_(xstar) {
        std::vector<Eigen::Index> idx(local.indices.begin(), local.indices.end());
        sub_ = data.subset(idx);
        n_ = sub_.size();
        d_ = sub_.dim();
        design_.resize(n_, d_ + 1);
        design_.col(0).setOnes();
        for (Eigen::Index i = 0; i < n_; ++i) {
            design_.row(i).tail(d_) = (sub_.X.row(i).transpose() - xstar_).transpose();
        }
        const double range = sub_.y.maxCoeff() - sub_.y.minCoeff();
        u_const_ = config.dummy_density ? *config.dummy_density : 1.0 / std::max(range, 1e-6);
        log_u_ = u_const_ > 0.0 ? std::log(u_const_) : kNegInf;
        bounds_ = HyperBounds::defaults(sub_, config.per_dimension_lengthscale);
    }

    Eigen::Index n() const { return n_; }
    double u_const() const { return u_const_; }
    const Dataset& local_data() const { return sub_; }

    Matrix full_cov(const GpHyper& h) const {
        return cov_matrix(sub_.X, h.kernel, h.sigma2).values();
    }

    double gp_loglik(const std::vector<Eigen::Index>& s, const Params& p) const {
        if (s.empty()) return 0.0;
        const Matrix K = full_cov(p.hyper);
        return subset_loglik(K, s, p);
    }

    double subset_loglik(const Matrix& K, const std::vector<Eigen::Index>& s, const Params& p) const {
        const auto m = static_cast<Eigen::Index>(s.size());
        Matrix Ks(m, m);
        Vector r(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            r(a) = sub_.y(s[static_cast<std::size_t>(a)]) - p.mu;
            for (Eigen::Index b = 0; b < m; ++b) {
                Ks(a, b) = K(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)]);
            }
        }
        const auto chol = cholesky_with_jitter(SymmetricMatrix(std::move(Ks)),
                                               p.hyper.kernel.signal_variance);
        return -0.5 * r.dot(chol.solve(r)) - 0.5 * chol.log_det() -
               0.5 * static_cast<double>(m) * kLog2Pi;
    }

    double objective(const std::vector<std::uint8_t>& z, const Params& p) const {
        const auto s = selected_positions(z);
        double obj = gp_loglik(s, p);
        const auto excluded = static_cast<double>(n_) - static_cast<double>(s.size());
        if (excluded > 0.0) obj += excluded * log_u_;
        for (Eigen::Index i = 0; i < n_; ++i) {
            const double g = p.logit(i);
            obj += z[static_cast<std::size_t>(i)] ? log_sigmoid(g) : log_sigmoid(-g);
        }
        if (config_.update_boundary) {
            obj -= 0.5 * config_.logistic_penalty * p.omega_centered.squaredNorm();
        }
        return obj;
    }

    // log p(y_i | y_{others}) under the current GP; `others` must not contain i.
    double conditional_log_density(const Matrix& K, Eigen::Index i,
                                   const std::vector<Eigen::Index>& others, const Params& p) const {
        const double s2 = p.hyper.kernel.signal_variance;
        double mean = p.mu;
        double var = s2 + p.hyper.sigma2;
        if (!others.empty()) {
            const auto m = static_cast<Eigen::Index>(others.size());
            Matrix Ko(m, m);
            Vector k(m);
            Vector r(m);
            for (Eigen::Index a = 0; a < m; ++a) {
                const auto ia = others[static_cast<std::size_t>(a)];
                k(a) = K(ia, i);
                r(a) = sub_.y(ia) - p.mu;
                for (Eigen::Index b = 0; b < m; ++b) Ko(a, b) = K(ia, others[static_cast<std::size_t>(b)]);
            }
            const auto chol = cholesky_with_jitter(SymmetricMatrix(std::move(Ko)), s2);
            mean += k.dot(chol.solve(r));
            const Vector v = chol.llt.matrixL().solve(k);
            var -= v.squaredNorm();
        }
        var = std::max(var, kVarianceFloor * s2);
        const double e = sub_.y(i) - mean;
        return -0.5 * (kLog2Pi + std::log(var) + e * e / var);
    }

    // Returns true when any label changed.
    bool c_step(std::vector<std::uint8_t>& z, const Params& p) const {
        const Matrix K = full_cov(p.hyper);
        const auto before = z;
        if (config_.cstep == CStepDensity::kMarginal) {
            const double var = p.hyper.kernel.signal_variance + p.hyper.sigma2;
            for (Eigen::Index i = 0; i < n_; ++i) {
                const double e = sub_.y(i) - p.mu;
                const double logp = -0.5 * (kLog2Pi + std::log(var) + e * e / var);
                z[static_cast<std::size_t>(i)] =
                    logp + log_sigmoid(p.logit(i)) >= log_u_ + log_sigmoid(-p.logit(i));
            }
        } else {
            for (Eigen::Index i = 0; i < n_; ++i) {
                std::vector<Eigen::Index> others;
                for (Eigen::Index j = 0; j < n_; ++j) {
                    if (j != i && z[static_cast<std::size_t>(j)]) others.push_back(j);
                }
                const double logp = conditional_log_density(K, i, others, p);
                z[static_cast<std::size_t>(i)] =
                    logp + log_sigmoid(p.logit(i)) >= log_u_ + log_sigmoid(-p.logit(i));
            }
        }
        return z != before;
    }

    // Keeps at least two selected points; returns true if it had to intervene.
    static bool enforce_minimum(std::vector<std::uint8_t>& z) {
        if (std::count(z.begin(), z.end(), std::uint8_t{1}) >= 2) return false;
        z[0] = 1;
        z[1] = 1;
        return true;
    }

    void fit_hyper(const std::vector<std::uint8_t>& z, Params& p, bool refit, int restarts,
                   bool warm, RngStream& rng) const {
        const auto s = selected_positions(z);
        const Dataset sel = sub_.subset(s);
        if (refit) {
            GpFitOptions opt;
            opt.restarts = restarts;
            opt.simplex = config_.simplex;
            if (warm) opt.warm_start = p.hyper;
            const GpFit fit = fit_gp(sel, bounds_, opt, rng);
            p.hyper = GpHyper{fit.kernel, fit.sigma2_hat};
            p.mu = fit.mu_hat;
        } else {
            const auto chol = cholesky_with_jitter(cov_matrix(sel.X, p.hyper.kernel, p.hyper.sigma2),
                                                   p.hyper.kernel.signal_variance);
            p.mu = profile_mean(chol, sel.y);
        }
    }

    double boundary_loss(const Vector& w, const Vector& zf) const {
        const Vector g = design_ * w;
        double f = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) f += softplus(g(i)) - zf(i) * g(i);
        return f + 0.5 * config_.logistic_penalty * w.squaredNorm();
    }

    // Penalized logistic regression of z on [1, x - x*] by damped Newton steps.
    void fit_boundary(const std::vector<std::uint8_t>& z, Params& p) const {
        Vector zf(n_);
        for (Eigen::Index i = 0; i < n_; ++i) zf(i) = z[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
        Vector w = p.omega_centered;
        const double lambda = config_.logistic_penalty;
        double f = boundary_loss(w, zf);
        for (int it = 0; it < 200; ++it) {
            const Vector g = design_ * w;
            Vector pi(n_);
            Vector wt(n_);
            for (Eigen::Index i = 0; i < n_; ++i) {
                pi(i) = sigmoid(g(i));
                wt(i) = pi(i) * (1.0 - pi(i));
            }
            const Vector grad = design_.transpose() * (pi - zf) + lambda * w;
            if (grad.lpNorm<Eigen::Infinity>() < 1e-10) break;
            Matrix H = design_.transpose() * wt.asDiagonal() * design_;
            H.diagonal().array() += lambda;
            const Vector step = H.ldlt().solve(grad);
            double t = 1.0;
            bool improved = false;
            for (int half = 0; half < 50; ++half) {
                const Vector trial = w - t * step;
                const double ft = boundary_loss(trial, zf);
                if (ft < f) {
                    improved = (f - ft) > 1e-14 * (1.0 + std::abs(f));
                    w = trial;
                    f = ft;
                    break;
                }
                t *= 0.5;
            }
            if (!improved) break;
        }
        p.omega_centered = w;
        p.omega = w;
        p.omega(0) = w(0) - w.tail(d_).dot(xstar_);
        update_logits(p);
    }

    void update_logits(Params& p) const {
        p.logit.resize(n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            p.logit(i) = boundary_score(sub_.X.row(i).transpose(), p.omega);
        }
    }

    RunResult run(std::vector<std::uint8_t> z, RngStream& rng) const {
        RunResult out;
        out.forced = enforce_minimum(z);
        Params p;
        p.omega_centered = Vector::Zero(d_ + 1);
        p.omega = Vector::Zero(d_ + 1);
        update_logits(p);

        bool have_hyper = false;
        bool refined = false;
        bool refine_next = false;
        for (int it = 1; it <= config_.max_iterations; ++it) {
            const bool refit = !have_hyper || refine_next || config_.refit_hyper_each_iteration;
            const int restarts = refine_next ? config_.final_restarts : config_.inner_restarts;
            fit_hyper(z, p, refit, restarts, have_hyper, rng);
            have_hyper = true;
            refine_next = false;
            if (config_.update_boundary) fit_boundary(z, p);

            std::vector<std::uint8_t> next = z;
            const bool changed = c_step(next, p);
            out.forced = enforce_minimum(next) || out.forced;
            out.trace.push_back(objective(next, p));
            out.iterations = it;
            if (!changed && next == z) {
                if (!refined) {
                    refined = true;
                    refine_next = true;
                    continue;
                }
                out.converged = true;
                break;
            }
            z = std::move(next);
        }
        out.z = std::move(z);
        out.params = std::move(p);
        out.objective = out.trace.empty() ? kNegInf : out.trace.back();
        return out;
    }

    std::vector<std::uint8_t> two_means_start() const {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n_));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return sub_.y(a) < sub_.y(b); });
        // Exact 1-d 2-means: best split of the sorted responses.
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_split = 1;
        for (std::size_t k = 1; k < order.size(); ++k) {
            double sse = 0.0;
            for (int side = 0; side < 2; ++side) {
                const std::size_t lo = side == 0 ? 0 : k;
                const std::size_t hi = side == 0 ? k : order.size();
                double m = 0.0;
                for (std::size_t q = lo; q < hi; ++q) m += sub_.y(order[q]);
                m /= static_cast<double>(hi - lo);
                for (std::size_t q = lo; q < hi; ++q) {
                    const double e = sub_.y(order[q]) - m;
                    sse += e * e;
                }
            }
            if (sse < best) {
                best = sse;
                best_split = k;
            }
        }
        std::vector<std::uint8_t> low(static_cast<std::size_t>(n_), 0);
        for (std::size_t q = 0; q < best_split; ++q) low[static_cast<std::size_t>(order[q])] = 1;
        // The cluster holding the nearest neighbour (position 0) is the selected one.
        std::vector<std::uint8_t> z(static_cast<std::size_t>(n_));
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = low[i] == low[0] ? 1 : 0;
        return z;
    }

private:
    const JgpConfig& config_;
    Vector xstar_;
    Dataset sub_;
    Eigen::Index n_ = 0;
    Eigen::Index d_ = 0;
    Matrix design_;
    double u_const_ = 1.0;
    double log_u_ = 0.0;
    HyperBounds bounds_;
};

}  // namespace

LocalSet select_neighborhood(const Dataset& data, const PointRef& xstar, Eigen::Index n) {
    if (xstar.size() != data.dim()) {
        throw std::invalid_argument("select_neighborhood: point dimension differs from data");
    }
    if (n < 1 || n > data.size()) {
        throw std::invalid_argument("select_neighborhood: neighborhood size must be in [1, N]");
    }
    const Eigen::Index N = data.size();
    std::vector<double> dist(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) {
        dist[static_cast<std::size_t>(i)] = (data.X.row(i).transpose() - xstar).norm();
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto closer = [&](Eigen::Index a, Eigen::Index b) {
        const double da = dist[static_cast<std::size_t>(a)];
        const double db = dist[static_cast<std::size_t>(b)];
        return da < db || (da == db && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + n, order.end(), closer);

    LocalSet local;
    local.center = xstar;
    local.indices.assign(order.begin(), order.begin() + n);
    for (auto i : local.indices) local.distances.push_back(dist[static_cast<std::size_t>(i)]);
    local.radius = local.distances.back();
    return local;
}

double boundary_score(const PointRef& x, const Vector& omega) {
    if (omega.size() != x.size() + 1) {
        throw std::invalid_argument("boundary_score: omega must have dimension d + 1");
    }
    return omega(0) + omega.tail(x.size()).dot(x);
}

double membership_prob(const PointRef& x, const Vector& omega) {
    return sigmoid(boundary_score(x, omega));
}

JgpModel assemble_jgp(const LocalSet& local, const Dataset& data, const PointRef& xstar,
                      const std::vector<std::uint8_t>& z, const GpHyper& hyper, const Vector& omega,
                      double u_const) {
    if (z.size() != local.size()) throw std::invalid_argument("assemble_jgp: label count mismatch");
    JgpModel m;
    m.xstar = xstar;
    m.local = local;
    std::vector<Eigen::Index> idx(local.indices.begin(), local.indices.end());
    const Dataset sub = data.subset(idx);
    m.x_local = sub.X;
    m.y_local = sub.y;
    m.omega = omega;
    m.omega_centered = omega;
    m.omega_centered(0) = omega(0) + omega.tail(xstar.size()).dot(xstar);
    m.z_hat = z;
    const auto n = static_cast<Eigen::Index>(local.size());
    m.logit.resize(n);
    m.p_hat.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m.logit(i) = boundary_score(sub.X.row(i).transpose(), omega);
        m.p_hat(i) = membership_prob(sub.X.row(i).transpose(), omega);
    }
    m.selected = selected_positions(z);
    if (m.selected.empty()) throw std::invalid_argument("assemble_jgp: no selected points");
    m.kernel_star = hyper.kernel;
    m.sigma2_hat = hyper.sigma2;
    m.u_const = u_const;

    const Dataset sel = sub.subset(m.selected);
    m.chol_selected = cholesky_with_jitter(cov_matrix(sel.X, hyper.kernel, hyper.sigma2),
                                           hyper.kernel.signal_variance);
    m.m_star_hat = profile_mean(m.chol_selected, sel.y);
    m.c_star = cov_vector(sel.X, xstar, hyper.kernel);
    const auto w = weights_alpha_beta(m);
    m.alpha = w.alpha;
    m.beta = w.beta;
    return m;
}

JgpModel fit_jgp(const LocalSet& local, const Dataset& data, const PointRef& xstar,
                 const JgpConfig& config, RngStream& rng) {
    if (local.size() < 4) throw std::invalid_argument("fit_jgp: need at least 4 local points");
    const LocalProblem problem(local, data, xstar, config);

    std::vector<std::uint8_t> all(local.size(), 1);
    RunResult best = problem.run(all, rng);
    RunResult split = problem.run(problem.two_means_start(), rng);
    if (split.objective > best.objective) best = std::move(split);

    JgpModel m = assemble_jgp(local, data, xstar, best.z, best.params.hyper, best.params.omega,
                              problem.u_const());
    m.omega_centered = best.params.omega_centered;
    m.converged = best.converged;
    m.forced_selection = best.forced;
    m.iterations = best.iterations;
    m.objective_trace = std::move(best.trace);
    m.objective = complete_data_objective(m, config.update_boundary ? config.logistic_penalty : 0.0);
    return m;
}

Weights weights_alpha_beta(const JgpModel& model) {
    const auto m = static_cast<Eigen::Index>(model.selected.size());
    const Vector ones = Vector::Ones(m);
    const Vector kinv1 = model.chol_selected.solve(ones);
    Weights w;
    w.alpha = kinv1 / kinv1.sum();
    w.beta = model.chol_selected.solve(model.c_star);
    return w;
}

JgpPrediction predict_jgp(const JgpModel& model) {
    const auto m = static_cast<Eigen::Index>(model.selected.size());
    Vector y_sel(m);
    for (Eigen::Index a = 0; a < m; ++a) y_sel(a) = model.y_local(model.selected[static_cast<std::size_t>(a)]);
    JgpPrediction p;
    const Vector r = y_sel.array() - model.m_star_hat;
    p.mean = model.m_star_hat + model.c_star.dot(model.chol_selected.solve(r));
    const Vector v = model.chol_selected.llt.matrixL().solve(model.c_star);
    const double s2 = model.kernel_star.signal_variance;
    p.var = std::max(s2 - v.squaredNorm(), kVarianceFloor * s2);
    return p;
}

double predict_jgp_mean_expanded(const JgpModel& model) {
    const auto m = static_cast<Eigen::Index>(model.selected.size());
    Vector y_sel(m);
    for (Eigen::Index a = 0; a < m; ++a) y_sel(a) = model.y_local(model.selected[static_cast<std::size_t>(a)]);
    double first = model.alpha.dot(y_sel);
    double second = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            second += model.alpha(i) * model.beta(j) * (y_sel(j) - y_sel(i));
        }
    }
    return first + second;
}

double complete_data_objective(const JgpModel& model, double logistic_penalty) {
    const auto n = static_cast<Eigen::Index>(model.n_local());
    double obj = 0.0;
    {
        const auto m = static_cast<Eigen::Index>(model.selected.size());
        Vector r(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            r(a) = model.y_local(model.selected[static_cast<std::size_t>(a)]) - model.m_star_hat;
        }
        obj += -0.5 * r.dot(model.chol_selected.solve(r)) - 0.5 * model.chol_selected.log_det() -
               0.5 * static_cast<double>(m) * kLog2Pi;
    }
    const double log_u = model.u_const > 0.0 ? std::log(model.u_const) : kNegInf;
    const auto excluded = static_cast<double>(n) - static_cast<double>(model.selected.size());
    if (excluded > 0.0) obj += excluded * log_u;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double g = model.logit(i);
        obj += model.z_hat[static_cast<std::size_t>(i)] ? log_sigmoid(g) : log_sigmoid(-g);
    }
    obj -= 0.5 * logistic_penalty * model.omega_centered.squaredNorm();
    return obj;
}

std::vector<std::uint8_t> classify_step(const JgpModel& model, CStepDensity density) {
    JgpConfig cfg;
    cfg.cstep = density;
    cfg.dummy_density = model.u_const;
    Dataset data;
    data.X = model.x_local;
    data.y = model.y_local;
    data.domain = Domain{model.x_local.colwise().minCoeff().transpose(),
                         model.x_local.colwise().maxCoeff().transpose()};
    LocalSet local;
    local.center = model.xstar;
    for (std::size_t i = 0; i < model.n_local(); ++i) {
        local.indices.push_back(static_cast<Eigen::Index>(i));
        local.distances.push_back(model.local.distances[i]);
    }
    local.radius = model.local.radius;
    const LocalProblem problem(local, data, model.xstar, cfg);
    Params p;
    p.hyper = GpHyper{model.kernel_star, model.sigma2_hat};
    p.mu = model.m_star_hat;
    p.omega = model.omega;
    p.omega_centered = model.omega_centered;
    p.logit = model.logit;
    auto z = model.z_hat;
    problem.c_step(z, p);
    return z;
}

}  // namespace jgp
