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

#include "jgp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace jgp {

Domain Domain::cube(Eigen::Index dim, double lo, double hi) {
    return Domain{Vector::Constant(dim, lo), Vector::Constant(dim, hi)};
}

bool Domain::contains(const PointRef& x, double tol) const {
    if (x.size() != dim()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
    }
    return true;
}

Vector Domain::from_unit(const PointRef& u) const {
    return lower + (upper - lower).cwiseProduct(u);
}

void Dataset::validate() const {
    if (X.rows() < 1) throw std::invalid_argument("dataset is empty");
    if (y.size() != X.rows()) throw std::invalid_argument("dataset X and y sizes differ");
    if (domain.dim() != X.cols() || domain.upper.size() != X.cols()) {
        throw std::invalid_argument("dataset domain dimension does not match inputs");
    }
    if (!X.allFinite() || !y.allFinite()) throw std::invalid_argument("dataset contains NaN or Inf");
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (!domain.contains(X.row(i).transpose())) {
            std::ostringstream msg;
            msg << "dataset row " << i << " lies outside the domain";
            throw std::invalid_argument(msg.str());
        }
    }
}

Dataset Dataset::subset(std::span<const Eigen::Index> indices) const {
    Dataset out;
    out.domain = domain;
    out.X.resize(static_cast<Eigen::Index>(indices.size()), X.cols());
    out.y.resize(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        out.X.row(row) = X.row(indices[r]);
        out.y(row) = y(indices[r]);
    }
    return out;
}

void Dataset::append(const PointRef& x, double y_new) {
    if (X.rows() > 0 && x.size() != X.cols()) {
        throw std::invalid_argument("Dataset::append: point dimension differs");
    }
    const Eigen::Index n = X.rows();
    X.conservativeResize(n + 1, x.size());
    X.row(n) = x.transpose();
    y.conservativeResize(n + 1);
    y(n) = y_new;
}

namespace {

double sample_variance(const Vector& y) {
    if (y.size() < 2) return 0.0;
    const double m = y.mean();
    return (y.array() - m).square().sum() / static_cast<double>(y.size() - 1);
}

constexpr double kLog2Pi = 1.8378770664093454836;

// Pairwise squared differences, precomputed once per fit.
class DistanceCache {
public:
    DistanceCache(const PointMatrix& X, bool per_dimension) : n_(X.rows()) {
        const Eigen::Index d = X.cols();
        const Eigen::Index blocks = per_dimension ? d : 1;
        sq_.assign(static_cast<std::size_t>(blocks), Matrix::Zero(n_, n_));
        for (Eigen::Index j = 0; j < n_; ++j) {
            for (Eigen::Index i = j + 1; i < n_; ++i) {
                for (Eigen::Index c = 0; c < d; ++c) {
                    const double diff = X(i, c) - X(j, c);
                    auto& m = sq_[static_cast<std::size_t>(per_dimension ? c : 0)];
                    m(i, j) += diff * diff;
                }
            }
        }
    }

    SymmetricMatrix covariance(const KernelSpec& k, double diag_extra) const {
        Matrix K(n_, n_);
        for (Eigen::Index i = 0; i < n_; ++i) {
            K(i, i) = k.signal_variance + diag_extra;
            for (Eigen::Index j = 0; j < i; ++j) {
                double r2 = 0.0;
                for (std::size_t c = 0; c < sq_.size(); ++c) {
                    const double l = k.lengthscale[c];
                    r2 += sq_[c](i, j) / (l * l);
                }
                K(i, j) = k.signal_variance * std::exp(-0.5 * r2);
            }
        }
        return SymmetricMatrix(std::move(K));
    }

    // Lower triangle and diagonal of the covariance, in column-major K.
    void fill(Matrix& K, double s2, const std::vector<double>& inv_ell2, double diag_extra) const {
        for (Eigen::Index j = 0; j < n_; ++j) {
            K(j, j) = s2 + diag_extra;
            for (Eigen::Index i = j + 1; i < n_; ++i) {
                double r2 = 0.0;
                for (std::size_t c = 0; c < sq_.size(); ++c) r2 += sq_[c](i, j) * inv_ell2[c];
                K(i, j) = s2 * std::exp(-0.5 * r2);
            }
        }
    }

    double median_distance() const {
        std::vector<double> v;
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index j = 0; j < i; ++j) {
                double r2 = 0.0;
                for (const auto& m : sq_) r2 += m(i, j);
                v.push_back(std::sqrt(r2));
            }
        }
        if (v.empty()) return 1.0;
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
        return v[v.size() / 2];
    }

private:
    Eigen::Index n_;
    std::vector<Matrix> sq_;
};

// Allocation-free profiled likelihood for the optimizer. Jitter escalation
// follows cholesky_with_jitter so the optimum refactors identically.
class LikelihoodWorkspace {
public:
    explicit LikelihoodWorkspace(Eigen::Index n)
        : K(n, n), L(n, n), a(n), b(n), n_(n) {}

    std::vector<double> inv_ell2;
    Matrix K;

    double profiled(const Vector& y, double scale) {
        if (!factor_with_jitter(scale)) return -std::numeric_limits<double>::infinity();
        // a = L^-1 1, b = L^-1 y; mu = a'b / a'a; quad = |b - mu a|^2.
        double log_det = 0.0;
        for (Eigen::Index i = 0; i < n_; ++i) {
            double sa = 1.0;
            double sb = y(i);
            for (Eigen::Index k = 0; k < i; ++k) {
                sa -= L(i, k) * a(k);
                sb -= L(i, k) * b(k);
            }
            a(i) = sa / L(i, i);
            b(i) = sb / L(i, i);
            log_det += std::log(L(i, i));
        }
        const double mu = a.dot(b) / a.squaredNorm();
        const double quad = (b - mu * a).squaredNorm();
        const double ll = -0.5 * quad - log_det - 0.5 * static_cast<double>(n_) * kLog2Pi;
        return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
    }

private:
    bool factor(double jitter) {
        for (Eigen::Index j = 0; j < n_; ++j) {
            double d = K(j, j) + jitter;
            for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
            if (!(d > 0.0)) return false;
            const double ljj = std::sqrt(d);
            L(j, j) = ljj;
            for (Eigen::Index i = j + 1; i < n_; ++i) {
                double s = K(i, j);
                for (Eigen::Index k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
                L(i, j) = s / ljj;
            }
        }
        return true;
    }

    bool factor_with_jitter(double scale) {
        if (factor(0.0)) return true;
        if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
        const double max_jitter = 1e-4 * scale * (1.0 + 1e-12);
        for (double jitter = 1e-10 * scale; jitter <= max_jitter; jitter *= 10.0) {
            if (factor(jitter)) return true;
        }
        return false;
    }

    Matrix L;
    Vector a;
    Vector b;
    Eigen::Index n_;
};

GpHyper unpack(const Vector& theta, std::size_t n_ell) {
    GpHyper h;
    h.kernel.signal_variance = std::exp(theta(0));
    h.kernel.lengthscale.resize(n_ell);
    for (std::size_t c = 0; c < n_ell; ++c) {
        h.kernel.lengthscale[c] = std::exp(theta(static_cast<Eigen::Index>(c + 1)));
    }
    h.sigma2 = std::exp(theta(static_cast<Eigen::Index>(n_ell + 1)));
    return h;
}

Vector pack(const GpHyper& h, std::size_t n_ell) {
    Vector theta(static_cast<Eigen::Index>(n_ell + 2));
    theta(0) = std::log(h.kernel.signal_variance);
    for (std::size_t c = 0; c < n_ell; ++c) {
        const double l = h.kernel.is_isotropic() ? h.kernel.lengthscale[0] : h.kernel.lengthscale[c];
        theta(static_cast<Eigen::Index>(c + 1)) = std::log(l);
    }
    theta(static_cast<Eigen::Index>(n_ell + 1)) = std::log(h.sigma2);
    return theta;
}

}  // namespace

HyperBounds HyperBounds::defaults(const Dataset& data, bool per_dimension) {
    HyperBounds b;
    b.per_dimension = per_dimension;
    const double v = std::max(sample_variance(data.y), 1e-6);
    const double diag = std::max(data.domain.diagonal(), 1e-12);
    b.log_s2_lo = std::log(v) - 6.0;
    b.log_s2_hi = std::log(v) + 3.0;
    b.log_ell_lo = std::log(1e-3 * diag);
    b.log_ell_hi = std::log(10.0 * diag);
    b.log_sigma2_lo = std::log(1e-8);
    b.log_sigma2_hi = std::max(std::log(v), b.log_sigma2_lo);
    return b;
}

double log_marginal_likelihood(const Dataset& data, double mu, double sigma2, const KernelSpec& k) {
    if (data.size() < 1) throw std::invalid_argument("log_marginal_likelihood: empty dataset");
    auto K = cov_matrix(data.X, k, sigma2);
    const auto chol = cholesky_with_jitter(K, k.signal_variance);
    const Vector r = data.y.array() - mu;
    const double quad = r.dot(chol.solve(r));
    return -0.5 * quad - 0.5 * chol.log_det() - 0.5 * static_cast<double>(data.size()) * kLog2Pi;
}

double profile_mean(const CholeskyFactor& chol, const Vector& y) {
    const Vector a = chol.solve(Vector::Ones(y.size()).eval());
    const Vector b = chol.solve(y);
    return b.sum() / a.sum();
}

GpFit make_gp_fit(const Dataset& data, const KernelSpec& k, double sigma2, std::optional<double> mu) {
    if (data.size() < 1) throw std::invalid_argument("make_gp_fit: empty dataset");
    k.validate();
    if (!(sigma2 >= 0.0)) throw std::invalid_argument("make_gp_fit: negative noise variance");
    GpFit fit;
    fit.kernel = k;
    fit.sigma2_hat = sigma2;
    fit.chol = cholesky_with_jitter(cov_matrix(data.X, k, sigma2), k.signal_variance);
    fit.mu_hat = mu ? *mu : profile_mean(fit.chol, data.y);
    const Vector r = data.y.array() - fit.mu_hat;
    fit.alpha = fit.chol.solve(r);
    fit.log_likelihood = -0.5 * r.dot(fit.alpha) - 0.5 * fit.chol.log_det() -
                         0.5 * static_cast<double>(data.size()) * kLog2Pi;
    return fit;
}

GpFit fit_gp(const Dataset& data, const HyperBounds& bounds, const GpFitOptions& options,
             RngStream& rng) {
    if (data.size() < 2) throw std::invalid_argument("fit_gp: need at least two points");
    const std::size_t n_ell = bounds.per_dimension ? static_cast<std::size_t>(data.dim()) : 1;
    const auto dim = static_cast<Eigen::Index>(n_ell + 2);

    BoxBounds box{Vector(dim), Vector(dim)};
    box.lower(0) = bounds.log_s2_lo;
    box.upper(0) = bounds.log_s2_hi;
    for (Eigen::Index c = 1; c <= static_cast<Eigen::Index>(n_ell); ++c) {
        box.lower(c) = bounds.log_ell_lo;
        box.upper(c) = bounds.log_ell_hi;
    }
    box.lower(dim - 1) = bounds.log_sigma2_lo;
    box.upper(dim - 1) = bounds.log_sigma2_hi;

    const DistanceCache cache(data.X, bounds.per_dimension);
    LikelihoodWorkspace work(data.size());
    work.inv_ell2.assign(n_ell, 1.0);
    auto objective = [&](const Vector& theta) -> double {
        const double s2 = std::exp(theta(0));
        for (std::size_t c = 0; c < n_ell; ++c) {
            const double l = std::exp(theta(static_cast<Eigen::Index>(c + 1)));
            work.inv_ell2[c] = 1.0 / (l * l);
        }
        const double sigma2 = std::exp(theta(dim - 1));
        cache.fill(work.K, s2, work.inv_ell2, sigma2);
        return -work.profiled(data.y, s2);
    };

    Vector first;
    if (options.warm_start) {
        first = box.clamp(pack(*options.warm_start, n_ell));
    } else {
        const double v = std::max(sample_variance(data.y), 1e-6);
        first = Vector(dim);
        first(0) = std::log(v);
        first.segment(1, static_cast<Eigen::Index>(n_ell)).setConstant(std::log(cache.median_distance()));
        first(dim - 1) = std::log(0.1 * v);
        first = box.clamp(first);
    }

    MinimizeResult best;
    best.value = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int restarts = std::max(1, options.restarts);
    for (int r = 0; r < restarts; ++r) {
        Vector start = first;
        if (r > 0) {
            for (Eigen::Index c = 0; c < dim; ++c) {
                start(c) = box.lower(c) + unit(rng) * (box.upper(c) - box.lower(c));
            }
        }
        auto res = minimize_in_box(objective, start, box, options.simplex);
        any_converged = any_converged || res.converged;
        if (res.value < best.value) best = std::move(res);
    }

    if (!std::isfinite(best.value)) {
        const Vector at = best.x.size() == dim ? best.x : first;
        throw FitError("fit_gp: no restart produced a finite likelihood", unpack(at, n_ell),
                       best.value);
    }

    const GpHyper h = unpack(best.x, n_ell);
    GpFit fit = make_gp_fit(data, h.kernel, h.sigma2);
    fit.converged = any_converged;
    return fit;
}

GpPrediction predict_gp(const GpFit& fit, const Dataset& data, const PointRef& xstar) {
    if (fit.alpha.size() != data.size()) {
        throw std::invalid_argument("predict_gp: fit does not belong to this dataset");
    }
    const Vector c = cov_vector(data.X, xstar, fit.kernel);
    GpPrediction p;
    p.mean = fit.mu_hat + c.dot(fit.alpha);
    const Vector v = fit.chol.llt.matrixL().solve(c);
    p.var_raw = fit.kernel.signal_variance - v.squaredNorm();
    p.var = std::max(p.var_raw, kVarianceFloor * fit.kernel.signal_variance);
    return p;
}

}  // namespace jgp
