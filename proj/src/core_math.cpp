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

#include "jgp/core_math.hpp"

#include <cmath>
#include <sstream>

namespace jgp {

RngStream make_stream(std::initializer_list<std::uint64_t> keys) {
    std::vector<std::uint32_t> words;
    words.reserve(2 * keys.size());
    for (auto key : keys) {
        words.push_back(static_cast<std::uint32_t>(key & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(key >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    return RngStream(seq);
}

KernelSpec KernelSpec::isotropic(double signal_variance, double lengthscale) {
    KernelSpec k;
    k.signal_variance = signal_variance;
    k.lengthscale = {lengthscale};
    return k;
}

void KernelSpec::validate() const {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        throw std::invalid_argument("kernel signal variance must be positive");
    }
    if (lengthscale.empty()) {
        throw std::invalid_argument("kernel needs at least one lengthscale");
    }
    for (double l : lengthscale) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            throw std::invalid_argument("kernel lengthscales must be positive");
        }
    }
}

void KernelSpec::check_dimension(Eigen::Index dim) const {
    if (!is_isotropic() && static_cast<Eigen::Index>(lengthscale.size()) != dim) {
        std::ostringstream msg;
        msg << "kernel has " << lengthscale.size() << " lengthscales but points have dimension "
            << dim;
        throw std::invalid_argument(msg.str());
    }
}

namespace {

inline double scaled_sq_dist(const double* a, const double* b, Eigen::Index d,
                             const KernelSpec& k) {
    double r2 = 0.0;
    if (k.is_isotropic()) {
        for (Eigen::Index c = 0; c < d; ++c) {
            const double diff = a[c] - b[c];
            r2 += diff * diff;
        }
        return r2 / (k.lengthscale[0] * k.lengthscale[0]);
    }
    for (Eigen::Index c = 0; c < d; ++c) {
        const double diff = (a[c] - b[c]) / k.lengthscale[static_cast<std::size_t>(c)];
        r2 += diff * diff;
    }
    return r2;
}

}  // namespace

double se_kernel(const PointRef& x, const PointRef& x2, const KernelSpec& k) {
    if (x.size() != x2.size()) {
        throw std::invalid_argument("se_kernel: point dimensions differ");
    }
    k.check_dimension(x.size());
    return k.signal_variance * std::exp(-0.5 * scaled_sq_dist(x.data(), x2.data(), x.size(), k));
}

SymmetricMatrix::SymmetricMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) {
        throw std::invalid_argument("SymmetricMatrix: matrix is not square");
    }
    // Mirror the lower triangle so symmetry is exact.
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < values_.rows(); ++i) {
            values_(j, i) = values_(i, j);
        }
    }
}

SymmetricMatrix cov_matrix(const PointMatrix& X, const KernelSpec& k, double jitter) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 1) {
        throw std::invalid_argument("cov_matrix: need at least one point");
    }
    k.check_dimension(d);
    Matrix C(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        C(i, i) = k.signal_variance + jitter;
        for (Eigen::Index j = 0; j < i; ++j) {
            C(i, j) = k.signal_variance *
                      std::exp(-0.5 * scaled_sq_dist(X.row(i).data(), X.row(j).data(), d, k));
        }
    }
    return SymmetricMatrix(std::move(C));
}

Matrix cross_cov(const PointMatrix& A, const PointMatrix& B, const KernelSpec& k) {
    if (A.cols() != B.cols()) {
        throw std::invalid_argument("cross_cov: point dimensions differ");
    }
    k.check_dimension(A.cols());
    Matrix K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            K(i, j) = k.signal_variance *
                      std::exp(-0.5 * scaled_sq_dist(A.row(i).data(), B.row(j).data(), A.cols(), k));
        }
    }
    return K;
}

Vector cov_vector(const PointMatrix& X, const PointRef& x, const KernelSpec& k) {
    if (X.cols() != x.size()) {
        throw std::invalid_argument("cov_vector: point dimensions differ");
    }
    k.check_dimension(x.size());
    Vector c(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        c(i) = k.signal_variance * std::exp(-0.5 * scaled_sq_dist(X.row(i).data(), x.data(), x.size(), k));
    }
    return c;
}

double CholeskyFactor::log_det() const {
    const auto& L = llt.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
    return 2.0 * s;
}

CholeskyFactor cholesky(const SymmetricMatrix& A) {
    CholeskyFactor f;
    f.llt.compute(A.values());
    if (f.llt.info() != Eigen::Success) {
        throw NumericalError("cholesky: matrix is not positive definite");
    }
    return f;
}

CholeskyFactor cholesky_with_jitter(const SymmetricMatrix& A, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
    CholeskyFactor f;
    f.llt.compute(A.values());
    if (f.llt.info() == Eigen::Success) return f;

    double jitter = 1e-10 * scale;
    const double max_jitter = 1e-4 * scale * (1.0 + 1e-12);
    Matrix work = A.values();
    double applied = 0.0;
    while (jitter <= max_jitter) {
        work.diagonal().array() += jitter - applied;
        applied = jitter;
        f.llt.compute(work);
        if (f.llt.info() == Eigen::Success) {
            f.jitter = jitter;
            return f;
        }
        jitter *= 10.0;
    }
    std::ostringstream msg;
    msg << "cholesky: factorization failed for order " << A.order()
        << " matrix after jitter escalation to " << applied;
    throw NumericalError(msg.str());
}

Matrix chol_solve(const SymmetricMatrix& A, const Matrix& B) {
    if (B.rows() != A.order()) {
        throw std::invalid_argument("chol_solve: right-hand side has wrong row count");
    }
    return cholesky(A).solve(B);
}

Vector mvn_sample(const Vector& mean, const SymmetricMatrix& cov, RngStream& rng) {
    if (mean.size() != cov.order()) {
        throw std::invalid_argument("mvn_sample: mean and covariance sizes differ");
    }
    const double scale = cov.order() > 0 ? cov.values().diagonal().cwiseAbs().maxCoeff() : 1.0;
    const auto f = cholesky_with_jitter(cov, scale > 0.0 ? scale : 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    return mean + f.llt.matrixL() * z;
}

}  // namespace jgp
