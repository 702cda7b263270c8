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
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace jgp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Point sets are stored row-major so that a row maps onto a contiguous point.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PointRef = Eigen::Ref<const Vector>;

using RngStream = std::mt19937_64;

/// Builds a reproducible stream from a list of integer keys (seed, rep, stage, ...).
RngStream make_stream(std::initializer_list<std::uint64_t> keys);

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class KernelFamily { kSquaredExponential };

/// Covariance kernel s2 * exp(-0.5 * sum_k ((x_k - x'_k) / l_k)^2).
///
/// A single lengthscale means isotropic. The 9 exp(-|x-x'|^2 / 200) kernel is
/// signal_variance = 9 with lengthscale = 10 (l^2 = 100).
struct KernelSpec {
    KernelFamily family = KernelFamily::kSquaredExponential;
    double signal_variance = 1.0;
    std::vector<double> lengthscale{1.0};

    static KernelSpec isotropic(double signal_variance, double lengthscale);

    bool is_isotropic() const { return lengthscale.size() == 1; }
    /// Throws std::invalid_argument when a variance or lengthscale is not positive.
    void validate() const;
    /// Throws std::invalid_argument when the lengthscale count fits neither 1 nor dim.
    void check_dimension(Eigen::Index dim) const;
};

double se_kernel(const PointRef& x, const PointRef& x2, const KernelSpec& k);

/// Dense symmetric matrix, both triangles stored.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(Matrix values);

    Eigen::Index order() const { return values_.rows(); }
    const Matrix& values() const { return values_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }
    void add_diagonal(double v) { values_.diagonal().array() += v; }

private:
    Matrix values_;
};

SymmetricMatrix cov_matrix(const PointMatrix& X, const KernelSpec& k, double jitter);
/// Cross covariance between rows of A and rows of B.
Matrix cross_cov(const PointMatrix& A, const PointMatrix& B, const KernelSpec& k);
Vector cov_vector(const PointMatrix& X, const PointRef& x, const KernelSpec& k);

/// Lower Cholesky factor plus the diagonal jitter that was needed to get it.
struct CholeskyFactor {
    Eigen::LLT<Matrix> llt;
    double jitter = 0.0;

    Eigen::Index order() const { return llt.rows(); }
    Matrix solve(const Matrix& B) const { return llt.solve(B); }
    Vector solve(const Vector& b) const { return llt.solve(b); }
    double log_det() const;
};

/// Plain factorization; throws NumericalError if A is not positive definite.
CholeskyFactor cholesky(const SymmetricMatrix& A);

/// Factorization with jitter escalation: tries 1e-10 * scale, then x10 up to
/// 1e-4 * scale. Throws NumericalError naming the last jitter tried.
CholeskyFactor cholesky_with_jitter(const SymmetricMatrix& A, double scale);

Matrix chol_solve(const SymmetricMatrix& A, const Matrix& B);

Vector mvn_sample(const Vector& mean, const SymmetricMatrix& cov, RngStream& rng);

}  // namespace jgp
