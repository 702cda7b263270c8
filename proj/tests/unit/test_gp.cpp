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

#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "jgp/gp.hpp"

using namespace jgp;

namespace {

Dataset make_data(const PointMatrix& X, const Vector& y, double lo = -0.5, double hi = 0.5) {
    Dataset d;
    d.X = X;
    d.y = y;
    d.domain = Domain::cube(X.cols(), lo, hi);
    return d;
}

// Conditional moments of f(x*) from the explicit joint covariance.
std::pair<double, double> schur_conditioning(const Dataset& data, const PointRef& xs, const KernelSpec& k,
                                             double sigma2, double mu) {
    const Eigen::Index n = data.size();
    Matrix joint(n + 1, n + 1);
    for (Eigen::Index i = 0; i <= n; ++i) {
        for (Eigen::Index j = 0; j <= n; ++j) {
            const Vector a = i < n ? data.point(i) : Vector(xs);
            const Vector b = j < n ? data.point(j) : Vector(xs);
            joint(i, j) = se_kernel(a, b, k) + (i == j && i < n ? sigma2 : 0.0);
        }
    }
    const Matrix Kyy = joint.topLeftCorner(n, n);
    const Vector kys = joint.topRightCorner(n, 1);
    const Matrix inv = Kyy.inverse();
    const double mean = mu + kys.dot(inv * (data.y.array() - mu).matrix());
    const double var = joint(n, n) - kys.dot(inv * kys);
    return {mean, var};
}

}  // namespace

TEST_SUITE("stationary-gp") {

TEST_CASE("log_marginal_likelihood reduces to the scalar normal density") {
    PointMatrix X(1, 1);
    X << 0.1;
    Vector y(1);
    y << 1.7;
    const double mu = 0.4;
    const double s2n = 0.3;
    const auto k = KernelSpec::isotropic(1e-14, 1.0);
    const double expect = -0.5 * std::log(2.0 * M_PI * s2n) - (1.7 - mu) * (1.7 - mu) / (2.0 * s2n);
    CHECK(log_marginal_likelihood(make_data(X, y), mu, s2n, k) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("log_marginal_likelihood matches a dense MVN density") {
    auto rng = make_stream({10});
    std::normal_distribution<double> z(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const PointMatrix X = testing::random_points(3, 2, rng);
        Vector y(3);
        for (int i = 0; i < 3; ++i) y(i) = 3.0 * z(rng);
        const auto k = KernelSpec::isotropic(2.5, 0.3);
        const auto data = make_data(X, y);
        const Matrix C = cov_matrix(X, k, 0.7).values();
        const double dense = testing::dense_mvn_logpdf(y, Vector::Constant(3, 1.2), C);
        CHECK(log_marginal_likelihood(data, 1.2, 0.7, k) == doctest::Approx(dense).epsilon(1e-10));
    }
}

TEST_CASE("a far independent observation adds its scalar term") {
    auto rng = make_stream({11});
    PointMatrix X = testing::random_points(4, 1, rng, 0.0, 1.0);
    Vector y(4);
    y << 1.0, 2.0, 0.5, -1.0;
    const auto k = KernelSpec::isotropic(2.0, 0.1);
    const double mu = 0.3;
    const double s2n = 0.2;
    Dataset d = make_data(X, y, 0.0, 1000.0);
    const double base = log_marginal_likelihood(d, mu, s2n, k);
    Vector far = Vector::Constant(1, 900.0);
    d.append(far, 4.0);
    const double scalar =
        -0.5 * std::log(2.0 * M_PI * (2.0 + s2n)) - (4.0 - mu) * (4.0 - mu) / (2.0 * (2.0 + s2n));
    CHECK(log_marginal_likelihood(d, mu, s2n, k) == doctest::Approx(base + scalar).epsilon(1e-12));
}

TEST_CASE("profiled mean maximizes the likelihood over mu") {
    auto rng = make_stream({12});
    const PointMatrix X = testing::random_points(8, 2, rng);
    Vector y(8);
    std::normal_distribution<double> z(5.0, 2.0);
    for (int i = 0; i < 8; ++i) y(i) = z(rng);
    const auto data = make_data(X, y);
    const auto k = KernelSpec::isotropic(3.0, 0.4);
    const GpFit fit = make_gp_fit(data, k, 0.5);
    // Golden-section scan of the likelihood in mu.
    double a = -20.0;
    double b = 30.0;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    auto f = [&](double mu) { return -log_marginal_likelihood(data, mu, 0.5, k); };
    for (int it = 0; it < 200 && b - a > 1e-9; ++it) {
        const double c = b - g * (b - a);
        const double d = a + g * (b - a);
        if (f(c) < f(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    CHECK(fit.mu_hat == doctest::Approx(0.5 * (a + b)).epsilon(1e-6));
}

TEST_CASE("predict_gp matches Schur-complement conditioning on a fixed 1-d instance") {
    PointMatrix X(4, 1);
    X << -0.4, -0.1, 0.15, 0.45;
    Vector y(4);
    y << 1.0, 2.5, 2.0, -0.5;
    const auto data = make_data(X, y);
    const auto k = KernelSpec::isotropic(2.0, 0.25);
    const GpFit fit = make_gp_fit(data, k, 0.1);
    const Vector xs = Vector::Constant(1, 0.05);
    const auto [m, v] = schur_conditioning(data, xs, k, 0.1, fit.mu_hat);
    const auto p = predict_gp(fit, data, xs);
    CHECK(p.mean == doctest::Approx(m).epsilon(1e-8));
    CHECK(p.var == doctest::Approx(v).epsilon(1e-8));
}

TEST_CASE("predict_gp reverts to the prior far away and interpolates without noise") {
    auto rng = make_stream({13});
    const PointMatrix X = testing::random_points(6, 2, rng);
    Vector y(6);
    y << 1, 2, 3, 4, 5, 6;
    Dataset data = make_data(X, y);
    data.domain = Domain::cube(2, -100.0, 100.0);
    const auto k = KernelSpec::isotropic(4.0, 0.3);
    const GpFit fit = make_gp_fit(data, k, 1e-10);
    const auto far = predict_gp(fit, data, Vector::Constant(2, 90.0));
    CHECK(far.mean == doctest::Approx(fit.mu_hat).epsilon(1e-12));
    CHECK(far.var == doctest::Approx(4.0).epsilon(1e-12));
    const auto at = predict_gp(fit, data, data.point(2));
    CHECK(at.mean == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(at.var < 1e-6);
    CHECK(at.var >= 1e-12 * 4.0);
}

TEST_CASE("predictive variance does not grow when a point is added") {
    auto rng = make_stream({14});
    const auto k = KernelSpec::isotropic(1.0, 0.2);
    for (int rep = 0; rep < 20; ++rep) {
        PointMatrix X = testing::random_points(6, 1, rng);
        Vector y = Vector::Zero(6);
        Dataset small = make_data(X.topRows(5), y.head(5));
        Dataset big = make_data(X, y);
        const GpFit f1 = make_gp_fit(small, k, 1e-8);
        const GpFit f2 = make_gp_fit(big, k, 1e-8);
        for (double x = -0.5; x <= 0.5; x += 0.05) {
            const Vector xs = Vector::Constant(1, x);
            CHECK(predict_gp(f2, big, xs).var <= predict_gp(f1, small, xs).var + 1e-12);
            CHECK(predict_gp(f1, small, xs).var_raw >= -1e-10);
        }
    }
}

TEST_CASE("fit_gp with constant responses") {
    auto rng = make_stream({15});
    const PointMatrix X = testing::random_points(10, 2, rng);
    const auto data = make_data(X, Vector::Constant(10, 3.25));
    const auto bounds = HyperBounds::defaults(data);
    const GpFit fit = fit_gp(data, bounds, GpFitOptions{}, rng);
    CHECK(fit.mu_hat == doctest::Approx(3.25).epsilon(1e-9));
    CHECK(fit.sigma2_hat <= std::exp(bounds.log_sigma2_hi) * (1.0 + 1e-12));
    CHECK(fit.sigma2_hat > 0.0);
}

TEST_CASE("more restarts never lower the likelihood") {
    auto rng = make_stream({16});
    for (int rep = 0; rep < 5; ++rep) {
        Dataset data = testing::step_data(20, 2, rng, 10.0, 1.0);
        GpFitOptions one;
        one.restarts = 1;
        GpFitOptions five;
        five.restarts = 5;
        auto r1 = make_stream({17, static_cast<std::uint64_t>(rep)});
        auto r5 = make_stream({17, static_cast<std::uint64_t>(rep)});
        const auto b = HyperBounds::defaults(data);
        CHECK(fit_gp(data, b, five, r5).log_likelihood >= fit_gp(data, b, one, r1).log_likelihood - 1e-9);
    }
}

TEST_CASE("fit_gp recovers generating hyperparameters") {
    // 20 x 10 grid with spacing 6: neighbors stay correlated so ell is
    // identifiable, and the domain spans enough lengthscales to pin down s2.
    const auto k = KernelSpec::isotropic(9.0, 10.0);
    PointMatrix X(200, 2);
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 10; ++j) {
            X(i * 10 + j, 0) = 6.0 * i;
            X(i * 10 + j, 1) = 6.0 * j;
        }
    }
    int good = 0;
    for (int seed = 0; seed < 20; ++seed) {
        auto rng = make_stream({18, static_cast<std::uint64_t>(seed)});
        const Vector f = mvn_sample(Vector::Zero(200), cov_matrix(X, k, 0.0), rng);
        std::normal_distribution<double> e(0.0, 2.0);
        Vector y(200);
        for (int i = 0; i < 200; ++i) y(i) = f(i) + e(rng);
        Dataset data;
        data.X = X;
        data.y = y;
        data.domain = Domain{Vector::Zero(2), Vector((Vector(2) << 114.0, 54.0).finished())};
        GpFitOptions opt;
        opt.restarts = 2;
        const GpFit fit = fit_gp(data, HyperBounds::defaults(data), opt, rng);
        const bool ok = std::abs(std::log(fit.kernel.signal_variance / 9.0)) <= 0.5 &&
                        std::abs(std::log(fit.kernel.lengthscale[0] / 10.0)) <= 0.5 &&
                        std::abs(std::log(fit.sigma2_hat / 4.0)) <= 0.5;
        good += ok ? 1 : 0;
    }
    CHECK(good >= 16);
}

TEST_CASE("dataset validation") {
    Dataset d;
    d.domain = Domain::cube(1, 0.0, 1.0);
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d.X = PointMatrix::Constant(2, 1, 0.5);
    d.y = Vector::Constant(2, 1.0);
    CHECK_NOTHROW(d.validate());
    d.X(1, 0) = 2.0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d.X(1, 0) = std::nan("");
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

}
