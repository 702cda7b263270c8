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

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "jgp/acquisition.hpp"
#include "jgp/design.hpp"

using namespace jgp;

namespace {

AlState step_state(Eigen::Index n, std::uint64_t seed, Eigen::Index n_local = 12) {
    auto rng = make_stream({40, seed});
    AlState s;
    s.data = testing::step_data(n, 2, rng);
    s.config.n_local = n_local;
    s.seed = seed;
    return s;
}

CandidateSet make_set(const PointMatrix& P) {
    CandidateSet cs;
    cs.points = P;
    return cs;
}

}  // namespace

TEST_SUITE("acquisition") {

TEST_CASE("LHD has one point per bin in every column") {
    auto rng = make_stream({41});
    for (Eigen::Index n : {1, 2, 7, 40}) {
        const PointMatrix X = maximin_lhd(n, 3, rng);
        for (Eigen::Index c = 0; c < 3; ++c) {
            std::set<long> bins;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double b = X(i, c) * static_cast<double>(n) - 0.5;
                CHECK(std::abs(b - std::round(b)) < 1e-9);
                bins.insert(std::lround(b));
            }
            CHECK(static_cast<Eigen::Index>(bins.size()) == n);
            CHECK(*bins.begin() == 0);
            CHECK(*bins.rbegin() == n - 1);
        }
    }
    const PointMatrix one = maximin_lhd(1, 2, rng);
    CHECK(one(0, 0) == 0.5);
    CHECK(one(0, 1) == 0.5);
}

TEST_CASE("maximin swaps never reduce the minimum distance") {
    int improved = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto a = make_stream({42, s});
        auto b = make_stream({42, s});
        const double plain = min_pairwise_distance(maximin_lhd(30, 2, a, 0));
        const double opt = min_pairwise_distance(maximin_lhd(30, 2, b, 1000));
        CHECK(opt >= plain);
        improved += opt > plain;
    }
    CHECK(improved >= 15);
}

TEST_CASE("candidates lie in the domain and avoid existing inputs") {
    auto rng = make_stream({43});
    Domain dom = Domain::cube(2, -0.5, 0.5);
    const auto cs = gen_candidates(dom, 50, rng, nullptr, 3, 9);
    CHECK(cs.size() == 50);
    CHECK(cs.stage == 3);
    CHECK(cs.seed == 9);
    CHECK(cs.points.minCoeff() >= -0.5);
    CHECK(cs.points.maxCoeff() <= 0.5);

    // A single candidate always sits at the bin center unless it collides.
    PointMatrix existing(1, 2);
    existing << 0.0, 0.0;
    auto r1 = make_stream({44});
    const auto free = gen_candidates(dom, 1, r1);
    CHECK(free.points.row(0).norm() == 0.0);
    auto r2 = make_stream({44});
    const auto moved = gen_candidates(dom, 1, r2, &existing);
    CHECK(moved.points.row(0).norm() > 1e-9);
}

TEST_CASE("update_neighborhood matches a fresh selection") {
    auto rng = make_stream({45});
    for (int trial = 0; trial < 100; ++trial) {
        Dataset d;
        d.domain = Domain::cube(2, -0.5, 0.5);
        d.X = testing::random_points(30, 2, rng);
        d.y = Vector::Zero(30);
        const Vector t = testing::random_points(1, 2, rng).row(0).transpose();
        const Vector xnew = testing::random_points(1, 2, rng).row(0).transpose();
        const auto before = select_neighborhood(d, t, 10);
        Dataset aug = d;
        aug.append(xnew, 0.0);
        const auto expect = select_neighborhood(aug, t, 10);
        const auto got = update_neighborhood(before, xnew, 30);
        CHECK(got.indices == expect.indices);
        CHECK(got.radius == doctest::Approx(expect.radius).epsilon(1e-15));
    }
}

TEST_CASE("a candidate outside every neighborhood changes nothing") {
    AlState s;
    auto rng = make_stream({46});
    s.data.domain = Domain::cube(2, -0.5, 0.5);
    s.data.X = testing::random_points(40, 2, rng, -0.5, 0.0);
    s.data.y = Vector::Zero(40);
    for (Eigen::Index i = 0; i < 40; ++i) s.data.y(i) = std::sin(5 * s.data.X(i, 0));
    s.config.n_local = 8;
    const PointMatrix test = testing::random_points(5, 2, rng, -0.4, -0.1);
    const auto base = make_imspe_baseline(s, test, true, Execution::kSerial);
    Vector far(2);
    far << 0.5, 0.5;
    const auto d = delta_imspe(s, base, far);
    CHECK(d.affected == 0);
    CHECK(d.value == 0.0);
}

TEST_CASE("single candidate is always chosen") {
    const AlState s = step_state(40, 1);
    PointMatrix P(1, 2);
    P << 0.1, -0.2;
    auto rng = make_stream({47});
    const PointMatrix test = testing::random_points(6, 2, rng);
    for (auto c : {Criterion::kMspe, Criterion::kVar, Criterion::kImspe, Criterion::kAlc, Criterion::kLhd}) {
        const auto score = acquire(s, c, make_set(P), test);
        CHECK(score.candidate_index == 0);
        CHECK(score.criterion == c);
        CHECK(std::isfinite(score.value));
    }
    CHECK_THROWS_AS(acquire(s, Criterion::kMspe, make_set(PointMatrix(0, 2)), test), std::invalid_argument);
}

TEST_CASE("MSPE prefers a candidate at the jump over an interior one") {
    int boundary_wins = 0;
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const AlState s = step_state(60, seed);
        PointMatrix P(2, 2);
        P << -0.35, 0.0, 0.0, 0.0;
        const auto recs = score_points(s, P, Execution::kSerial);
        REQUIRE(recs[0].has_value());
        REQUIRE(recs[1].has_value());
        boundary_wins += recs[1]->mspe_hat > recs[0]->mspe_hat;
        const auto pick = acquire_max_mspe(s, make_set(P));
        CHECK(pick.value == std::max(recs[0]->mspe_hat, recs[1]->mspe_hat));
    }
    CHECK(boundary_wins >= 5);
}

TEST_CASE("serial and parallel scoring agree exactly") {
    const AlState s = step_state(50, 2);
    auto rng = make_stream({48});
    const PointMatrix P = testing::random_points(12, 2, rng);
    const auto a = score_points(s, P, Execution::kSerial);
    const auto b = score_points(s, P, Execution::kParallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].has_value() == b[i].has_value());
        if (a[i]) {
            CHECK(a[i]->mean == b[i]->mean);
            CHECK(a[i]->mspe_hat == b[i]->mspe_hat);
        }
    }
    AlState ser = s;
    ser.config.execution = Execution::kSerial;
    const PointMatrix test = testing::random_points(5, 2, rng);
    const auto x = acquire_min_imspe(s, make_set(P), test);
    const auto y = acquire_min_imspe(ser, make_set(P), test);
    CHECK(x.candidate_index == y.candidate_index);
    CHECK(x.value == y.value);
}

TEST_CASE("ALC equals IMSPE once the bias term is switched off") {
    AlState s = step_state(50, 3);
    s.config.uq.include_bias = false;
    auto rng = make_stream({49});
    const PointMatrix P = testing::random_points(6, 2, rng);
    const PointMatrix test = testing::random_points(5, 2, rng);
    const auto a = acquire_alc(s, make_set(P), test);
    const auto b = acquire_min_imspe(s, make_set(P), test);
    CHECK(a.candidate_index == b.candidate_index);
    CHECK(a.value == b.value);
}

TEST_CASE("space filling picks the candidate farthest from the data") {
    Dataset d;
    d.domain = Domain::cube(1, 0.0, 1.0);
    d.X.resize(2, 1);
    d.X << 0.0, 0.3;
    d.y = Vector::Zero(2);
    PointMatrix P(3, 1);
    P << 0.1, 0.9, 0.5;
    const auto s = acquire_space_filling(d, make_set(P));
    CHECK(s.candidate_index == 1);
    CHECK(s.value == doctest::Approx(0.6));
}

TEST_CASE("batch acquisition") {
    const AlState s = step_state(40, 4);
    auto rng = make_stream({50});
    const PointMatrix P = testing::random_points(8, 2, rng);
    const PointMatrix test = testing::random_points(4, 2, rng);
    const auto one = acquire_batch(s, make_set(P), 1, Criterion::kMspe, test);
    const auto single = acquire(s, Criterion::kMspe, make_set(P), test);
    REQUIRE(one.picks.size() == 1);
    CHECK(one.picks[0].candidate_index == single.candidate_index);
    CHECK(one.picks[0].value == single.value);

    const auto three = acquire_batch(s, make_set(P), 3, Criterion::kMspe, test);
    REQUIRE(three.picks.size() == 3);
    CHECK(three.imputed.size() == 3);
    std::set<Eigen::Index> idx;
    for (const auto& p : three.picks) {
        idx.insert(p.candidate_index);
        CHECK((p.candidate - P.row(p.candidate_index).transpose()).norm() == 0.0);
    }
    CHECK(idx.size() == 3);
    CHECK_THROWS_AS(acquire_batch(s, make_set(P), 9, Criterion::kMspe, test), std::invalid_argument);
    CHECK_THROWS_AS(acquire_batch(s, make_set(P), 0, Criterion::kMspe, test), std::invalid_argument);
}

TEST_CASE("GP variance reduction agrees with refitting on the augmented data") {
    auto rng = make_stream({51});
    Dataset d;
    d.domain = Domain::cube(2, -0.5, 0.5);
    d.X = testing::random_points(15, 2, rng);
    d.y = testing::random_points(15, 1, rng).col(0);
    const auto k = KernelSpec::isotropic(2.0, 0.3);
    const GpFit fit = make_gp_fit(d, k, 0.1);
    const PointMatrix P = testing::random_points(5, 2, rng);
    const PointMatrix test = testing::random_points(7, 2, rng);
    std::vector<double> oracle;
    for (Eigen::Index i = 0; i < 5; ++i) {
        Dataset aug = d;
        aug.append(P.row(i).transpose(), 0.0);
        const GpFit f2 = make_gp_fit(aug, k, 0.1);
        double red = 0.0;
        for (Eigen::Index t = 0; t < 7; ++t) {
            red += predict_gp(f2, aug, test.row(t).transpose()).var_raw -
                   predict_gp(fit, d, test.row(t).transpose()).var_raw;
        }
        oracle.push_back(red / 7.0);
    }
    const auto best = std::min_element(oracle.begin(), oracle.end()) - oracle.begin();
    const auto s = acquire_gp_alc(fit, d, make_set(P), test);
    CHECK(s.candidate_index == best);
    CHECK(s.value == doctest::Approx(oracle[static_cast<std::size_t>(best)]).epsilon(1e-8));
    const auto v = acquire_gp_var(fit, d, make_set(P));
    double maxvar = 0.0;
    for (Eigen::Index i = 0; i < 5; ++i) maxvar = std::max(maxvar, predict_gp(fit, d, P.row(i).transpose()).var);
    CHECK(v.value == maxvar);
}

TEST_CASE("criterion names round trip") {
    for (auto c : {Criterion::kMspe, Criterion::kImspe, Criterion::kVar, Criterion::kAlc, Criterion::kLhd}) {
        CHECK(parse_criterion(to_string(c)) == c);
    }
    CHECK_THROWS(parse_criterion("EI"));
}

}
