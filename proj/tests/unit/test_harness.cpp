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
#include <sstream>

#include "jgp/harness.hpp"

using namespace jgp;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

RunConfig small_config(Criterion c) {
    RunConfig cfg;
    cfg.criterion = c;
    cfg.d = 2;
    cfg.n_local = 8;
    cfg.seed_design_size = 12;
    cfg.stages = 2;
    cfg.n_candidates = 15;
    cfg.n_star = 6;
    cfg.test_size = 25;
    cfg.master_seed = 17;
    cfg.final_restarts = 1;
    return cfg;
}

std::string trace_text(const AlTrace& t) {
    std::ostringstream os;
    write_trace_csv(os, t);
    return os.str();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("rmse and nlpd") {
    CHECK(rmse(vec({1, 2, 3, 4}), vec({1, 2, 3, 4})) == 0.0);
    CHECK(rmse(vec({0, 0}), vec({5, 0})) == doctest::Approx(3.5355339059327378).epsilon(1e-15));
    CHECK_THROWS_AS(rmse(vec({1}), vec({1, 2})), std::invalid_argument);

    const double half_log_2pi = 0.5 * std::log(2.0 * 3.14159265358979323846);
    CHECK(nlpd(vec({0}), vec({1}), vec({0}), 0.0) == doctest::Approx(half_log_2pi).epsilon(1e-15));
    CHECK(nlpd(vec({0}), vec({1}), vec({0}), 1.0) ==
          doctest::Approx(half_log_2pi + 0.5 * std::log(2.0)).epsilon(1e-15));
    CHECK(nlpd(vec({0, 0}), vec({1, 1}), vec({1, 1}), 0.0) == doctest::Approx(half_log_2pi + 0.5).epsilon(1e-15));
    CHECK_THROWS(nlpd(vec({0}), vec({0}), vec({0}), 0.0));
}

TEST_CASE("wilcoxon signed rank") {
    CHECK(wilcoxon_signed_rank(vec({1, 2, 3, 4, 5}), vec({1, 2, 3, 4, 5})) == 1.0);
    CHECK(wilcoxon_signed_rank(vec({1, 2, 3, 4, 5, 6}), Vector::Zero(6)) == doctest::Approx(0.03125).epsilon(1e-14));
    CHECK(wilcoxon_signed_rank(Vector::Zero(6), vec({1, 2, 3, 4, 5, 6})) == doctest::Approx(0.03125).epsilon(1e-14));
    // Reference values from scipy.stats.wilcoxon.
    const Vector a = vec({125, 115, 130, 140, 140.5, 115.5, 140.25, 125.75, 140.125, 135});
    const Vector b = vec({110, 122, 125, 120, 140, 124, 123, 137, 135, 145});
    CHECK(wilcoxon_signed_rank(a, b) == doctest::Approx(0.625).epsilon(1e-14));
    const Vector x = vec({0.3, 0.6, 0.0, -0.6, -0.2, -0.7, 0.4, 1.6, -0.2, -0.3, 0.8, 0.7, 0.4,
                          -0.6, 0.3, 1.0, -1.0, -0.2, -1.6, -1.0, -1.5, 0.1, -1.0, 0.6, 0.5});
    CHECK(wilcoxon_signed_rank(x, Vector::Zero(25)) == doctest::Approx(0.7967538130816096).epsilon(1e-12));
    CHECK_THROWS(wilcoxon_signed_rank(vec({1, 2, 3, 4}), vec({0, 0, 0, 0})));
}

TEST_CASE("run config parsing") {
    const auto cfg = parse_run_config(R"({"criterion":"IMSPE","d":3,"stages":4,"source":{"kind":"bgp"}})");
    CHECK(cfg.criterion == Criterion::kImspe);
    CHECK(cfg.d == 3);
    CHECK(cfg.resolved_seed_size() == 60);
    CHECK(cfg.resolved_candidates() == 300);
    CHECK(cfg.resolved_n_star() == 60);
    CHECK(cfg.source.kind == SourceKind::kBgp);
    CHECK(parse_run_config(R"({"source":{"kind":"four_region"}})").source.kind == SourceKind::kFourRegion);
    CHECK_THROWS(parse_run_config(R"({"d":3,"source":{"kind":"four_region"}})"));
    CHECK_THROWS(parse_run_config(R"({"criterion":"MSPE","stagez":3})"));
    CHECK_THROWS(parse_run_config(R"({"d":"two"})"));
    CHECK_THROWS(parse_run_config(R"({"criterion":"EI"})"));
    CHECK_THROWS(parse_run_config(R"({"batch_size":0})"));

    const auto back = parse_run_config(run_config_to_json(cfg));
    CHECK(run_config_to_json(back) == run_config_to_json(cfg));
}

TEST_CASE("zero stages give only the seed row") {
    auto cfg = small_config(Criterion::kMspe);
    cfg.stages = 0;
    const auto t = run_active_learning(cfg);
    REQUIRE_FALSE(t.error.has_value());
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].stage == 0);
    CHECK(t.rows[0].n == 12);
    CHECK(std::isfinite(t.rows[0].rmse));
    CHECK(std::isfinite(t.rows[0].nlpd));
}

TEST_CASE("sample size grows by the batch size") {
    auto cfg = small_config(Criterion::kLhd);
    cfg.batch_size = 3;
    cfg.stages = 3;
    const auto t = run_active_learning(cfg);
    REQUIRE_FALSE(t.error.has_value());
    REQUIRE(t.rows.size() == 1 + 3 * 3);
    for (const auto& r : t.rows) {
        if (r.stage == 0) continue;
        CHECK(r.n == 12 + r.stage * 3);
        CHECK(r.x.size() == 2);
        CHECK(std::isfinite(r.y_obs));
        CHECK(r.criterion == Criterion::kLhd);
    }
    CHECK(t.rows.back().n == 12 + 3 * 3);
}

TEST_CASE("traces are reproducible and survive a csv round trip") {
    for (auto c : {Criterion::kMspe, Criterion::kImspe}) {
        auto cfg = small_config(c);
        cfg.reps = 2;
        const auto a = run_active_learning(cfg);
        const auto b = run_active_learning(cfg);
        REQUIRE_FALSE(a.error.has_value());
        CHECK(trace_text(a) == trace_text(b));
        CHECK(a.rows.size() == 2 * 3);

        std::istringstream in(trace_text(a));
        const auto back = read_trace_csv(in);
        CHECK(trace_text(back) == trace_text(a));
    }
}

TEST_CASE("reps do not depend on each other") {
    auto cfg = small_config(Criterion::kVar);
    cfg.reps = 2;
    const auto both = run_active_learning(cfg);
    const auto second = run_rep(cfg, 1);
    REQUIRE(second.rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(second.rows[i].rmse == both.rows[3 + i].rmse);
        CHECK(second.rows[i].rep == 1);
    }
}

TEST_CASE("eval_every leaves gaps but always scores the ends") {
    auto cfg = small_config(Criterion::kLhd);
    cfg.stages = 4;
    cfg.eval_every = 3;
    const auto t = run_active_learning(cfg);
    REQUIRE(t.rows.size() == 5);
    CHECK(std::isfinite(t.rows[0].rmse));
    CHECK(std::isnan(t.rows[1].rmse));
    CHECK(std::isnan(t.rows[2].rmse));
    CHECK(std::isfinite(t.rows[3].rmse));
    CHECK(std::isfinite(t.rows[4].rmse));
}

TEST_CASE("report pairs reps across criteria") {
    AlTrace a;
    AlTrace b;
    for (int rep = 0; rep < 6; ++rep) {
        TraceRow r;
        r.rep = rep;
        r.stage = 1;
        r.n = 5;
        r.rmse = 1.0 + rep;
        r.nlpd = 0.0;
        r.criterion = Criterion::kMspe;
        a.rows.push_back(r);
        r.rmse = 2.0 + 2 * rep;
        r.criterion = Criterion::kVar;
        b.rows.push_back(r);
    }
    const auto rep = make_report({a, b});
    REQUIRE(rep.criteria.size() == 2);
    CHECK(rep.p_values(0, 1) == doctest::Approx(0.03125));
    CHECK(rep.rmse_diff(0, 1) == doctest::Approx(-3.5));
    CHECK(rep.summary.size() == 2);
}

}
