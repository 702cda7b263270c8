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

// Serial reference vs OpenMP timing for candidate scoring and IMSPE.
// Usage: jgp_bench [--candidates N] [--data N] [--repeat K] [--threads T]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "jgp/acquisition.hpp"
#include "jgp/benchgen.hpp"
#include "jgp/design.hpp"

using namespace jgp;

namespace {

template <class F>
double best_of(int repeat, F&& f) {
    double best = 1e300;
    for (int r = 0; r < repeat; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs parallel acquisition timing"};
    int n_cand = 100;
    int n_data = 80;
    int n_star = 20;
    int repeat = 3;
    int threads = 0;
    app.add_option("--candidates", n_cand, "candidate count");
    app.add_option("--data", n_data, "training set size");
    app.add_option("--quadrature", n_star, "IMSPE quadrature points");
    app.add_option("--repeat", repeat, "timed repetitions (best is reported)");
    app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)");
    CLI11_PARSE(app, argc, argv);
    if (threads > 0) omp_set_num_threads(threads);

    GroundTruth gt = sample_bgp_function(2, 7);
    auto rng = make_stream({7, 1});
    AlState state;
    state.data.domain = gt.spec().domain;
    const PointMatrix X = maximin_lhd(n_data, gt.spec().domain, rng);
    auto noise = make_stream({7, 2});
    for (Eigen::Index i = 0; i < X.rows(); ++i) state.data.append(X.row(i).transpose(), gt.observe(X.row(i).transpose(), noise));
    state.seed = 7;
    const CandidateSet cs = gen_candidates(state.data.domain, n_cand, rng, &state.data.X);
    const PointMatrix quad = maximin_lhd(n_star, state.data.domain, rng);

    std::printf("threads available: %d\n", omp_get_max_threads());
    std::printf("%-22s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");

    const double s1 = best_of(repeat, [&] { score_points(state, cs.points, Execution::kSerial); });
    const double p1 = best_of(repeat, [&] { score_points(state, cs.points, Execution::kParallel); });
    std::printf("%-22s %12.1f %12.1f %8.2f\n", "score_points", s1, p1, s1 / p1);

    AlState ser = state;
    ser.config.execution = Execution::kSerial;
    CandidateSet few = cs;
    few.points = cs.points.topRows(std::min<Eigen::Index>(20, cs.size()));
    const double s2 = best_of(1, [&] { acquire_min_imspe(ser, few, quad); });
    const double p2 = best_of(1, [&] { acquire_min_imspe(state, few, quad); });
    std::printf("%-22s %12.1f %12.1f %8.2f\n", "acquire_min_imspe", s2, p2, s2 / p2);

    const auto a = score_points(state, cs.points, Execution::kSerial);
    const auto b = score_points(state, cs.points, Execution::kParallel);
    int differ = 0;
    for (std::size_t i = 0; i < a.size(); ++i) differ += a[i].has_value() != b[i].has_value() || (a[i] && a[i]->mspe_hat != b[i]->mspe_hat);
    std::printf("serial/parallel score mismatches: %d\n", differ);
    return differ == 0 ? 0 : 1;
}
