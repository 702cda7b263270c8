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

// Acceptance checks. Usage: jgp_acceptance [--out DIR] [criterion ...]
// With no criterion numbers every check runs. One PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jgp/acquisition.hpp"
#include "jgp/benchgen.hpp"
#include "jgp/design.hpp"
#include "jgp/harness.hpp"

using namespace jgp;

namespace {

std::string g_out_dir;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

PointMatrix uniform_points(Eigen::Index n, Eigen::Index d, RngStream& rng, double lo = -0.5, double hi = 0.5) {
    std::uniform_real_distribution<double> u(lo, hi);
    PointMatrix X(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < d; ++c) X(i, c) = u(rng);
    }
    return X;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

void save_trace(const std::string& name, const AlTrace& t) {
    if (g_out_dir.empty()) return;
    std::ofstream f(g_out_dir + "/" + name + ".csv");
    write_trace_csv(f, t);
}

// Brute-force conditioning of the joint Gaussian (y, f*) with a dense inverse.
Outcome gp_oracle() {
    auto rng = make_stream({0xacce, 1});
    double worst = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const Eigen::Index d = 1 + inst % 3;
        const Eigen::Index n = 2 + inst % 9;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const auto k = KernelSpec::isotropic(0.5 + 4 * u(rng), 0.1 + 0.5 * u(rng));
        const double sigma2 = 0.01 + u(rng);
        Dataset data;
        data.domain = Domain::cube(d, -0.5, 0.5);
        data.X = uniform_points(n, d, rng);
        data.y = uniform_points(n, 1, rng, -3, 3).col(0);
        const Vector xs = uniform_points(1, d, rng).row(0).transpose();
        const GpFit fit = make_gp_fit(data, k, sigma2);
        const auto p = predict_gp(fit, data, xs);

        Matrix J(n + 1, n + 1);
        PointMatrix all(n + 1, d);
        all.topRows(n) = data.X;
        all.row(n) = xs.transpose();
        for (Eigen::Index i = 0; i <= n; ++i) {
            for (Eigen::Index j = 0; j <= n; ++j) J(i, j) = se_kernel(all.row(i).transpose(), all.row(j).transpose(), k);
        }
        const Matrix Kyy = J.topLeftCorner(n, n) + sigma2 * Matrix::Identity(n, n);
        const Vector kys = J.topRightCorner(n, 1);
        const Matrix inv = Kyy.inverse();
        const Vector ones = Vector::Ones(n);
        const double mu = ones.dot(inv * data.y) / ones.dot(inv * ones);
        const double mean = mu + kys.dot(inv * (data.y - mu * ones));
        const double var = J(n, n) - kys.dot(inv * kys);
        worst = std::max({worst, rel_err(p.mean, mean), std::abs(p.var_raw - var) / std::max(var, 1e-300)});
    }
    return {worst <= 1e-8, "100 instances, max relative error " + fmt("%.3g", worst)};
}

Dataset step_dataset(Eigen::Index n, RngStream& rng) {
    Dataset data;
    data.domain = Domain::cube(2, -0.5, 0.5);
    data.X = uniform_points(n, 2, rng);
    std::normal_distribution<double> e(0.0, 2.0);
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        data.y(i) = (data.X(i, 0) + 0.5 * data.X(i, 1) >= 0.0 ? 27.0 : 0.0) + 3.0 * std::sin(4 * data.X(i, 1)) + e(rng);
    }
    return data;
}

Outcome jgp_reduction() {
    auto rng = make_stream({0xacce, 2});
    JgpConfig cfg;
    cfg.update_boundary = false;
    cfg.dummy_density = 0.0;
    double worst = 0.0;
    int not_all = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const Dataset data = step_dataset(60, rng);
        const Vector xs = uniform_points(1, 2, rng, -0.4, 0.4).row(0).transpose();
        const LocalSet local = select_neighborhood(data, xs, 15);
        const JgpModel m = fit_jgp(local, data, xs, cfg, rng);
        not_all += m.n_selected() != local.size();
        const Dataset sub = data.subset(local.indices);
        const GpFit fit = make_gp_fit(sub, m.kernel_star, m.sigma2_hat);
        const auto a = predict_jgp(m);
        const auto b = predict_gp(fit, sub, xs);
        worst = std::max({worst, rel_err(a.mean, b.mean), rel_err(a.var, b.var)});
    }
    return {worst <= 1e-10 && not_all == 0,
            "50 instances, max relative difference " + fmt("%.3g", worst) + ", not all selected: " + std::to_string(not_all)};
}

Outcome weight_identity() {
    auto rng = make_stream({0xacce, 3});
    double worst_mean = 0.0;
    double worst_sum = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const Dataset data = step_dataset(60, rng);
        const Vector xs = uniform_points(1, 2, rng, -0.4, 0.4).row(0).transpose();
        const JgpModel m = fit_jgp(select_neighborhood(data, xs, 15), data, xs, JgpConfig{}, rng);
        worst_mean = std::max(worst_mean, rel_err(predict_jgp_mean_expanded(m), predict_jgp(m).mean));
        worst_sum = std::max(worst_sum, std::abs(m.alpha.sum() - 1.0));
    }
    return {worst_mean <= 1e-10 && worst_sum <= 1e-12,
            "100 instances, mean mismatch " + fmt("%.3g", worst_mean) + ", |sum alpha - 1| " + fmt("%.3g", worst_sum)};
}

struct SurfaceData {
    GroundTruth gt;
    Dataset data;
};

// 441-grid surface with noisy training responses at random grid points.
SurfaceData surface_data(SurfaceKind kind, std::uint64_t seed, int training) {
    GroundTruth gt = make_fixed_surface(kind, seed);
    const PointMatrix grid = grid_points(gt.spec().domain, 21);
    RngStream pick = make_stream({seed, 0x7ab1e});
    std::vector<Eigen::Index> order(static_cast<std::size_t>(grid.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), pick);
    Dataset data;
    data.domain = gt.spec().domain;
    RngStream noise = make_stream({seed, 0x4015e});
    for (int i = 0; i < training; ++i) {
        const Vector x = grid.row(order[static_cast<std::size_t>(i)]).transpose();
        data.append(x, gt.observe(x, noise));
    }
    return {std::move(gt), std::move(data)};
}

Outcome variance_truncation() {
    int within = 0;
    int total = 0;
    double worst_full = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SurfaceData s = surface_data(SurfaceKind::kTwoRegionCurvy, 100 + seed, 120);
        const PointMatrix grid = grid_points(s.gt.spec().domain, 21);
        for (Eigen::Index t = 0; t < grid.rows(); ++t) {
            const Vector x = grid.row(t).transpose();
            if (s.gt.spec().boundary_distance(x) > 0.1) continue;
            // A grid point that is also a training input is not a test point.
            if (distance_to_set(x, s.data.X) == 0.0) continue;
            RngStream rng = make_stream({seed, 0x7c, static_cast<std::uint64_t>(t)});
            const JgpModel m = fit_jgp(select_neighborhood(s.data, x, 12), s.data, x, JgpConfig{}, rng);
            const double exact = variance_exhaustive(m);
            const double r0 = variance_truncated(m, 0);
            within += std::abs(r0 - exact) <= 0.15 * exact;
            ++total;
            worst_full = std::max(worst_full, std::abs(variance_truncated(m, 12) - exact) / exact);
        }
    }
    const double frac = static_cast<double>(within) / total;
    return {frac >= 0.9 && worst_full <= 1e-12,
            std::to_string(total) + " boundary points, R=0 within 15%: " + fmt("%.3f", frac) +
                ", R=n max relative difference " + fmt("%.3g", worst_full)};
}

Outcome flip_bound() {
    auto rng = make_stream({0xacce, 5});
    std::uniform_real_distribution<double> u(0.0, 0.1);
    long checked = 0;
    long violations = 0;
    for (int inst = 0; inst < 200; ++inst) {
        const int n = 4 + inst % 7;
        Vector p(n);
        std::vector<std::uint8_t> zhat(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const bool one = u(rng) < 0.05;
            p(i) = one ? 1.0 - u(rng) : u(rng);
            zhat[static_cast<std::size_t>(i)] = one;
        }
        const double p_hat = config_probability(p, zhat);
        std::vector<std::uint8_t> z(static_cast<std::size_t>(n));
        for (int mask = 0; mask < (1 << n); ++mask) {
            int r = 0;
            for (int i = 0; i < n; ++i) {
                z[static_cast<std::size_t>(i)] = zhat[static_cast<std::size_t>(i)] ^ static_cast<std::uint8_t>(mask >> i & 1);
                r += mask >> i & 1;
            }
            if (r > 3) continue;
            const double pz = config_probability(p, z);
            const double bound = std::pow(0.1 / 0.9, r);
            ++checked;
            violations += pz > bound * (1 + 1e-12) || pz > bound * p_hat * (1 + 1e-12);
        }
    }
    return {violations == 0, std::to_string(checked) + " labelings within 3 flips, violations: " + std::to_string(violations)};
}

Outcome bias_calibration() {
    bool pass = true;
    std::string detail;
    for (auto kind : {SurfaceKind::kTwoRegionCurvy, SurfaceKind::kFourRegion}) {
        CalibrationConfig cfg;
        cfg.surface = kind;
        cfg.replications = 10;
        cfg.master_seed = 2026;
        const auto rows = run_calibration(cfg);
        if (!g_out_dir.empty()) {
            std::ofstream f(g_out_dir + (kind == SurfaceKind::kFourRegion ? "/calibration_four.csv" : "/calibration_two.csv"));
            write_calibration_csv(f, rows);
        }
        double sum = 0.0;
        int count = 0;
        for (const auto& r : rows) {
            if (r.degree_of_mix > 2) continue;
            sum += r.bias_hat - r.bias_emp;
            ++count;
        }
        const double mean = count > 0 ? sum / count : NAN;
        pass = pass && count > 0 && mean >= -2.0 && mean <= 2.0;
        detail += std::string(kind == SurfaceKind::kFourRegion ? "four-region" : "two-region") + ": mean " +
                  fmt("%.4f", mean) + " over " + std::to_string(count) + " rows; ";
    }
    detail.resize(detail.size() - 2);
    return {pass, detail};
}

Vector final_rmse(const AlTrace& t, int reps) {
    Vector out = Vector::Constant(reps, NAN);
    for (const auto& r : t.rows) out(r.rep) = r.rmse;  // rows are in stage order per rep
    return out;
}

Outcome al_superiority() {
    std::map<Criterion, Vector> rmse;
    for (auto c : {Criterion::kMspe, Criterion::kVar, Criterion::kImspe, Criterion::kLhd}) {
        RunConfig cfg;
        cfg.criterion = c;
        cfg.d = 2;
        cfg.seed_design_size = 40;
        cfg.stages = 30;
        cfg.reps = 20;
        cfg.master_seed = 2026;
        cfg.eval_every = 30;
        const AlTrace t = run_active_learning(cfg);
        save_trace(to_string(c), t);
        if (t.error) return {false, to_string(c) + " run failed: " + *t.error};
        rmse[c] = final_rmse(t, cfg.reps);
    }
    auto compare = [&](Criterion a, Criterion b, bool& ok) {
        const double p = wilcoxon_signed_rank(rmse[a], rmse[b]);
        const double diff = (rmse[a] - rmse[b]).mean();
        ok = p < 0.05 && diff < 0.0;
        return to_string(a) + " " + fmt("%.4f", rmse[a].mean()) + " vs " + to_string(b) + " " +
               fmt("%.4f", rmse[b].mean()) + " (p=" + fmt("%.3g", p) + ")";
    };
    bool ok1 = false;
    bool ok2 = false;
    const std::string d1 = compare(Criterion::kMspe, Criterion::kVar, ok1);
    const std::string d2 = compare(Criterion::kImspe, Criterion::kLhd, ok2);
    return {ok1 && ok2, d1 + "; " + d2};
}

Outcome boundary_concentration() {
    const GroundTruth shape = make_fixed_surface(SurfaceKind::kTwoRegionCurvy, 0);
    std::map<Criterion, std::vector<double>> frac;
    for (auto c : {Criterion::kMspe, Criterion::kVar}) {
        RunConfig cfg;
        cfg.criterion = c;
        cfg.d = 2;
        cfg.source.kind = SourceKind::kTwoRegion;
        cfg.seed_design_size = 30;
        cfg.stages = 30;
        cfg.reps = 20;
        cfg.master_seed = 2026;
        cfg.eval_every = 30;
        const AlTrace t = run_active_learning(cfg);
        save_trace(std::string("boundary_") + to_string(c), t);
        if (t.error) return {false, to_string(c) + " run failed: " + *t.error};
        std::vector<int> near(20, 0);
        std::vector<int> count(20, 0);
        for (const auto& r : t.rows) {
            if (r.stage == 0) continue;
            ++count[static_cast<std::size_t>(r.rep)];
            near[static_cast<std::size_t>(r.rep)] += shape.spec().boundary_distance(r.x) <= 0.1;
        }
        for (int rep = 0; rep < 20; ++rep) {
            frac[c].push_back(static_cast<double>(near[static_cast<std::size_t>(rep)]) / count[static_cast<std::size_t>(rep)]);
        }
    }
    int wins = 0;
    double mean_m = 0.0;
    double mean_v = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        wins += frac[Criterion::kMspe][static_cast<std::size_t>(rep)] > frac[Criterion::kVar][static_cast<std::size_t>(rep)];
        mean_m += frac[Criterion::kMspe][static_cast<std::size_t>(rep)] / 20;
        mean_v += frac[Criterion::kVar][static_cast<std::size_t>(rep)] / 20;
    }
    return {wins >= 15, "MSPE fraction exceeds VAR in " + std::to_string(wins) + "/20 seeds (mean " +
                            fmt("%.3f", mean_m) + " vs " + fmt("%.3f", mean_v) + ")"};
}

Outcome determinism() {
    std::vector<RunConfig> configs;
    for (auto c : {Criterion::kMspe, Criterion::kImspe, Criterion::kVar, Criterion::kLhd}) {
        RunConfig cfg;
        cfg.criterion = c;
        cfg.seed_design_size = 15;
        cfg.stages = 3;
        cfg.n_candidates = 30;
        cfg.n_star = 10;
        cfg.test_size = 50;
        cfg.reps = 2;
        cfg.master_seed = 99;
        configs.push_back(cfg);
    }
    configs[0].batch_size = 2;
    RunConfig gp = configs[2];
    gp.surrogate = Surrogate::kGp;
    configs.push_back(gp);
    RunConfig four = configs[0];
    four.source.kind = SourceKind::kFourRegion;
    configs.push_back(four);

    int same = 0;
    for (const auto& cfg : configs) {
        std::ostringstream a;
        std::ostringstream b;
        write_trace_csv(a, run_active_learning(cfg));
        write_trace_csv(b, run_active_learning(cfg));
        same += a.str() == b.str();
    }
    return {same == static_cast<int>(configs.size()),
            std::to_string(same) + "/" + std::to_string(configs.size()) + " configurations byte-identical"};
}

Outcome neighborhood_update() {
    auto rng = make_stream({0xacce, 10});
    int mismatches = 0;
    for (int inst = 0; inst < 1000; ++inst) {
        const Eigen::Index d = 1 + inst % 4;
        const Eigen::Index N = 20 + inst % 60;
        const Eigen::Index n = 4 + inst % 17;
        Dataset data;
        data.domain = Domain::cube(d, -0.5, 0.5);
        data.X = uniform_points(N, d, rng);
        data.y = Vector::Zero(N);
        const Vector t = uniform_points(1, d, rng).row(0).transpose();
        const Vector xnew = uniform_points(1, d, rng).row(0).transpose();
        const LocalSet before = select_neighborhood(data, t, n);
        data.append(xnew, 0.0);
        std::vector<std::pair<double, Eigen::Index>> all;
        for (Eigen::Index i = 0; i <= N; ++i) all.emplace_back((data.point(i) - t).norm(), i);
        std::sort(all.begin(), all.end());
        const LocalSet got = update_neighborhood(before, xnew, N);
        bool ok = got.size() == static_cast<std::size_t>(n);
        for (Eigen::Index k = 0; ok && k < n; ++k) ok = got.indices[static_cast<std::size_t>(k)] == all[static_cast<std::size_t>(k)].second;
        mismatches += !ok;
    }
    return {mismatches == 0, "1000 instances, mismatches: " + std::to_string(mismatches)};
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap_from_env();
    const std::map<int, std::pair<const char*, std::function<Outcome()>>> checks{
        {1, {"GP oracle equivalence", gp_oracle}},
        {2, {"JGP reduction to local GP", jgp_reduction}},
        {3, {"mean weight identity", weight_identity}},
        {4, {"variance truncation", variance_truncation}},
        {5, {"flip bound", flip_bound}},
        {6, {"bias calibration", bias_calibration}},
        {7, {"AL superiority", al_superiority}},
        {8, {"boundary concentration", boundary_concentration}},
        {9, {"determinism", determinism}},
        {10, {"neighborhood update oracle", neighborhood_update}},
    };
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--out" && i + 1 < argc) {
            g_out_dir = argv[++i];
        } else {
            which.push_back(std::stoi(a));
        }
    }
    if (which.empty()) {
        for (const auto& [k, v] : checks) which.push_back(k);
    }
    int failed = 0;
    for (int k : which) {
        const auto it = checks.find(k);
        if (it == checks.end()) {
            std::fprintf(stderr, "unknown criterion %d\n", k);
            return 2;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = it->second.second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %2d %-28s %s  %s [%.1f s]\n", k, it->second.first, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), s);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
