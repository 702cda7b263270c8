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

#include <algorithm>
#include <numeric>
#include <ostream>

#include "jgp/design.hpp"
#include "jgp/harness.hpp"

namespace jgp {

namespace {

// mu_J is linear in the selected responses: mu_J = w'y with w = beta + alpha (1 - sum beta).
Vector mean_weights(const JgpModel& model) {
    return model.beta + model.alpha * (1.0 - model.beta.sum());
}

}  // namespace

std::vector<CalibrationRow> run_calibration(const CalibrationConfig& config) {
    if (config.replications < 1 || config.training_size < 4 || config.grid_per_dim < 2 || config.n_local < 4) {
        throw std::invalid_argument("run_calibration: invalid configuration");
    }
    std::vector<CalibrationRow> out;
    const auto surface_key = static_cast<std::uint64_t>(config.surface == SurfaceKind::kFourRegion ? 4 : 2);
    for (int rep = 0; rep < config.replications; ++rep) {
        const auto u_rep = static_cast<std::uint64_t>(rep);
        GroundTruth gt(make_fixed_surface(config.surface, make_stream({config.master_seed, u_rep, surface_key, 21})()));
        const PointMatrix grid = grid_points(gt.spec().domain, config.grid_per_dim);
        const Eigen::Index m = grid.rows();
        if (config.training_size > m) throw std::invalid_argument("run_calibration: training set larger than grid");
        Vector f(m);
        for (Eigen::Index t = 0; t < m; ++t) f(t) = gt.latent(grid.row(t).transpose());

        RngStream pick = make_stream({config.master_seed, u_rep, surface_key, 22});
        std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::shuffle(order.begin(), order.end(), pick);
        order.resize(static_cast<std::size_t>(config.training_size));
        std::sort(order.begin(), order.end());

        Dataset data;
        data.domain = gt.spec().domain;
        Vector f_train(config.training_size);
        RngStream noise = make_stream({config.master_seed, u_rep, surface_key, 23});
        for (std::size_t i = 0; i < order.size(); ++i) {
            const Vector x = grid.row(order[i]).transpose();
            data.append(x, gt.observe(x, noise));
            f_train(static_cast<Eigen::Index>(i)) = f(order[i]);
        }

        std::vector<CalibrationRow> rows(static_cast<std::size_t>(m));
        std::vector<bool> ok(static_cast<std::size_t>(m), false);
        const Eigen::Index n = std::min<Eigen::Index>(config.n_local, data.size());
#pragma omp parallel for schedule(dynamic)
        for (Eigen::Index t = 0; t < m; ++t) {
            try {
                const Vector x = grid.row(t).transpose();
                RngStream rng = make_stream({config.master_seed, u_rep, surface_key, 24, static_cast<std::uint64_t>(t)});
                const LocalSet local = select_neighborhood(data, x, n);
                const JgpModel model = fit_jgp(local, data, x, JgpConfig{}, rng);
                CalibrationRow& row = rows[static_cast<std::size_t>(t)];
                row.rep = rep;
                row.x = x;
                row.degree_of_mix = degree_of_mix(gt, local, data);
                row.bias_hat = estimate_bias(model, config.bias_pairing);
                const Vector w = mean_weights(model);
                double fit_on_truth = 0.0;
                for (std::size_t a = 0; a < model.selected.size(); ++a) {
                    const auto pos = static_cast<std::size_t>(model.selected[a]);
                    fit_on_truth += w(static_cast<Eigen::Index>(a)) * f_train(local.indices[pos]);
                }
                row.bias_emp = fit_on_truth - f(t);
                row.var_hat = predict_jgp(model).var;
                row.var_ref = model.n_local() <= kMaxExhaustiveLocal ? variance_exhaustive(model)
                                                                     : variance_truncated(model, 2);
                row.error = predict_jgp(model).mean - f(t);
                ok[static_cast<std::size_t>(t)] = true;
            } catch (const std::exception&) {
            }
        }
        for (Eigen::Index t = 0; t < m; ++t) {
            if (ok[static_cast<std::size_t>(t)]) out.push_back(std::move(rows[static_cast<std::size_t>(t)]));
        }
    }
    return out;
}

void write_calibration_csv(std::ostream& out, const std::vector<CalibrationRow>& rows) {
    out << "rep";
    const Eigen::Index d = rows.empty() ? 2 : rows.front().x.size();
    for (Eigen::Index c = 0; c < d; ++c) out << ",x" << (c + 1);
    out << ",degree_of_mix,bias_hat,bias_emp,var_hat,var_ref,error\n";
    for (const auto& r : rows) {
        out << r.rep;
        for (Eigen::Index c = 0; c < r.x.size(); ++c) out << ',' << format_double(r.x(c));
        out << ',' << r.degree_of_mix << ',' << format_double(r.bias_hat) << ',' << format_double(r.bias_emp) << ','
            << format_double(r.var_hat) << ',' << format_double(r.var_ref) << ',' << format_double(r.error) << '\n';
    }
}

}  // namespace jgp
