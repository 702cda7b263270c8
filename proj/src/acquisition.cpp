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

#include "jgp/acquisition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "jgp/design.hpp"

namespace jgp {

namespace {

enum Purpose : std::uint64_t {
    kScorePurpose = 1,
    kBaselinePurpose = 2,
    kImputePurpose = 3,
    kRefitPurpose = 4,
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Eigen::Index local_size(const AlState& state) {
    return std::min<Eigen::Index>(state.config.n_local, state.data.size());
}

std::optional<PredictionRecord> fit_and_score(const AlState& state, const PointRef& x,
                                              const JgpConfig& cfg, bool include_bias,
                                              RngStream rng) {
    try {
        const LocalSet local = select_neighborhood(state.data, x, local_size(state));
        const JgpModel model = fit_jgp(local, state.data, x, cfg, rng);
        UqOptions uq = state.config.uq;
        uq.include_bias = uq.include_bias && include_bias;
        return estimate_mspe(model, state.config.trunc_order, uq);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// Lowest index wins ties; NaN entries are skipped.
template <class Better>
Eigen::Index pick_best(const std::vector<double>& values, Better better) {
    Eigen::Index best = -1;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (std::isnan(v)) continue;
        if (best < 0 || better(v, values[static_cast<std::size_t>(best)])) best = static_cast<Eigen::Index>(i);
    }
    return best;
}

AcquisitionScore make_score(const CandidateSet& cs, Eigen::Index idx, Criterion c, double value,
                            Clock::time_point t0) {
    AcquisitionScore s;
    s.candidate_index = idx;
    s.candidate = cs.points.row(idx).transpose();
    s.criterion = c;
    s.value = value;
    s.elapsed_ms = ms_since(t0);
    return s;
}

void require_candidates(const CandidateSet& cs) {
    if (cs.size() < 1) throw std::invalid_argument("acquisition: candidate set is empty");
}

AcquisitionScore acquire_pointwise(const AlState& state, const CandidateSet& candidates, Criterion c) {
    require_candidates(candidates);
    const auto t0 = Clock::now();
    const auto recs = score_points(state, candidates.points, state.config.execution);
    std::vector<double> values(recs.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (recs[i]) values[i] = c == Criterion::kMspe ? recs[i]->mspe_hat : recs[i]->var_hat;
    }
    const Eigen::Index best = pick_best(values, std::greater<>());
    if (best < 0) throw AcquisitionError("acquisition: every candidate fit failed");
    return make_score(candidates, best, c, values[static_cast<std::size_t>(best)], t0);
}

AcquisitionScore acquire_integrated(const AlState& state, const CandidateSet& candidates,
                                    const PointMatrix& test_points, Criterion c) {
    require_candidates(candidates);
    if (test_points.rows() < 1) throw std::invalid_argument("acquisition: no quadrature points");
    if (state.config.imputation != Imputation::kPredictiveMean) {
        throw std::logic_error("acquisition: sampled imputation is not implemented");
    }
    const auto t0 = Clock::now();
    const bool bias = c == Criterion::kImspe;
    const ImspeBaseline baseline = make_imspe_baseline(state, test_points, bias, state.config.execution);
    const auto n = candidates.size();
    std::vector<double> values(static_cast<std::size_t>(n));
    auto one = [&](Eigen::Index i) {
        values[static_cast<std::size_t>(i)] =
            delta_imspe(state, baseline, candidates.points.row(i).transpose(), static_cast<std::uint64_t>(i)).value;
    };
    if (state.config.execution == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
        for (Eigen::Index i = 0; i < n; ++i) one(i);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) one(i);
    }
    const Eigen::Index best = pick_best(values, std::less<>());
    if (best < 0 || !std::isfinite(values[static_cast<std::size_t>(best)])) {
        throw AcquisitionError("acquisition: every candidate scored +inf");
    }
    return make_score(candidates, best, c, values[static_cast<std::size_t>(best)], t0);
}

}  // namespace

std::string to_string(Criterion c) {
    switch (c) {
        case Criterion::kMspe: return "MSPE";
        case Criterion::kImspe: return "IMSPE";
        case Criterion::kVar: return "VAR";
        case Criterion::kAlc: return "ALC";
        case Criterion::kLhd: return "LHD";
    }
    return "?";
}

Criterion parse_criterion(const std::string& name) {
    for (auto c : {Criterion::kMspe, Criterion::kImspe, Criterion::kVar, Criterion::kAlc, Criterion::kLhd}) {
        if (to_string(c) == name) return c;
    }
    throw std::invalid_argument("unknown criterion '" + name + "'");
}

CandidateSet gen_candidates(const Domain& domain, Eigen::Index n_candidates, RngStream& rng,
                            const PointMatrix* existing, int stage, std::uint64_t seed) {
    if (n_candidates < 1) throw std::invalid_argument("gen_candidates: need at least one candidate");
    CandidateSet cs;
    cs.stage = stage;
    cs.seed = seed;
    PointMatrix U = maximin_lhd(n_candidates, domain.dim(), rng);
    const double tol = 1e-9 * std::max(domain.diagonal(), 1e-300);
    cs.points.resize(n_candidates, domain.dim());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double width = 1.0 / static_cast<double>(n_candidates);
    for (Eigen::Index i = 0; i < n_candidates; ++i) {
        Vector x = domain.from_unit(U.row(i).transpose());
        for (int attempt = 0; existing && attempt < 100 && distance_to_set(x, *existing) < tol; ++attempt) {
            Vector u = U.row(i).transpose();
            for (Eigen::Index c = 0; c < u.size(); ++c) {
                const double lo = std::floor(u(c) / width) * width;
                u(c) = lo + unit(rng) * width;
            }
            x = domain.from_unit(u);
        }
        cs.points.row(i) = x.transpose();
    }
    return cs;
}

std::vector<std::optional<PredictionRecord>> score_points(const AlState& state, const PointMatrix& points,
                                                          Execution execution) {
    const Eigen::Index n = points.rows();
    std::vector<std::optional<PredictionRecord>> out(static_cast<std::size_t>(n));
    auto one = [&](Eigen::Index i) {
        out[static_cast<std::size_t>(i)] =
            fit_and_score(state, points.row(i).transpose(), state.config.jgp, true,
                          make_stream({state.seed, static_cast<std::uint64_t>(state.stage), kScorePurpose,
                                       static_cast<std::uint64_t>(i)}));
    };
    if (execution == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
        for (Eigen::Index i = 0; i < n; ++i) one(i);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) one(i);
    }
    return out;
}

AcquisitionScore acquire_max_mspe(const AlState& state, const CandidateSet& candidates) {
    return acquire_pointwise(state, candidates, Criterion::kMspe);
}

AcquisitionScore acquire_max_var(const AlState& state, const CandidateSet& candidates) {
    return acquire_pointwise(state, candidates, Criterion::kVar);
}

LocalSet update_neighborhood(const LocalSet& local, const PointRef& xnew, Eigen::Index new_index) {
    if (local.size() == 0) throw std::invalid_argument("update_neighborhood: empty neighborhood");
    const double dist = (xnew - local.center).norm();
    if (dist >= local.radius) return local;
    LocalSet out;
    out.center = local.center;
    out.indices = local.indices;
    out.distances = local.distances;
    out.indices.pop_back();
    out.distances.pop_back();
    // The new row has the largest index, so it goes after equal distances.
    const auto pos = std::upper_bound(out.distances.begin(), out.distances.end(), dist);
    const auto k = pos - out.distances.begin();
    out.distances.insert(pos, dist);
    out.indices.insert(out.indices.begin() + k, new_index);
    out.radius = out.distances.back();
    return out;
}

ImspeBaseline make_imspe_baseline(const AlState& state, const PointMatrix& test_points,
                                  bool include_bias, Execution execution) {
    ImspeBaseline b;
    b.test_points = test_points;
    b.include_bias = include_bias;
    const Eigen::Index m = test_points.rows();
    b.local.resize(static_cast<std::size_t>(m));
    b.before.assign(static_cast<std::size_t>(m), std::numeric_limits<double>::quiet_NaN());
    auto one = [&](Eigen::Index t) {
        const Vector x = test_points.row(t).transpose();
        auto& local = b.local[static_cast<std::size_t>(t)];
        local = select_neighborhood(state.data, x, local_size(state));
        const auto rec = fit_and_score(state, x, state.config.refit, include_bias,
                                       make_stream({state.seed, static_cast<std::uint64_t>(state.stage),
                                                    kBaselinePurpose, static_cast<std::uint64_t>(t)}));
        if (rec) b.before[static_cast<std::size_t>(t)] = include_bias ? rec->mspe_hat : rec->var_hat;
    };
    if (execution == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic)
        for (Eigen::Index t = 0; t < m; ++t) one(t);
    } else {
        for (Eigen::Index t = 0; t < m; ++t) one(t);
    }
    return b;
}

DeltaImspe delta_imspe(const AlState& state, const ImspeBaseline& baseline, const PointRef& xnew,
                       std::uint64_t candidate_key) {
    DeltaImspe out;
    const Eigen::Index m = baseline.test_points.rows();
    std::vector<Eigen::Index> affected;
    for (Eigen::Index t = 0; t < m; ++t) {
        const auto& local = baseline.local[static_cast<std::size_t>(t)];
        if ((xnew - local.center).norm() < local.radius) affected.push_back(t);
    }
    out.affected = static_cast<int>(affected.size());
    if (affected.empty()) return out;

    const auto stage = static_cast<std::uint64_t>(state.stage);
    double y_new = 0.0;
    try {
        RngStream rng = make_stream({state.seed, stage, kImputePurpose, candidate_key});
        const LocalSet local = select_neighborhood(state.data, xnew, local_size(state));
        y_new = predict_jgp(fit_jgp(local, state.data, xnew, state.config.refit, rng)).mean;
    } catch (const std::exception&) {
        out.value = std::numeric_limits<double>::infinity();
        out.failed = out.affected;
        return out;
    }
    out.y_imputed = y_new;

    Dataset augmented = state.data;
    augmented.append(xnew, y_new);
    const Eigen::Index new_index = augmented.size() - 1;
    UqOptions uq = state.config.uq;
    uq.include_bias = uq.include_bias && baseline.include_bias;

    double sum = 0.0;
    for (auto t : affected) {
        const double before = baseline.before[static_cast<std::size_t>(t)];
        if (std::isnan(before)) {
            ++out.failed;
            continue;
        }
        const Vector x = baseline.test_points.row(t).transpose();
        try {
            const LocalSet local = update_neighborhood(baseline.local[static_cast<std::size_t>(t)], xnew, new_index);
            RngStream rng = make_stream({state.seed, stage, kRefitPurpose, candidate_key, static_cast<std::uint64_t>(t)});
            const JgpModel model = fit_jgp(local, augmented, x, state.config.refit, rng);
            const auto rec = estimate_mspe(model, state.config.trunc_order, uq);
            sum += (baseline.include_bias ? rec.mspe_hat : rec.var_hat) - before;
        } catch (const std::exception&) {
            ++out.failed;
        }
    }
    if (2 * out.failed > out.affected) {
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }
    out.value = sum / static_cast<double>(m);
    return out;
}

AcquisitionScore acquire_min_imspe(const AlState& state, const CandidateSet& candidates,
                                   const PointMatrix& test_points) {
    return acquire_integrated(state, candidates, test_points, Criterion::kImspe);
}

AcquisitionScore acquire_alc(const AlState& state, const CandidateSet& candidates,
                             const PointMatrix& test_points) {
    return acquire_integrated(state, candidates, test_points, Criterion::kAlc);
}

AcquisitionScore acquire_space_filling(const Dataset& data, const CandidateSet& candidates) {
    require_candidates(candidates);
    const auto t0 = Clock::now();
    std::vector<double> values(static_cast<std::size_t>(candidates.size()));
    for (Eigen::Index i = 0; i < candidates.size(); ++i) {
        values[static_cast<std::size_t>(i)] = distance_to_set(candidates.points.row(i).transpose(), data.X);
    }
    const Eigen::Index best = pick_best(values, std::greater<>());
    return make_score(candidates, best, Criterion::kLhd, values[static_cast<std::size_t>(best)], t0);
}

AcquisitionScore acquire(const AlState& state, Criterion criterion, const CandidateSet& candidates,
                         const PointMatrix& test_points) {
    switch (criterion) {
        case Criterion::kMspe: return acquire_max_mspe(state, candidates);
        case Criterion::kVar: return acquire_max_var(state, candidates);
        case Criterion::kImspe: return acquire_min_imspe(state, candidates, test_points);
        case Criterion::kAlc: return acquire_alc(state, candidates, test_points);
        case Criterion::kLhd: return acquire_space_filling(state.data, candidates);
    }
    throw std::invalid_argument("acquire: unknown criterion");
}

BatchResult acquire_batch(const AlState& state, const CandidateSet& candidates, int k,
                          Criterion criterion, const PointMatrix& test_points) {
    if (k < 1) throw std::invalid_argument("acquire_batch: k must be at least 1");
    if (k > candidates.size()) throw std::invalid_argument("acquire_batch: k exceeds the candidate count");
    BatchResult out;
    AlState shadow = state;
    std::vector<Eigen::Index> remaining(static_cast<std::size_t>(candidates.size()));
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = static_cast<Eigen::Index>(i);

    for (int pick = 0; pick < k; ++pick) {
        CandidateSet cs;
        cs.stage = candidates.stage;
        cs.seed = candidates.seed;
        cs.points.resize(static_cast<Eigen::Index>(remaining.size()), candidates.points.cols());
        for (std::size_t r = 0; r < remaining.size(); ++r) {
            cs.points.row(static_cast<Eigen::Index>(r)) = candidates.points.row(remaining[r]);
        }
        AcquisitionScore s = acquire(shadow, criterion, cs, test_points);
        const auto local_pos = static_cast<std::size_t>(s.candidate_index);
        s.candidate_index = remaining[local_pos];
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(local_pos));

        RngStream rng = make_stream({state.seed, static_cast<std::uint64_t>(state.stage), kImputePurpose,
                                     0xba7c4ULL, static_cast<std::uint64_t>(pick)});
        const LocalSet local = select_neighborhood(shadow.data, s.candidate, local_size(shadow));
        const double y_imp = predict_jgp(fit_jgp(local, shadow.data, s.candidate, shadow.config.jgp, rng)).mean;
        out.imputed.push_back(y_imp);
        shadow.data.append(s.candidate, y_imp);
        out.picks.push_back(std::move(s));
    }
    return out;
}

AcquisitionScore acquire_gp_var(const GpFit& fit, const Dataset& data, const CandidateSet& candidates) {
    require_candidates(candidates);
    const auto t0 = Clock::now();
    std::vector<double> values(static_cast<std::size_t>(candidates.size()));
    for (Eigen::Index i = 0; i < candidates.size(); ++i) {
        values[static_cast<std::size_t>(i)] = predict_gp(fit, data, candidates.points.row(i).transpose()).var;
    }
    const Eigen::Index best = pick_best(values, std::greater<>());
    return make_score(candidates, best, Criterion::kVar, values[static_cast<std::size_t>(best)], t0);
}

AcquisitionScore acquire_gp_alc(const GpFit& fit, const Dataset& data, const CandidateSet& candidates,
                                const PointMatrix& test_points) {
    require_candidates(candidates);
    if (test_points.rows() < 1) throw std::invalid_argument("acquire_gp_alc: no quadrature points");
    const auto t0 = Clock::now();
    const auto& L = fit.chol.llt.matrixL();
    // Posterior covariance cov_N(t, x) = k(t, x) - v_t' v_x with v = L^{-1} k(X, .).
    const Matrix Vt = L.solve(cross_cov(data.X, test_points, fit.kernel));
    const Matrix Vc = L.solve(cross_cov(data.X, candidates.points, fit.kernel));
    const Matrix Ktc = cross_cov(test_points, candidates.points, fit.kernel);
    const Matrix post = Ktc - Vt.transpose() * Vc;
    std::vector<double> values(static_cast<std::size_t>(candidates.size()));
    for (Eigen::Index i = 0; i < candidates.size(); ++i) {
        const double var_x = std::max(fit.kernel.signal_variance - Vc.col(i).squaredNorm(),
                                      kVarianceFloor * fit.kernel.signal_variance);
        const double reduction = post.col(i).squaredNorm() / (var_x + fit.sigma2_hat);
        values[static_cast<std::size_t>(i)] = -reduction / static_cast<double>(test_points.rows());
    }
    const Eigen::Index best = pick_best(values, std::less<>());
    return make_score(candidates, best, Criterion::kAlc, values[static_cast<std::size_t>(best)], t0);
}

}  // namespace jgp
