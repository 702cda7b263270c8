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

#include "jgp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "jgp/design.hpp"

namespace jgp {

namespace {

enum Stream : std::uint64_t {
    kTruthStream = 11,
    kTestStream = 12,
    kSeedStream = 13,
    kQuadStream = 14,
    kNoiseStream = 15,
    kCandidateStream = 16,
    kAcquireStream = 17,
    kMetricStream = 18,
    kGpStream = 19,
};

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Where responses come from, plus the held-out set used for metrics.
class Source {
public:
    virtual ~Source() = default;
    virtual const Domain& domain() const = 0;
    virtual PointMatrix seed_design(Eigen::Index n, RngStream& rng) = 0;
    virtual double observe(const PointRef& x, RngStream& noise) = 0;
    /// Candidate points for one stage.
    virtual CandidateSet candidates(Eigen::Index n, RngStream& rng, const Dataset& data, int stage,
                                    std::uint64_t seed) = 0;

    PointMatrix test_points;
    Vector test_truth;
    std::vector<Eigen::Index> boundary_subset;
};

class SyntheticSource : public Source {
public:
    SyntheticSource(GroundTruth gt, const RunConfig& config, RngStream& test_rng) : gt_(std::move(gt)) {
        if (config.source.kind == SourceKind::kBgp) {
            test_points = maximin_lhd(config.test_size, domain(), test_rng);
        } else {
            test_points = grid_points(domain(), 21);
        }
        // Truth at the test set is drawn first so it is shared across criteria.
        test_truth.resize(test_points.rows());
        for (Eigen::Index t = 0; t < test_points.rows(); ++t) test_truth(t) = gt_.latent(test_points.row(t).transpose());
        if (config.boundary_test_size > 0) {
            std::vector<std::pair<double, Eigen::Index>> order;
            for (Eigen::Index t = 0; t < test_points.rows(); ++t) {
                order.emplace_back(gt_.spec().boundary_distance(test_points.row(t).transpose()), t);
            }
            std::sort(order.begin(), order.end());
            const auto k = std::min<std::size_t>(static_cast<std::size_t>(config.boundary_test_size), order.size());
            for (std::size_t i = 0; i < k; ++i) boundary_subset.push_back(order[i].second);
        }
    }

    const Domain& domain() const override { return gt_.spec().domain; }

    PointMatrix seed_design(Eigen::Index n, RngStream& rng) override { return maximin_lhd(n, domain(), rng); }

    double observe(const PointRef& x, RngStream& noise) override { return gt_.observe(x, noise); }

    CandidateSet candidates(Eigen::Index n, RngStream& rng, const Dataset& data, int stage,
                            std::uint64_t seed) override {
        return gen_candidates(domain(), n, rng, &data.X, stage, seed);
    }

private:
    GroundTruth gt_;
};

// Pool of labelled rows; acquisitions pick unused rows.
class PoolSource : public Source {
public:
    explicit PoolSource(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("csv source: cannot open " + path);
        pool_ = read_dataset_csv(in);
        used_.assign(static_cast<std::size_t>(pool_.size()), false);
        test_points = pool_.X;
        test_truth = pool_.y;
    }

    const Domain& domain() const override { return pool_.domain; }

    PointMatrix seed_design(Eigen::Index n, RngStream& rng) override {
        if (n > pool_.size()) throw std::invalid_argument("csv source: seed design larger than the pool");
        const PointMatrix target = maximin_lhd(n, domain(), rng);
        PointMatrix out(n, pool_.dim());
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index r = 0; r < pool_.size(); ++r) {
                if (used_[static_cast<std::size_t>(r)]) continue;
                const double dd = (pool_.X.row(r) - target.row(i)).squaredNorm();
                if (dd < best_d) {
                    best_d = dd;
                    best = r;
                }
            }
            out.row(i) = pool_.X.row(best);
            used_[static_cast<std::size_t>(best)] = true;
        }
        return out;
    }

    double observe(const PointRef& x, RngStream&) override {
        for (Eigen::Index r = 0; r < pool_.size(); ++r) {
            if ((pool_.X.row(r).transpose() - x).squaredNorm() == 0.0) {
                used_[static_cast<std::size_t>(r)] = true;
                return pool_.y(r);
            }
        }
        throw std::runtime_error("csv source: queried point is not in the pool");
    }

    CandidateSet candidates(Eigen::Index n, RngStream& rng, const Dataset&, int stage,
                            std::uint64_t seed) override {
        std::vector<Eigen::Index> free;
        for (Eigen::Index r = 0; r < pool_.size(); ++r) {
            if (!used_[static_cast<std::size_t>(r)]) free.push_back(r);
        }
        if (free.empty()) throw std::runtime_error("csv source: pool exhausted");
        if (static_cast<Eigen::Index>(free.size()) > n) {
            std::shuffle(free.begin(), free.end(), rng);
            free.resize(static_cast<std::size_t>(n));
            std::sort(free.begin(), free.end());
        }
        CandidateSet cs;
        cs.stage = stage;
        cs.seed = seed;
        cs.points.resize(static_cast<Eigen::Index>(free.size()), pool_.dim());
        for (std::size_t i = 0; i < free.size(); ++i) cs.points.row(static_cast<Eigen::Index>(i)) = pool_.X.row(free[i]);
        return cs;
    }

private:
    Dataset pool_;
    std::vector<bool> used_;
};

std::unique_ptr<Source> make_source(const RunConfig& c, int rep) {
    RngStream test_rng = make_stream({c.master_seed, static_cast<std::uint64_t>(rep), kTestStream});
    const std::uint64_t truth_seed = make_stream({c.master_seed, static_cast<std::uint64_t>(rep), kTruthStream})();
    switch (c.source.kind) {
        case SourceKind::kBgp:
            return std::make_unique<SyntheticSource>(sample_bgp_function(c.d, truth_seed), c, test_rng);
        case SourceKind::kTwoRegion:
            return std::make_unique<SyntheticSource>(make_fixed_surface(SurfaceKind::kTwoRegionCurvy, truth_seed), c,
                                                     test_rng);
        case SourceKind::kFourRegion:
            return std::make_unique<SyntheticSource>(make_fixed_surface(SurfaceKind::kFourRegion, truth_seed), c,
                                                     test_rng);
        case SourceKind::kCsv:
            return std::make_unique<PoolSource>(c.source.csv_path);
    }
    throw std::invalid_argument("unknown source");
}

struct Metrics {
    double rmse = kNaN;
    double nlpd = kNaN;
    double boundary_rmse = kNaN;
};

class Rep {
public:
    Rep(const RunConfig& config, int rep) : c_(config), rep_(rep) {
        seed_ = make_stream({c_.master_seed, static_cast<std::uint64_t>(rep_), kAcquireStream})();
        acq_.n_local = c_.n_local;
        acq_.trunc_order = c_.trunc_order;
        acq_.jgp.final_restarts = c_.final_restarts;
        acq_.refit.final_restarts = c_.refit_final_restarts;
        acq_.uq.pairing = c_.bias_pairing;
    }

    void run(AlTrace& trace) {
        const auto t0 = Clock::now();
        source_ = make_source(c_, rep_);
        data_.domain = source_->domain();
        if (data_.domain.dim() != c_.d) throw std::invalid_argument("source dimension differs from config d");

        const auto u_rep = static_cast<std::uint64_t>(rep_);
        RngStream seed_rng = make_stream({c_.master_seed, u_rep, kSeedStream});
        const PointMatrix X0 = source_->seed_design(c_.resolved_seed_size(), seed_rng);
        for (Eigen::Index i = 0; i < X0.rows(); ++i) {
            RngStream noise = make_stream({c_.master_seed, u_rep, kNoiseStream, 0, static_cast<std::uint64_t>(i)});
            const Vector x = X0.row(i).transpose();
            data_.append(x, source_->observe(x, noise));
        }
        RngStream quad_rng = make_stream({c_.master_seed, u_rep, kQuadStream});
        quad_ = maximin_lhd(c_.resolved_n_star(), data_.domain, quad_rng);

        TraceRow seed_row;
        seed_row.rep = rep_;
        seed_row.stage = 0;
        seed_row.n = data_.size();
        seed_row.criterion = c_.criterion;
        const Metrics m0 = evaluate(0);
        seed_row.rmse = m0.rmse;
        seed_row.nlpd = m0.nlpd;
        seed_row.elapsed_ms = elapsed(t0);
        trace.rows.push_back(seed_row);
        if (!source_->boundary_subset.empty()) trace.boundary_rmse.emplace_back(rep_, 0, m0.boundary_rmse);

        for (int stage = 1; stage <= c_.stages; ++stage) {
            const auto ts = Clock::now();
            const auto u_stage = static_cast<std::uint64_t>(stage);
            RngStream cand_rng = make_stream({c_.master_seed, u_rep, kCandidateStream, u_stage});
            const CandidateSet cs =
                source_->candidates(c_.resolved_candidates(), cand_rng, data_, stage, seed_);
            const std::vector<Vector> picks = choose(cs, stage);

            std::vector<TraceRow> rows;
            for (std::size_t k = 0; k < picks.size(); ++k) {
                RngStream noise = make_stream({c_.master_seed, u_rep, kNoiseStream, u_stage, k});
                const double y = source_->observe(picks[k], noise);
                data_.append(picks[k], y);
                TraceRow row;
                row.rep = rep_;
                row.stage = stage;
                row.criterion = c_.criterion;
                row.x = picks[k];
                row.y_obs = y;
                rows.push_back(row);
            }
            const bool eval = stage % c_.eval_every == 0 || stage == c_.stages;
            const Metrics m = eval ? evaluate(stage) : Metrics{};
            for (auto& row : rows) {
                row.n = data_.size();
                row.rmse = m.rmse;
                row.nlpd = m.nlpd;
                row.elapsed_ms = elapsed(ts);
                trace.rows.push_back(row);
            }
            if (eval && !source_->boundary_subset.empty()) trace.boundary_rmse.emplace_back(rep_, stage, m.boundary_rmse);
        }
    }

private:
    double elapsed(Clock::time_point t0) const {
        if (!c_.record_timing) return 0.0;
        return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    }

    GpFit fit_global_gp(const Dataset& data, int stage, std::uint64_t purpose) const {
        RngStream rng = make_stream({seed_, static_cast<std::uint64_t>(stage), kGpStream, purpose});
        GpFitOptions opt;
        return fit_gp(data, HyperBounds::defaults(data), opt, rng);
    }

    std::vector<Vector> choose(const CandidateSet& cs, int stage) {
        const int k = std::min<int>(c_.batch_size, static_cast<int>(cs.size()));
        std::vector<Vector> out;
        if (c_.criterion == Criterion::kLhd) {
            // Passive growth: farthest candidate, then the next farthest given the picks.
            Dataset shadow = data_;
            std::vector<bool> taken(static_cast<std::size_t>(cs.size()), false);
            for (int p = 0; p < k; ++p) {
                Eigen::Index best = -1;
                double best_d = -1.0;
                for (Eigen::Index i = 0; i < cs.size(); ++i) {
                    if (taken[static_cast<std::size_t>(i)]) continue;
                    const double dd = distance_to_set(cs.points.row(i).transpose(), shadow.X);
                    if (dd > best_d) {
                        best_d = dd;
                        best = i;
                    }
                }
                taken[static_cast<std::size_t>(best)] = true;
                out.emplace_back(cs.points.row(best).transpose());
                shadow.append(out.back(), 0.0);
            }
            return out;
        }
        if (c_.surrogate == Surrogate::kGp) {
            Dataset shadow = data_;
            CandidateSet remaining = cs;
            for (int p = 0; p < k; ++p) {
                const GpFit fit = fit_global_gp(shadow, stage, static_cast<std::uint64_t>(p) + 1);
                const AcquisitionScore s = c_.criterion == Criterion::kVar
                                               ? acquire_gp_var(fit, shadow, remaining)
                                               : acquire_gp_alc(fit, shadow, remaining, quad_);
                out.push_back(s.candidate);
                shadow.append(s.candidate, predict_gp(fit, shadow, s.candidate).mean);
                PointMatrix rest(remaining.size() - 1, remaining.points.cols());
                for (Eigen::Index i = 0, r = 0; i < remaining.size(); ++i) {
                    if (i != s.candidate_index) rest.row(r++) = remaining.points.row(i);
                }
                remaining.points = std::move(rest);
                if (remaining.size() == 0) break;
            }
            return out;
        }
        AlState state{data_, acq_, seed_, stage};
        if (k == 1) {
            out.push_back(acquire(state, c_.criterion, cs, quad_).candidate);
        } else {
            for (auto& s : acquire_batch(state, cs, k, c_.criterion, quad_).picks) out.push_back(s.candidate);
        }
        return out;
    }

    Metrics evaluate(int stage) const {
        const PointMatrix& T = source_->test_points;
        const Eigen::Index m = T.rows();
        Vector mean(m);
        Vector var(m);
        Vector noise(m);
        if (c_.surrogate == Surrogate::kGp) {
            const GpFit fit = fit_global_gp(data_, stage, 0);
            for (Eigen::Index t = 0; t < m; ++t) {
                const auto p = predict_gp(fit, data_, T.row(t).transpose());
                mean(t) = p.mean;
                var(t) = p.var;
                noise(t) = fit.sigma2_hat;
            }
        } else {
            const Eigen::Index n = std::min<Eigen::Index>(c_.n_local, data_.size());
            std::vector<std::string> errors(static_cast<std::size_t>(m));
            auto one = [&](Eigen::Index t) {
                try {
                    const Vector x = T.row(t).transpose();
                    RngStream rng = make_stream({seed_, static_cast<std::uint64_t>(stage), kMetricStream,
                                                 static_cast<std::uint64_t>(t)});
                    const JgpModel model = fit_jgp(select_neighborhood(data_, x, n), data_, x, acq_.jgp, rng);
                    const auto p = predict_jgp(model);
                    mean(t) = p.mean;
                    var(t) = p.var;
                    noise(t) = model.sigma2_hat;
                } catch (const std::exception& e) {
                    errors[static_cast<std::size_t>(t)] = e.what();
                }
            };
#pragma omp parallel for schedule(dynamic)
            for (Eigen::Index t = 0; t < m; ++t) one(t);
            for (const auto& e : errors) {
                if (!e.empty()) throw std::runtime_error("metric fit failed: " + e);
            }
        }
        Metrics out;
        out.rmse = rmse(mean, source_->test_truth);
        const Vector pv = c_.nlpd_latent ? var : Vector(var + noise);
        out.nlpd = nlpd(mean, pv, source_->test_truth, 0.0);
        const auto& sub = source_->boundary_subset;
        if (!sub.empty()) {
            Vector a(static_cast<Eigen::Index>(sub.size()));
            Vector b(a.size());
            for (std::size_t i = 0; i < sub.size(); ++i) {
                a(static_cast<Eigen::Index>(i)) = mean(sub[i]);
                b(static_cast<Eigen::Index>(i)) = source_->test_truth(sub[i]);
            }
            out.boundary_rmse = rmse(a, b);
        }
        return out;
    }

    const RunConfig& c_;
    int rep_;
    std::uint64_t seed_ = 0;
    AcquisitionConfig acq_;
    std::unique_ptr<Source> source_;
    Dataset data_;
    PointMatrix quad_;
};

}  // namespace

AlTrace run_rep(const RunConfig& config, int rep) {
    config.validate();
    AlTrace trace;
    try {
        Rep r(config, rep);
        r.run(trace);
    } catch (const std::exception& e) {
        trace.error = "rep " + std::to_string(rep) + ": " + e.what();
    }
    return trace;
}

AlTrace run_active_learning(const RunConfig& config) {
    config.validate();
    std::vector<AlTrace> per_rep(static_cast<std::size_t>(config.reps));
#pragma omp parallel for schedule(dynamic) if (config.reps > 1)
    for (int r = 0; r < config.reps; ++r) per_rep[static_cast<std::size_t>(r)] = run_rep(config, r);
    AlTrace out;
    for (auto& t : per_rep) {
        out.rows.insert(out.rows.end(), t.rows.begin(), t.rows.end());
        out.boundary_rmse.insert(out.boundary_rmse.end(), t.boundary_rmse.begin(), t.boundary_rmse.end());
        if (t.error && !out.error) out.error = t.error;
    }
    return out;
}

void apply_thread_cap_from_env() {
    const char* v = std::getenv("JGP_NUM_THREADS");
    if (!v || !*v) return;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) throw std::invalid_argument("JGP_NUM_THREADS must be a positive integer");
#ifdef _OPENMP
    omp_set_num_threads(static_cast<int>(n));
#endif
}

}  // namespace jgp
