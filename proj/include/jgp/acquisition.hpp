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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jgp/uq.hpp"

namespace jgp {

enum class Criterion { kMspe, kImspe, kVar, kAlc, kLhd };

std::string to_string(Criterion c);
/// Accepts the names produced by to_string ("MSPE", "IMSPE", "VAR", "ALC", "LHD").
Criterion parse_criterion(const std::string& name);

class AcquisitionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Execution { kSerial, kParallel };

enum class Imputation {
    /// y_new = mu_J(x_new).
    kPredictiveMean,
    /// Independent draws of y_new; not implemented.
    kSampled,
};

struct AcquisitionConfig {
    Eigen::Index n_local = 15;
    int trunc_order = 0;
    /// Fits at candidate locations.
    JgpConfig jgp{};
    /// Fits inside delta_imspe, before and after adding a candidate, and the
    /// imputation fit. Fewer restarts than `jgp` by default.
    JgpConfig refit = [] {
        JgpConfig c;
        c.final_restarts = 1;
        return c;
    }();
    UqOptions uq{};
    Imputation imputation = Imputation::kPredictiveMean;
    Execution execution = Execution::kParallel;
};

/// Immutable snapshot scored by the criteria. Random streams are keyed by
/// (seed, stage, purpose, index) so results do not depend on evaluation order.
struct AlState {
    Dataset data;
    AcquisitionConfig config{};
    std::uint64_t seed = 0;
    int stage = 0;
};

struct CandidateSet {
    PointMatrix points;
    int stage = 0;
    std::uint64_t seed = 0;

    Eigen::Index size() const { return points.rows(); }
};

struct AcquisitionScore {
    Eigen::Index candidate_index = -1;
    Vector candidate;
    Criterion criterion = Criterion::kMspe;
    double value = 0.0;
    double elapsed_ms = 0.0;
};

/// Maximin LHD over the domain. Candidates closer than 1e-9 (relative to the
/// domain diagonal) to a row of `existing` are redrawn inside their LHD cell.
CandidateSet gen_candidates(const Domain& domain, Eigen::Index n_candidates, RngStream& rng,
                            const PointMatrix* existing = nullptr, int stage = 0,
                            std::uint64_t seed = 0);

/// Fits a JGP at every point and returns its MSPE record; entries are empty
/// where the fit failed.
std::vector<std::optional<PredictionRecord>> score_points(const AlState& state,
                                                          const PointMatrix& points,
                                                          Execution execution);

AcquisitionScore acquire_max_mspe(const AlState& state, const CandidateSet& candidates);
AcquisitionScore acquire_max_var(const AlState& state, const CandidateSet& candidates);

/// Neighborhood of local.center after adding xnew as dataset row `new_index`.
LocalSet update_neighborhood(const LocalSet& local, const PointRef& xnew, Eigen::Index new_index);

/// Per-test-point neighborhoods and MSPE (or variance) before any addition.
struct ImspeBaseline {
    PointMatrix test_points;
    std::vector<LocalSet> local;
    std::vector<double> before;  // NaN where the fit failed
    bool include_bias = true;
};

ImspeBaseline make_imspe_baseline(const AlState& state, const PointMatrix& test_points,
                                  bool include_bias, Execution execution);

struct DeltaImspe {
    double value = 0.0;  // +inf when more than half the refits failed
    int affected = 0;
    int failed = 0;
    double y_imputed = 0.0;
};

/// Average over all test points of [after - before] with x_new added at the
/// imputed response; unaffected test points contribute exactly 0.
DeltaImspe delta_imspe(const AlState& state, const ImspeBaseline& baseline, const PointRef& xnew,
                       std::uint64_t candidate_key = 0);

AcquisitionScore acquire_min_imspe(const AlState& state, const CandidateSet& candidates,
                                   const PointMatrix& test_points);
/// acquire_min_imspe with the bias term left out of the integrand.
AcquisitionScore acquire_alc(const AlState& state, const CandidateSet& candidates,
                             const PointMatrix& test_points);

/// Candidate farthest from the existing inputs.
AcquisitionScore acquire_space_filling(const Dataset& data, const CandidateSet& candidates);

AcquisitionScore acquire(const AlState& state, Criterion criterion, const CandidateSet& candidates,
                         const PointMatrix& test_points);

struct BatchResult {
    std::vector<AcquisitionScore> picks;  // indices refer to the original candidate set
    std::vector<double> imputed;          // mu_J at each pick, used by later picks
};

/// k single-point acquisitions; after each pick, (x, mu_J(x)) joins a shadow
/// dataset and the candidate is removed.
BatchResult acquire_batch(const AlState& state, const CandidateSet& candidates, int k,
                          Criterion criterion, const PointMatrix& test_points);

/// Stationary GP comparators: largest predictive variance, and largest
/// average variance reduction over the test points.
AcquisitionScore acquire_gp_var(const GpFit& fit, const Dataset& data, const CandidateSet& candidates);
AcquisitionScore acquire_gp_alc(const GpFit& fit, const Dataset& data, const CandidateSet& candidates,
                                const PointMatrix& test_points);

}  // namespace jgp
