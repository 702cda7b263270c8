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
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "jgp/acquisition.hpp"
#include "jgp/benchgen.hpp"

namespace jgp {

enum class Surrogate { kJgp, kGp };

enum class SourceKind { kBgp, kTwoRegion, kFourRegion, kCsv };

std::string to_string(Surrogate s);
std::string to_string(SourceKind s);

struct DataSource {
    SourceKind kind = SourceKind::kBgp;
    /// Pool of labelled points for kCsv; acquisitions draw from the pool.
    std::string csv_path;
};

/// One field per configuration key. Zero sizes mean "use the default for d".
struct RunConfig {
    Surrogate surrogate = Surrogate::kJgp;
    Criterion criterion = Criterion::kMspe;
    int d = 2;
    int n_local = 15;
    int seed_design_size = 0;  // 20 d
    int stages = 50;
    int n_candidates = 0;      // 100 d
    int n_star = 0;            // 20 d
    int trunc_order = 0;
    int batch_size = 1;
    int reps = 1;
    std::uint64_t master_seed = 1;
    DataSource source{};
    /// Held-out points for synthetic sources without a grid (BGP).
    int test_size = 500;
    /// Metrics are computed every `eval_every` stages and always at the seed
    /// and final stages; other rows carry NaN.
    int eval_every = 1;
    /// Score NLPD against f instead of f + noise.
    bool nlpd_latent = false;
    /// Write measured wall time; otherwise elapsed_ms is 0 so traces are reproducible.
    bool record_timing = false;
    /// Size of the boundary-nearest subset of the test set (0 disables).
    int boundary_test_size = 0;
    BiasPairing bias_pairing = BiasPairing::kAsPrinted;
    int final_restarts = 5;
    int refit_final_restarts = 1;

    int resolved_seed_size() const { return seed_design_size > 0 ? seed_design_size : 20 * d; }
    int resolved_candidates() const { return n_candidates > 0 ? n_candidates : 100 * d; }
    int resolved_n_star() const { return n_star > 0 ? n_star : 20 * d; }
    void validate() const;
};

/// Parses JSON text; unknown keys and wrong types are errors.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_json(const RunConfig& config);

struct TraceRow {
    int rep = 0;
    int stage = 0;
    Eigen::Index n = 0;
    Criterion criterion = Criterion::kMspe;
    Vector x;                 // empty on the seed row
    double y_obs = std::numeric_limits<double>::quiet_NaN();
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double nlpd = std::numeric_limits<double>::quiet_NaN();
    double elapsed_ms = 0.0;
};

struct AlTrace {
    std::vector<TraceRow> rows;
    /// (rep, stage, RMSE on the boundary subset) when enabled.
    std::vector<std::tuple<int, int, double>> boundary_rmse;
    std::optional<std::string> error;
};

/// Every rep in order; reps run concurrently when threads are available.
AlTrace run_active_learning(const RunConfig& config);
AlTrace run_rep(const RunConfig& config, int rep);

extern const char* const kTraceHeader;
void write_trace_csv(std::ostream& out, const AlTrace& trace);
AlTrace read_trace_csv(std::istream& in);

double rmse(const Vector& predictions, const Vector& truth);
/// Mean of 0.5 log(2 pi (v_i + noise)) + (t_i - m_i)^2 / (2 (v_i + noise)).
double nlpd(const Vector& means, const Vector& vars, const Vector& truth, double noise_var);

/// Two-sided paired test. Zero differences are dropped; exact for at most 12
/// remaining pairs, normal approximation with continuity and tie correction above.
double wilcoxon_signed_rank(const Vector& a, const Vector& b);

/// Mean RMSE / NLPD per (label, stage) and the final-stage p-value matrix.
/// Rows are labelled by criterion unless one label per trace is given.
struct Report {
    struct Line {
        std::string criterion;
        int stage = 0;
        Eigen::Index n = 0;
        int reps = 0;
        double rmse_mean = 0.0;
        double rmse_sd = 0.0;
        double nlpd_mean = 0.0;
    };
    std::vector<Line> summary;
    std::vector<std::string> criteria;
    Matrix p_values;  // row beats column when the row's RMSE is lower
    Matrix rmse_diff; // mean final RMSE of row minus column
};

Report make_report(const std::vector<AlTrace>& traces, const std::vector<std::string>& labels = {});
void write_report_summary_csv(std::ostream& out, const Report& report);
void write_report_pvalues_csv(std::ostream& out, const Report& report);

struct CalibrationConfig {
    SurfaceKind surface = SurfaceKind::kFourRegion;
    int replications = 10;
    int training_size = 120;
    int grid_per_dim = 21;
    int n_local = 20;
    std::uint64_t master_seed = 1;
    BiasPairing bias_pairing = BiasPairing::kAsPrinted;
};

struct CalibrationRow {
    int rep = 0;
    Vector x;
    int degree_of_mix = 1;
    double bias_hat = 0.0;
    double bias_emp = 0.0;
    double var_hat = 0.0;
    double var_ref = 0.0;  // exhaustive for n <= 14, else truncated at order 2
    double error = 0.0;    // mu_J - f(x*)
};

/// Grid / random-training replication: per grid location, the plug-in bias
/// next to the bias the same linear weights give on the noiseless truth.
std::vector<CalibrationRow> run_calibration(const CalibrationConfig& config);
void write_calibration_csv(std::ostream& out, const std::vector<CalibrationRow>& rows);

/// Thread cap from JGP_NUM_THREADS, applied to OpenMP when set.
void apply_thread_cap_from_env();

}  // namespace jgp
