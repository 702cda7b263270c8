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

// Command-line front end: gen, run, report, calibrate.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "jgp/design.hpp"
#include "jgp/harness.hpp"

namespace {

using namespace jgp;

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot write " + path);
    return file;
}

GroundTruth make_truth(const std::string& source, int d, std::uint64_t seed) {
    if (source == "bgp") return sample_bgp_function(d, seed);
    if (d != 2) throw std::invalid_argument("fixed surfaces are two-dimensional");
    if (source == "two_region") return make_fixed_surface(SurfaceKind::kTwoRegionCurvy, seed);
    if (source == "four_region") return make_fixed_surface(SurfaceKind::kFourRegion, seed);
    throw std::invalid_argument("unknown source '" + source + "'");
}

std::string truth_metadata(const GroundTruth& gt, const std::string& source, const std::string& design, int n) {
    const auto& s = gt.spec();
    nlohmann::json j;
    j["source"] = source;
    j["seed"] = gt.seed();
    j["design"] = design;
    j["n"] = n;
    j["region_means"] = s.region_means;
    j["signal_variance"] = s.kernel.signal_variance;
    j["lengthscale"] = s.kernel.lengthscale;
    j["noise_sd"] = s.noise_sd;
    j["domain_lower"] = std::vector<double>(s.domain.lower.data(), s.domain.lower.data() + s.domain.dim());
    j["domain_upper"] = std::vector<double>(s.domain.upper.data(), s.domain.upper.data() + s.domain.dim());
    if (s.kind == PartitionKind::kHyperplane) {
        j["partition"] = "hyperplane";
        j["normal"] = std::vector<double>(s.normal.data(), s.normal.data() + s.normal.size());
    } else if (s.kind == PartitionKind::kCurvyTwoRegion) {
        j["partition"] = "curve x2 = 0.15 sin(2 pi x1)";
    } else {
        j["partition"] = "quadrants";
    }
    return j.dump(2);
}

int cmd_gen(const std::string& source, int d, int n, std::uint64_t seed, const std::string& design, bool latent,
            const std::string& out_path, const std::string& meta_path) {
    GroundTruth gt = make_truth(source, d, seed);
    const Domain& domain = gt.spec().domain;
    PointMatrix X;
    if (design == "grid") {
        if (domain.dim() != 2) throw std::invalid_argument("grid design needs d = 2");
        X = grid_points(domain, n);
    } else if (design == "lhd") {
        RngStream rng = make_stream({seed, 31});
        X = maximin_lhd(n, domain, rng);
    } else {
        throw std::invalid_argument("design must be lhd or grid");
    }
    Dataset data;
    data.domain = domain;
    std::vector<int> regions;
    RngStream noise = make_stream({seed, 32});
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Vector x = X.row(i).transpose();
        data.append(x, truth_eval(gt, x, !latent, noise));
        regions.push_back(gt.region_of(x));
    }
    std::ofstream file;
    write_dataset_csv(open_out(out_path, file), data, &regions);
    if (!meta_path.empty()) {
        std::ofstream meta(meta_path);
        if (!meta) throw std::runtime_error("cannot write " + meta_path);
        meta << truth_metadata(gt, source, design, static_cast<int>(X.rows())) << '\n';
    }
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_path, const std::string& boundary_path) {
    const RunConfig config = load_run_config(config_path);
    const AlTrace trace = run_active_learning(config);
    std::ofstream file;
    write_trace_csv(open_out(out_path, file), trace);
    if (!boundary_path.empty()) {
        std::ofstream b(boundary_path);
        if (!b) throw std::runtime_error("cannot write " + boundary_path);
        b << "rep,stage,boundary_rmse\n";
        for (const auto& [rep, stage, v] : trace.boundary_rmse) b << rep << ',' << stage << ',' << format_double(v) << '\n';
    }
    if (trace.error) {
        std::cerr << "jgp run: " << *trace.error << '\n';
        return 2;
    }
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& summary_path, const std::string& pvalue_path) {
    std::vector<AlTrace> traces;
    std::vector<std::string> labels;
    bool any_label = false;
    for (const auto& arg : inputs) {
        std::string label;
        std::string path = arg;
        if (const auto eq = arg.find('='); eq != std::string::npos) {
            label = arg.substr(0, eq);
            path = arg.substr(eq + 1);
            any_label = true;
        }
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read " + path);
        traces.push_back(read_trace_csv(in));
        if (label.empty() && !traces.back().rows.empty()) label = to_string(traces.back().rows.front().criterion);
        labels.push_back(label);
    }
    const Report report = make_report(traces, any_label ? labels : std::vector<std::string>{});
    std::ofstream f1;
    write_report_summary_csv(open_out(summary_path, f1), report);
    if (!pvalue_path.empty()) {
        std::ofstream f2(pvalue_path);
        if (!f2) throw std::runtime_error("cannot write " + pvalue_path);
        write_report_pvalues_csv(f2, report);
    } else {
        std::cout << '\n';
        write_report_pvalues_csv(std::cout, report);
    }
    return 0;
}

int cmd_calibrate(const std::string& surface, int reps, int n_local, std::uint64_t seed, const std::string& out_path) {
    CalibrationConfig c;
    if (surface == "four_region") {
        c.surface = SurfaceKind::kFourRegion;
    } else if (surface == "two_region") {
        c.surface = SurfaceKind::kTwoRegionCurvy;
    } else {
        throw std::invalid_argument("surface must be two_region or four_region");
    }
    c.replications = reps;
    c.n_local = n_local;
    c.master_seed = seed;
    std::ofstream file;
    write_calibration_csv(open_out(out_path, file), run_calibration(c));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jump GP surrogates and active learning"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "Emit a synthetic dataset CSV and truth metadata");
    std::string gen_source = "bgp";
    std::string gen_design = "lhd";
    std::string gen_out;
    std::string gen_meta;
    int gen_d = 2;
    int gen_n = 100;
    std::uint64_t gen_seed = 1;
    bool gen_latent = false;
    gen->add_option("--source", gen_source, "bgp, two_region or four_region");
    gen->add_option("--d", gen_d, "Input dimension");
    gen->add_option("--n", gen_n, "Design size (points per axis for a grid)");
    gen->add_option("--design", gen_design, "lhd or grid");
    gen->add_option("--seed", gen_seed, "Truth seed");
    gen->add_flag("--latent", gen_latent, "Write noiseless responses");
    gen->add_option("-o,--out", gen_out, "Output CSV (default stdout)");
    gen->add_option("--meta", gen_meta, "Write truth metadata JSON here");

    auto* run = app.add_subcommand("run", "Run an active-learning experiment");
    std::string run_config;
    std::string run_out;
    std::string run_boundary;
    run->add_option("config", run_config, "RunConfig JSON file")->required();
    run->add_option("-o,--out", run_out, "Trace CSV (default stdout)");
    run->add_option("--boundary-out", run_boundary, "Boundary-subset RMSE CSV");

    auto* report = app.add_subcommand("report", "Summarize traces and compute paired Wilcoxon p-values");
    std::vector<std::string> report_in;
    std::string report_summary;
    std::string report_pvalues;
    report->add_option("traces", report_in, "Trace CSVs, optionally LABEL=path")->required();
    report->add_option("--summary", report_summary, "Summary CSV (default stdout)");
    report->add_option("--pvalues", report_pvalues, "p-value CSV (default stdout)");

    auto* cal = app.add_subcommand("calibrate", "Grid bias/variance calibration");
    std::string cal_surface = "four_region";
    std::string cal_out;
    int cal_reps = 10;
    int cal_n = 20;
    std::uint64_t cal_seed = 1;
    cal->add_option("--surface", cal_surface, "two_region or four_region");
    cal->add_option("--reps", cal_reps, "Replications");
    cal->add_option("--n-local", cal_n, "Local neighborhood size");
    cal->add_option("--seed", cal_seed, "Master seed");
    cal->add_option("-o,--out", cal_out, "Output CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);
    try {
        apply_thread_cap_from_env();
        if (*gen) return cmd_gen(gen_source, gen_d, gen_n, gen_seed, gen_design, gen_latent, gen_out, gen_meta);
        if (*run) return cmd_run(run_config, run_out, run_boundary);
        if (*report) return cmd_report(report_in, report_summary, report_pvalues);
        if (*cal) return cmd_calibrate(cal_surface, cal_reps, cal_n, cal_seed, cal_out);
    } catch (const std::exception& e) {
        std::cerr << "jgp: error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
