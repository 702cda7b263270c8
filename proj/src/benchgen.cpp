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

#include "jgp/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace jgp {

namespace {

constexpr double kCurveAmplitude = 0.15;

double curve(double x1) { return kCurveAmplitude * std::sin(2.0 * std::numbers::pi * x1); }

// Distance from (x1, x2) to the graph of the curve over [lo, hi].
double curve_distance(double x1, double x2, double lo, double hi) {
    auto d2 = [&](double t) {
        const double a = t - x1;
        const double b = curve(t) - x2;
        return a * a + b * b;
    };
    constexpr int kGrid = 2000;
    double best_t = lo;
    double best = d2(lo);
    for (int k = 1; k <= kGrid; ++k) {
        const double t = lo + (hi - lo) * k / kGrid;
        const double v = d2(t);
        if (v < best) {
            best = v;
            best_t = t;
        }
    }
    // Golden-section polish inside the neighbouring grid cells.
    const double h = (hi - lo) / kGrid;
    double a = std::max(lo, best_t - h);
    double b = std::min(hi, best_t + h);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    for (int it = 0; it < 60; ++it) {
        if (d2(c) < d2(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    return std::sqrt(std::min(best, d2(0.5 * (a + b))));
}

}  // namespace

int PartitionSpec::region_count() const {
    switch (kind) {
        case PartitionKind::kHyperplane:
        case PartitionKind::kCurvyTwoRegion:
            return 2;
        case PartitionKind::kQuadrants:
            return 4;
    }
    return 0;
}

void PartitionSpec::validate() const {
    if (static_cast<int>(region_means.size()) != region_count()) {
        throw std::invalid_argument("PartitionSpec: region_means length does not match region count");
    }
    kernel.validate();
    if (!(noise_sd >= 0.0)) throw std::invalid_argument("PartitionSpec: noise_sd must be nonnegative");
    if (kind == PartitionKind::kHyperplane && normal.size() != domain.dim()) {
        throw std::invalid_argument("PartitionSpec: hyperplane normal has wrong dimension");
    }
    if (kind != PartitionKind::kHyperplane && domain.dim() != 2) {
        throw std::invalid_argument("PartitionSpec: curvy and quadrant partitions are two-dimensional");
    }
}

int PartitionSpec::region_of(const PointRef& x) const {
    switch (kind) {
        case PartitionKind::kHyperplane:
            return normal.dot(x) >= 0.0 ? 0 : 1;
        case PartitionKind::kCurvyTwoRegion:
            return x(1) >= curve(x(0)) ? 1 : 0;
        case PartitionKind::kQuadrants:
            return (x(0) >= 0.0 ? 1 : 0) + (x(1) >= 0.0 ? 2 : 0);
    }
    return 0;
}

double PartitionSpec::boundary_distance(const PointRef& x) const {
    switch (kind) {
        case PartitionKind::kHyperplane:
            return std::abs(normal.dot(x)) / normal.norm();
        case PartitionKind::kCurvyTwoRegion:
            return curve_distance(x(0), x(1), domain.lower(0), domain.upper(0));
        case PartitionKind::kQuadrants:
            return std::min(std::abs(x(0)), std::abs(x(1)));
    }
    return 0.0;
}

GroundTruth::GroundTruth(PartitionSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
    spec_.validate();
    for (int r = 0; r < spec_.region_count(); ++r) {
        Region region;
        region.mean = spec_.region_means[static_cast<std::size_t>(r)];
        region.rng = make_stream({seed, 0x7275746855ULL, static_cast<std::uint64_t>(r)});
        regions_.push_back(std::move(region));
    }
}

std::size_t GroundTruth::conditioned_count(int region) const {
    return regions_.at(static_cast<std::size_t>(region)).points.size();
}

double GroundTruth::draw(Region& r, const PointRef& x) {
    std::vector<double> key(x.data(), x.data() + x.size());
    if (auto it = r.seen.find(key); it != r.seen.end()) return it->second;

    const std::size_t m = r.points.size();
    const double s2 = spec_.kernel.signal_variance;
    const double nugget = kNugget * s2;
    // v = L^{-1} k(P, x); conditional mean m + v'w, variance s2 + nugget - |v|^2.
    std::vector<double> v(m);
    double vv = 0.0;
    double vw = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double s = se_kernel(r.points[i], x, spec_.kernel);
        const auto& row = r.L[i];
        for (std::size_t k = 0; k < i; ++k) s -= row[k] * v[k];
        v[i] = s / row[i];
        vv += v[i] * v[i];
        vw += v[i] * r.w[i];
    }
    const double var = std::max(s2 + nugget - vv, nugget);
    const double sd = std::sqrt(var);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double z = normal(r.rng);
    const double value = r.mean + vw + sd * z;

    v.push_back(sd);
    r.L.push_back(std::move(v));
    r.w.push_back(z);
    r.points.emplace_back(x);
    r.values.push_back(value);
    r.seen.emplace(std::move(key), value);
    return value;
}

double GroundTruth::latent(const PointRef& x) {
    if (x.size() != spec_.domain.dim()) throw std::invalid_argument("GroundTruth: point has wrong dimension");
    return draw(regions_[static_cast<std::size_t>(spec_.region_of(x))], x);
}

double GroundTruth::observe(const PointRef& x, RngStream& noise) {
    const double f = latent(x);
    std::normal_distribution<double> normal(0.0, spec_.noise_sd);
    return f + normal(noise);
}

double truth_eval(GroundTruth& gt, const PointRef& x, bool noisy, RngStream& noise) {
    return noisy ? gt.observe(x, noise) : gt.latent(x);
}

GroundTruth sample_bgp_function(int d, std::uint64_t seed) {
    if (d < 2 || d > 5) throw std::invalid_argument("sample_bgp_function: d must be in 2..5");
    auto rng = make_stream({seed, 0x626770ULL});
    std::bernoulli_distribution coin(0.5);
    PartitionSpec spec;
    spec.kind = PartitionKind::kHyperplane;
    spec.normal.resize(d);
    for (int c = 0; c < d; ++c) spec.normal(c) = coin(rng) ? 1.0 : -1.0;
    spec.region_means = {0.0, 13.0};
    spec.kernel = KernelSpec::isotropic(9.0, 0.1 * d);
    spec.noise_sd = 2.0;
    spec.domain = Domain::cube(d, -0.5, 0.5);
    return GroundTruth(std::move(spec), seed);
}

GroundTruth make_fixed_surface(SurfaceKind kind, std::uint64_t seed) {
    PartitionSpec spec;
    spec.domain = Domain::cube(2, -0.5, 0.5);
    // exp(-r^2 / 200) is the SE kernel with lengthscale 10.
    spec.kernel = KernelSpec::isotropic(9.0, 10.0);
    spec.noise_sd = 2.0;
    if (kind == SurfaceKind::kTwoRegionCurvy) {
        spec.kind = PartitionKind::kCurvyTwoRegion;
        spec.region_means = {0.0, 27.0};
    } else {
        spec.kind = PartitionKind::kQuadrants;
        spec.region_means = {0.0, 27.0, 54.0, 81.0};
    }
    return GroundTruth(std::move(spec), seed);
}

int degree_of_mix(const GroundTruth& gt, const LocalSet& local, const Dataset& data) {
    std::set<int> regions;
    for (auto i : local.indices) regions.insert(gt.region_of(data.X.row(i).transpose()));
    return static_cast<int>(regions.size());
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_dataset_csv(std::ostream& out, const Dataset& data, const std::vector<int>* regions) {
    if (regions && static_cast<Eigen::Index>(regions->size()) != data.size()) {
        throw std::invalid_argument("write_dataset_csv: region labels and rows differ in count");
    }
    for (Eigen::Index c = 0; c < data.dim(); ++c) out << 'x' << (c + 1) << ',';
    out << 'y';
    if (regions) out << ",region";
    out << '\n';
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index c = 0; c < data.dim(); ++c) out << format_double(data.X(i, c)) << ',';
        out << format_double(data.y(i));
        if (regions) out << ',' << (*regions)[static_cast<std::size_t>(i)];
        out << '\n';
    }
}

Dataset read_dataset_csv(std::istream& in, std::optional<Domain> domain, std::vector<int>* regions) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("dataset CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
    }
    Eigen::Index d = 0;
    while (d < static_cast<Eigen::Index>(cols.size()) &&
           cols[static_cast<std::size_t>(d)] == "x" + std::to_string(d + 1)) {
        ++d;
    }
    const bool has_region = cols.size() == static_cast<std::size_t>(d) + 2 && cols.back() == "region";
    if (d == 0 || cols.size() < static_cast<std::size_t>(d) + 1 || cols[static_cast<std::size_t>(d)] != "y" ||
        (cols.size() != static_cast<std::size_t>(d) + 1 && !has_region)) {
        throw std::invalid_argument("dataset CSV: header must be x1..xd,y[,region]");
    }

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> row;
        while (std::getline(ss, tok, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw std::invalid_argument("dataset CSV: bad number on line " + std::to_string(lineno));
            }
        }
        if (row.size() != cols.size()) {
            throw std::invalid_argument("dataset CSV: wrong field count on line " + std::to_string(lineno));
        }
        if (has_region) {
            labels.push_back(static_cast<int>(row.back()));
            row.pop_back();
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("dataset CSV: no data rows");

    Dataset data;
    data.X.resize(static_cast<Eigen::Index>(rows.size()), d);
    data.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto i = static_cast<Eigen::Index>(r);
        for (Eigen::Index c = 0; c < d; ++c) data.X(i, c) = rows[r][static_cast<std::size_t>(c)];
        data.y(i) = rows[r][static_cast<std::size_t>(d)];
    }
    if (domain) {
        data.domain = *domain;
    } else {
        data.domain = Domain{data.X.colwise().minCoeff().transpose(), data.X.colwise().maxCoeff().transpose()};
    }
    data.validate();
    if (regions) *regions = std::move(labels);
    return data;
}

}  // namespace jgp
