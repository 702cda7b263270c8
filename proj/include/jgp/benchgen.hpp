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

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jgp/jump_gp.hpp"

namespace jgp {

enum class PartitionKind {
    /// Region 0 is {a'x >= 0}, region 1 its complement.
    kHyperplane,
    /// Region 0 lies below the curve x2 = 0.15 sin(2 pi x1), region 1 above.
    kCurvyTwoRegion,
    /// Quadrants split at x1 = 0 and x2 = 0; region = [x1 >= 0] + 2 [x2 >= 0].
    kQuadrants,
};

struct PartitionSpec {
    PartitionKind kind = PartitionKind::kHyperplane;
    Vector normal;                      // a, hyperplane only
    std::vector<double> region_means;
    KernelSpec kernel;
    double noise_sd = 2.0;
    Domain domain;

    int region_count() const;
    int region_of(const PointRef& x) const;
    /// Euclidean distance from x to the nearest region boundary inside the domain.
    double boundary_distance(const PointRef& x) const;
    void validate() const;
};

/// Per-region GP realizations, drawn lazily by sequential conditioning.
/// Not thread safe: every query may extend the conditioning set.
class GroundTruth {
public:
    GroundTruth(PartitionSpec spec, std::uint64_t seed);

    const PartitionSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }
    int region_of(const PointRef& x) const { return spec_.region_of(x); }

    /// Noiseless f(x). Repeated queries at the same x return the same value.
    double latent(const PointRef& x);
    /// f(x) plus N(0, noise_sd^2) from `noise`.
    double observe(const PointRef& x, RngStream& noise);

    std::size_t conditioned_count(int region) const;

    /// Relative nugget kept on the conditioning set for numerical stability.
    static constexpr double kNugget = 1e-6;

private:
    struct Region {
        double mean = 0.0;
        std::vector<Vector> points;
        std::vector<double> values;
        std::vector<std::vector<double>> L;  // rows of the lower Cholesky factor
        std::vector<double> w;               // L^{-1} (values - mean)
        std::map<std::vector<double>, double> seen;
        RngStream rng;
    };

    double draw(Region& r, const PointRef& x);

    PartitionSpec spec_;
    std::uint64_t seed_;
    std::vector<Region> regions_;
};

double truth_eval(GroundTruth& gt, const PointRef& x, bool noisy, RngStream& noise);

/// Two-region partitioned GP on [-0.5, 0.5]^d with a random hyperplane
/// a in {-1, 1}^d: means {0, 13}, kernel 9 SE(0.1 d), noise sd 2.
GroundTruth sample_bgp_function(int d, std::uint64_t seed);

enum class SurfaceKind { kTwoRegionCurvy, kFourRegion };

/// [-0.5, 0.5]^2 with kernel 9 exp(-|x - x'|^2 / 200) and noise sd 2.
GroundTruth make_fixed_surface(SurfaceKind kind, std::uint64_t seed);

/// Number of distinct true regions among the local points.
int degree_of_mix(const GroundTruth& gt, const LocalSet& local, const Dataset& data);

/// Header x1..xd,y and an optional region column.
void write_dataset_csv(std::ostream& out, const Dataset& data,
                       const std::vector<int>* regions = nullptr);
/// Reads x1..xd,y[,region]. The domain is set to the bounding box of the inputs
/// unless given.
Dataset read_dataset_csv(std::istream& in, std::optional<Domain> domain = std::nullopt,
                         std::vector<int>* regions = nullptr);

std::string format_double(double v);

}  // namespace jgp
