#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace mmreach {

/// Objective over a box; receives a full-length point.
using BoxObjective = std::function<double(std::span<const double>)>;

struct BoxOptimizerOptions {
    /// Grid points per free coordinate in the dense-search stage.
    int grid_points = 9;
    /// Coordinate tolerance of the descent refinement.
    double tolerance = 1e-8;
    int max_sweeps = 100;
    /// Derivatives with |g| <= sign_tolerance * max(1, |f|) count as zero.
    double sign_tolerance = 1e-9;
    /// Largest number of free coordinates accepted by the dense grid.
    int max_free_dims = 6;
};

/// Counters for diagnosing which optimizer stage resolved a query.
struct BoxOptimizerStats {
    std::uint64_t corner = 0;
    std::uint64_t search = 0;
};

/// Minimum (or maximum) of `f` over the box [lo, hi]; coordinates with
/// lo == hi are fixed.
///
/// Stage 1 probes finite-difference signs of every free coordinate at the
/// 3^k grid {lo, mid, hi}^k. When each coordinate keeps one sign the extremum
/// sits at the induced corner and is returned exactly. Otherwise stage 2 runs
/// a dense grid followed by coordinate descent with Brent line searches,
/// comparing bracket endpoints so boundary extrema are also exact.
double box_extremum(const BoxObjective& f, std::span<const double> lo, std::span<const double> hi, bool minimize,
                    const BoxOptimizerOptions& opts = {}, BoxOptimizerStats* stats = nullptr);

} // namespace mmreach
