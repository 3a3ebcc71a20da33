#pragma once

#include "mmreach/config.hpp"
#include "mmreach/oracle.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mmreach {

enum class Pipeline { Box, Parallelotope, Intersection, Union };

const char* to_string(Pipeline p) noexcept;

/// Which computation a config asks for: a union initial set reaches member by
/// member, a transform plan intersects, otherwise a box or a single
/// parallelotope is reached directly.
Pipeline pipeline_for(const ProblemConfig& cfg);

struct ReachOutcome {
    Pipeline pipeline = Pipeline::Box;
    Direction direction = Direction::Forward;
    std::vector<Box> boxes;
    std::vector<Parallelotope> parallelotopes;
    std::optional<Polygon2D> polygon;
    std::vector<double> area_curve;
    std::optional<VolumeEstimate> volume;

    /// Regions a sound result must contain every sampled endpoint in, each
    /// with a label for reports. `scale` shrinks or grows them about their
    /// centres (debugging aid for the audit itself).
    std::vector<std::pair<std::string, Region>> audit_regions(double scale = 1.0) const;
};

ReachOutcome run_reach(const ProblemConfig& cfg);

/// The decomposition the box pipeline builds (of -F for a backward spec).
Decomposition box_decomposition(const ProblemConfig& cfg);

} // namespace mmreach
