#pragma once

#include "mmreach/decomp.hpp"
#include "mmreach/embed.hpp"
#include "mmreach/multiorder.hpp"
#include "mmreach/oracle.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mmreach {

enum class InitialKind { Box, Parallelotope, Vertices, Union };

const char* to_string(InitialKind k) noexcept;

struct InitialSetConfig {
    InitialKind kind = InitialKind::Box;
    std::optional<Box> box;
    std::optional<Parallelotope> parallelotope;
    /// Vertex polytope (convex hull of these points).
    std::vector<Vector> points;
    UnionInitialSet union_set;

    /// Points whose convex hull is the set; used to fit transform plans.
    std::vector<Vector> vertex_list() const;
    /// The set in the form the sampler accepts.
    InitialSet sampling_set() const;
};

struct ProblemConfig {
    std::string name;
    SystemPtr system;
    InitialSetConfig initial;
    ReachSpec spec;
    DecompositionSpec decomp;
    std::optional<TransformPlan> plan;
    /// "rotations" when the plan came from the default family.
    std::string plan_family;
    SampleConfig sampling;
    /// Occupancy-area grid cell; occupancy is reported by verify when set.
    std::optional<double> occupancy_cell;
    /// Search box for backward witnesses (backward verify only).
    std::optional<Box> witness_search;
    std::filesystem::path output_dir = "out";
};

/// Parses and validates a config document. Every error names the offending
/// JSON path. Expression errors surface as ExpressionError, singular shapes
/// as GeometryError, everything else as ConfigError or DimensionError.
ProblemConfig parse_config(const nlohmann::json& doc, const std::string& fallback_name = "problem");

/// Reads `path` and parses it; the file stem is the default problem name.
ProblemConfig load_config(const std::filesystem::path& path);

/// A number or a constant expression such as "cos(2*pi/3)".
double parse_scalar(const nlohmann::json& v, const std::string& where);

} // namespace mmreach
