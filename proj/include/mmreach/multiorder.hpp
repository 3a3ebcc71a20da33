#pragma once

#include "mmreach/decomp.hpp"
#include "mmreach/embed.hpp"
#include "mmreach/geometry.hpp"
#include "mmreach/system.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace mmreach {

using SystemPtr = std::shared_ptr<const SystemDef>;

struct PlanEntry {
    Matrix shape;
    DecompositionSpec decomp;
};

/// Shape matrices, each with its own decomposition recipe, sharing one
/// ReachSpec.
struct TransformPlan {
    std::vector<PlanEntry> entries;
    ReachSpec spec;

    /// Plan with the default (tight) decomposition for every matrix.
    static TransformPlan from_shapes(const std::vector<Matrix>& shapes, const ReachSpec& spec);

    /// Throws ConfigError on an empty plan, GeometryError on a singular entry.
    void validate(int n) const;
};

/// Union of parallelotopes, taken as is (no hull).
struct UnionInitialSet {
    std::vector<Parallelotope> members;

    Eigen::Index dim() const { return members.empty() ? 0 : members.front().dim(); }
    bool contains(const Vector& x, double tol = kMembershipTol) const;
};

/// Parallelotope over-approximation of the forward (or, for a backward spec,
/// backward) reachable set of `x0`, computed in the coordinates y = T^-1 x.
/// `x0.shape()` must equal `shape`.
Parallelotope reach_parallelotope(const SystemPtr& s, const Matrix& shape, const Parallelotope& x0,
                                  const ReachSpec& spec, const DecompositionSpec& decomp = {});

/// The decomposition that reach_parallelotope builds for a given transform.
Decomposition transformed_decomposition(const SystemPtr& s, const Matrix& shape, Direction direction,
                                        const DecompositionSpec& decomp);

/// Monte-Carlo volume estimate with a 95% confidence interval.
struct VolumeEstimate {
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long samples = 0;
};

struct IntersectionResult {
    std::vector<Parallelotope> parallelotopes;
    /// n = 2 only.
    std::optional<Polygon2D> polygon;
    /// Area of the intersection of the first k parallelotopes, k = 1..K (n = 2).
    std::vector<double> area_curve;
    /// n > 2 only.
    std::optional<VolumeEstimate> volume;
};

struct IntersectionOptions {
    long volume_samples = 1000000;
    std::uint64_t volume_seed = 7;
};

/// Fits each plan shape around the initial vertices, reaches, and intersects.
/// Throws IntegrityError if the intersection comes out empty.
IntersectionResult reach_intersection(const SystemPtr& s, const TransformPlan& plan,
                                      const std::vector<Vector>& x0_vertices, const IntersectionOptions& opts = {});

/// One reach_parallelotope per member, each with its own shape matrix.
std::vector<Parallelotope> reach_union(const SystemPtr& s, const UnionInitialSet& u, const ReachSpec& spec,
                                       const DecompositionSpec& decomp = {});

/// k planar rotations at angles pi j / (2k), j = 0..k-1.
std::vector<Matrix> default_transform_family(int k);

} // namespace mmreach
