#pragma once

#include "mmreach/embed.hpp"
#include "mmreach/geometry.hpp"
#include "mmreach/multiorder.hpp"
#include "mmreach/system.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mmreach {

enum class InitMode { Uniform, CornersPlusUniform };

const char* to_string(InitMode m) noexcept;
InitMode init_mode_from_string(const std::string& s);

struct SampleConfig {
    long count = 10000;
    std::uint64_t seed = 1;
    int switch_count = 4;
    InitMode init_mode = InitMode::Uniform;
    /// Worker threads; 0 picks the hardware concurrency.
    int threads = 0;

    void validate() const;
};

/// Set of initial states the sampler draws from.
using InitialSet = std::variant<Box, Parallelotope, UnionInitialSet, Polygon2D>;

/// Generator for sample `index`; independent of how samples are scheduled.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index);

/// Uniform draw from the set (rejection sampling for unions and polygons).
Vector draw_initial(const InitialSet& x0, std::mt19937_64& rng);

/// Corner points of the set (2^n per member, or the polygon vertices).
std::vector<Vector> initial_corners(const InitialSet& x0);

/// Random piecewise-constant disturbance on the step grid of `spec`:
/// `switch_count` switch times, each segment level uniform in W except that
/// with probability 0.2 it is a corner of W.
StepSignal draw_signal(const Box& w, const ReachSpec& spec, int switch_count, std::mt19937_64& rng);

struct SampleResult {
    std::vector<Vector> endpoints;
    long divergent = 0;
};

/// Endpoints Phi(t; x, w) of random trajectories; deterministic for a seed.
SampleResult sample_endpoints(const VectorField& s, const InitialSet& x0, const ReachSpec& spec,
                              const SampleConfig& cfg);

// ---------------------------------------------------------------- audits

using Shape = std::variant<Box, Parallelotope, Polygon2D>;

/// Union of shapes; a single shape is a one-member union.
struct Region {
    std::vector<Shape> members;

    Region() = default;
    Region(Shape s) { members.push_back(std::move(s)); }
    static Region union_of(const std::vector<Parallelotope>& ps);

    /// Signed distance to the region in each member's native coordinates,
    /// maximised over members (positive inside).
    double margin(const Vector& x) const;
    Eigen::Index dim() const;
};

struct ContainmentReport {
    long total = 0;
    long violations = 0;
    double worst_margin = 0.0;
    std::vector<Vector> witnesses;
};

inline constexpr double kAuditTol = 1e-9;
inline constexpr std::size_t kMaxWitnesses = 10;

ContainmentReport audit_containment(std::span<const Vector> points, const Region& region, double tol = kAuditTol);

/// Occupied cells of a uniform grid times the cell area (n = 2).
double occupancy_area(std::span<const Vector> points, double cell);

struct WitnessResult {
    std::vector<Vector> points;
    long candidates = 0;
    long divergent = 0;
    /// Set when no candidate reached the target set.
    std::string warning;
};

/// Start points drawn uniformly in `search_box` whose forward trajectory,
/// under a random disturbance signal, ends inside `target`.
WitnessResult backward_witnesses(const VectorField& s, const Parallelotope& target, const ReachSpec& spec,
                                 const SampleConfig& cfg, const Box& search_box);

} // namespace mmreach
