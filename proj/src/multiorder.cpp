#include "mmreach/multiorder.hpp"

#include "mmreach/errors.hpp"
#include "mmreach/linalg.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace mmreach {

TransformPlan TransformPlan::from_shapes(const std::vector<Matrix>& shapes, const ReachSpec& spec)
{
    TransformPlan plan;
    plan.spec = spec;
    for (const auto& t : shapes)
        plan.entries.push_back({t, {}});
    return plan;
}

void TransformPlan::validate(int n) const
{
    if (entries.empty())
        throw ConfigError("transform plan is empty");
    spec.validate();
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const Matrix& t = entries[k].shape;
        if (t.rows() != n || t.cols() != n)
            throw DimensionError("transform " + std::to_string(k + 1) + " is " + std::to_string(t.rows()) + "x" +
                                 std::to_string(t.cols()) + ", expected " + std::to_string(n) + "x" +
                                 std::to_string(n));
        if (!is_well_conditioned(t))
            throw GeometryError("transform " + std::to_string(k + 1) + " is singular or ill-conditioned");
    }
}

bool UnionInitialSet::contains(const Vector& x, double tol) const
{
    for (const auto& p : members)
        if (p.contains(x, tol))
            return true;
    return false;
}

Decomposition transformed_decomposition(const SystemPtr& s, const Matrix& shape, Direction direction,
                                        const DecompositionSpec& decomp)
{
    auto ts = transform(s, shape);
    FieldPtr field = direction == Direction::Forward ? std::make_shared<TransformedSystem>(std::move(ts))
                                                     : std::make_shared<TransformedSystem>(reverse_time(ts));
    return build_decomposition(std::move(field), decomp);
}

Parallelotope reach_parallelotope(const SystemPtr& s, const Matrix& shape, const Parallelotope& x0,
                                  const ReachSpec& spec, const DecompositionSpec& decomp)
{
    if (x0.shape() != shape)
        throw MismatchError("reach_parallelotope: initial set shape differs from the transform");
    if (x0.dim() != s->state_dim())
        throw DimensionError("reach_parallelotope: initial set dimension differs from the system");
    const auto ts = transform(s, shape);
    const Decomposition d = transformed_decomposition(s, shape, spec.direction, decomp);
    Box coords = spec.direction == Direction::Forward ? forward_reach_box(ts, d, x0.coords(), spec)
                                                      : backward_reach_box(ts, d, x0.coords(), spec);
    return Parallelotope(shape, std::move(coords));
}

namespace {

VolumeEstimate mc_intersection_volume(const std::vector<Parallelotope>& ps, long samples, std::uint64_t seed)
{
    const Parallelotope& base = ps.front();
    const auto n = base.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    long hits = 0;
    Vector y(n);
    for (long k = 0; k < samples; ++k) {
        for (Eigen::Index j = 0; j < n; ++j)
            y[j] = base.coords().lo()[j] + unit(rng) * base.coords().widths()[j];
        const Vector x = base.shape() * y;
        bool inside = true;
        for (std::size_t q = 1; q < ps.size() && inside; ++q)
            inside = ps[q].contains(x);
        hits += inside ? 1 : 0;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    const double half = 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    const double v = base.volume();
    return {v * p, v * std::max(0.0, p - half), v * std::min(1.0, p + half), samples};
}

} // namespace

IntersectionResult reach_intersection(const SystemPtr& s, const TransformPlan& plan,
                                      const std::vector<Vector>& x0_vertices, const IntersectionOptions& opts)
{
    const int n = s->state_dim();
    plan.validate(n);
    if (x0_vertices.empty())
        throw ConfigError("reach_intersection needs at least one initial vertex");

    IntersectionResult out;
    for (const auto& entry : plan.entries) {
        const Parallelotope x0(entry.shape, bounding_coords(x0_vertices, entry.shape));
        out.parallelotopes.push_back(reach_parallelotope(s, entry.shape, x0, plan.spec, entry.decomp));
    }

    if (n != 2) {
        out.volume = mc_intersection_volume(out.parallelotopes, opts.volume_samples, opts.volume_seed);
        if (out.volume->value <= 0.0)
            throw IntegrityError("intersection of the reach parallelotopes is empty (Monte-Carlo estimate)");
        return out;
    }

    std::vector<Polygon2D> polys;
    for (const auto& p : out.parallelotopes) {
        polys.push_back(to_polygon(p));
        auto cut = clip_intersection(polys);
        if (!cut)
            throw IntegrityError("intersection of the first " + std::to_string(polys.size()) +
                                 " reach parallelotopes is empty");
        out.area_curve.push_back(area(*cut));
        out.polygon = std::move(cut);
    }
    return out;
}

std::vector<Parallelotope> reach_union(const SystemPtr& s, const UnionInitialSet& u, const ReachSpec& spec,
                                       const DecompositionSpec& decomp)
{
    if (u.members.empty())
        throw ConfigError("union initial set has no members");
    std::vector<Parallelotope> out;
    out.reserve(u.members.size());
    for (const auto& p : u.members)
        out.push_back(reach_parallelotope(s, p.shape(), p, spec, decomp));
    return out;
}

std::vector<Matrix> default_transform_family(int k)
{
    if (k < 1)
        throw ConfigError("transform family needs count >= 1");
    std::vector<Matrix> out;
    for (int j = 0; j < k; ++j) {
        const double a = std::numbers::pi * j / (2.0 * k);
        Matrix r(2, 2);
        r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        if (j == 0)
            r.setIdentity();
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace mmreach
