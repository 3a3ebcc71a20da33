#include "mmreach/pipeline.hpp"

#include "mmreach/errors.hpp"

namespace mmreach {

const char* to_string(Pipeline p) noexcept
{
    switch (p) {
    case Pipeline::Box: return "box";
    case Pipeline::Parallelotope: return "parallelotope";
    case Pipeline::Intersection: return "intersection";
    case Pipeline::Union: return "union";
    }
    return "?";
}

Pipeline pipeline_for(const ProblemConfig& cfg)
{
    if (cfg.initial.kind == InitialKind::Union)
        return Pipeline::Union;
    if (cfg.plan)
        return Pipeline::Intersection;
    if (cfg.initial.kind == InitialKind::Parallelotope)
        return Pipeline::Parallelotope;
    return Pipeline::Box;
}

Decomposition box_decomposition(const ProblemConfig& cfg)
{
    if (cfg.spec.direction == Direction::Forward)
        return build_decomposition(cfg.system, cfg.decomp);
    return build_decomposition(std::make_shared<const SystemDef>(reverse_time(*cfg.system)), cfg.decomp);
}

ReachOutcome run_reach(const ProblemConfig& cfg)
{
    ReachOutcome out;
    out.pipeline = pipeline_for(cfg);
    out.direction = cfg.spec.direction;
    switch (out.pipeline) {
    case Pipeline::Box: {
        const Decomposition d = box_decomposition(cfg);
        out.boxes.push_back(cfg.spec.direction == Direction::Forward
                                ? forward_reach_box(*cfg.system, d, *cfg.initial.box, cfg.spec)
                                : backward_reach_box(*cfg.system, d, *cfg.initial.box, cfg.spec));
        break;
    }
    case Pipeline::Parallelotope: {
        const Parallelotope& x0 = *cfg.initial.parallelotope;
        out.parallelotopes.push_back(reach_parallelotope(cfg.system, x0.shape(), x0, cfg.spec, cfg.decomp));
        break;
    }
    case Pipeline::Intersection: {
        TransformPlan plan = *cfg.plan;
        plan.spec = cfg.spec;
        auto res = reach_intersection(cfg.system, plan, cfg.initial.vertex_list());
        out.parallelotopes = std::move(res.parallelotopes);
        out.polygon = std::move(res.polygon);
        out.area_curve = std::move(res.area_curve);
        out.volume = res.volume;
        break;
    }
    case Pipeline::Union:
        out.parallelotopes = reach_union(cfg.system, cfg.initial.union_set, cfg.spec, cfg.decomp);
        break;
    }
    return out;
}

namespace {

Parallelotope scaled(const Parallelotope& p, double s) { return Parallelotope(p.shape(), p.coords().scaled(s)); }

Polygon2D scaled(const Polygon2D& p, double s)
{
    Point2 c = Point2::Zero();
    for (const auto& v : p.vertices())
        c += v;
    c /= static_cast<double>(p.size());
    std::vector<Point2> vs;
    for (const auto& v : p.vertices())
        vs.push_back(c + s * (v - c));
    return Polygon2D(std::move(vs));
}

} // namespace

std::vector<std::pair<std::string, Region>> ReachOutcome::audit_regions(double scale) const
{
    std::vector<std::pair<std::string, Region>> out;
    switch (pipeline) {
    case Pipeline::Box:
        out.emplace_back("box", Region(boxes.front().scaled(scale)));
        break;
    case Pipeline::Parallelotope:
        out.emplace_back("parallelotope", Region(scaled(parallelotopes.front(), scale)));
        break;
    case Pipeline::Intersection:
        for (std::size_t k = 0; k < parallelotopes.size(); ++k)
            out.emplace_back("parallelotope[" + std::to_string(k) + "]", Region(scaled(parallelotopes[k], scale)));
        if (polygon)
            out.emplace_back("intersection", Region(scaled(*polygon, scale)));
        break;
    case Pipeline::Union: {
        Region u;
        for (const auto& p : parallelotopes)
            u.members.emplace_back(scaled(p, scale));
        out.emplace_back("union", std::move(u));
        break;
    }
    }
    return out;
}

} // namespace mmreach
