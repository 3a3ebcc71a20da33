#include "mmreach/oracle.hpp"

#include "mmreach/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>
#include <unordered_set>

namespace mmreach {

const char* to_string(InitMode m) noexcept
{
    return m == InitMode::Uniform ? "uniform" : "corners-plus-uniform";
}

InitMode init_mode_from_string(const std::string& s)
{
    if (s == "uniform")
        return InitMode::Uniform;
    if (s == "corners-plus-uniform")
        return InitMode::CornersPlusUniform;
    throw ConfigError("unknown init_mode '" + s + "' (expected uniform | corners-plus-uniform)");
}

void SampleConfig::validate() const
{
    if (count < 1)
        throw ConfigError("sampling count must be >= 1");
    if (switch_count < 0)
        throw ConfigError("sampling switch_count must be >= 0");
    if (threads < 0)
        throw ConfigError("sampling threads must be >= 0");
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

namespace {

double unit(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

Vector draw_in_box(const Box& b, std::mt19937_64& rng)
{
    Vector x(b.dim());
    for (Eigen::Index j = 0; j < b.dim(); ++j)
        x[j] = b.lo()[j] + unit(rng) * (b.hi()[j] - b.lo()[j]);
    return x;
}

Box hull_of(const UnionInitialSet& u)
{
    Vector lo = Vector::Constant(u.dim(), std::numeric_limits<double>::infinity());
    Vector hi = -lo;
    for (const auto& p : u.members)
        for (const auto& v : vertices(p)) {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
    return Box(lo, hi);
}

std::vector<Vector> box_corners(const Box& b)
{
    return vertices(Parallelotope(Matrix::Identity(b.dim(), b.dim()), b));
}

int worker_count(int requested, long jobs)
{
    long t = requested > 0 ? requested : static_cast<long>(std::max(1u, std::thread::hardware_concurrency()));
    return static_cast<int>(std::clamp(t, 1L, std::max(1L, jobs)));
}

// Runs body(index) for every index in [0, count) on `threads` workers. Each
// worker gets a contiguous slice so results can be written by index.
template <class Body>
void parallel_for(long count, int threads, Body&& body)
{
    if (threads <= 1) {
        body(0L, count);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const long chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const long begin = t * chunk;
        const long end = std::min(count, begin + chunk);
        if (begin >= end)
            break;
        pool.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
}

} // namespace

Vector draw_initial(const InitialSet& x0, std::mt19937_64& rng)
{
    if (const auto* b = std::get_if<Box>(&x0))
        return draw_in_box(*b, rng);
    if (const auto* p = std::get_if<Parallelotope>(&x0))
        return p->shape() * draw_in_box(p->coords(), rng);
    if (const auto* poly = std::get_if<Polygon2D>(&x0)) {
        if (area(*poly) <= 0.0)
            throw GeometryError("cannot sample a polygon with zero area");
        Vector lo = Vector::Constant(2, std::numeric_limits<double>::infinity());
        Vector hi = -lo;
        for (const auto& v : poly->vertices()) {
            lo = lo.cwiseMin(Vector(v));
            hi = hi.cwiseMax(Vector(v));
        }
        const Box hull(lo, hi);
        for (;;) {
            Vector x = draw_in_box(hull, rng);
            if (poly->contains(Point2(x[0], x[1]), 0.0))
                return x;
        }
    }
    const auto& u = std::get<UnionInitialSet>(x0);
    if (u.members.empty())
        throw ConfigError("cannot sample an empty union");
    const Box hull = hull_of(u);
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        Vector x = draw_in_box(hull, rng);
        if (u.contains(x))
            return x;
    }
    throw GeometryError("rejection sampling found no point of the union; is it degenerate?");
}

std::vector<Vector> initial_corners(const InitialSet& x0)
{
    if (const auto* b = std::get_if<Box>(&x0))
        return box_corners(*b);
    if (const auto* p = std::get_if<Parallelotope>(&x0))
        return vertices(*p);
    std::vector<Vector> out;
    if (const auto* poly = std::get_if<Polygon2D>(&x0)) {
        for (const auto& v : poly->vertices())
            out.emplace_back(v);
        return out;
    }
    for (const auto& p : std::get<UnionInitialSet>(x0).members)
        for (auto& v : vertices(p))
            out.push_back(std::move(v));
    return out;
}

StepSignal draw_signal(const Box& w, const ReachSpec& spec, int switch_count, std::mt19937_64& rng)
{
    const StepSchedule sched(spec);
    StepSignal sig;
    sig.starts = {0};
    for (int s = 0; s < switch_count && sched.steps > 1; ++s) {
        const auto k = static_cast<std::size_t>(std::llround(unit(rng) * static_cast<double>(sched.steps)));
        sig.starts.push_back(std::clamp<std::size_t>(k, 1, sched.steps - 1));
    }
    std::sort(sig.starts.begin(), sig.starts.end());
    sig.starts.erase(std::unique(sig.starts.begin(), sig.starts.end()), sig.starts.end());
    for (std::size_t seg = 0; seg < sig.starts.size(); ++seg) {
        Vector level(w.dim());
        const bool corner = unit(rng) < 0.2;
        for (Eigen::Index j = 0; j < w.dim(); ++j) {
            const double u = unit(rng);
            level[j] = corner ? (u < 0.5 ? w.lo()[j] : w.hi()[j]) : w.lo()[j] + u * (w.hi()[j] - w.lo()[j]);
        }
        sig.levels.push_back(std::move(level));
    }
    return sig;
}

SampleResult sample_endpoints(const VectorField& s, const InitialSet& x0, const ReachSpec& spec,
                              const SampleConfig& cfg)
{
    cfg.validate();
    ReachSpec fwd = spec;
    fwd.direction = Direction::Forward;
    const std::vector<Vector> corners =
        cfg.init_mode == InitMode::CornersPlusUniform ? initial_corners(x0) : std::vector<Vector>{};

    std::vector<std::optional<Vector>> slots(static_cast<std::size_t>(cfg.count));
    parallel_for(cfg.count, worker_count(cfg.threads, cfg.count), [&](long begin, long end) {
        OdeIntegrator ode(s, fwd);
        for (long i = begin; i < end; ++i) {
            auto rng = sample_rng(cfg.seed, static_cast<std::uint64_t>(i));
            Vector x = static_cast<std::size_t>(i) < corners.size() ? corners[static_cast<std::size_t>(i)]
                                                                     : draw_initial(x0, rng);
            if (x.size() != s.state_dim())
                throw DimensionError("initial set dimension differs from the system");
            const StepSignal sig = draw_signal(s.disturbance(), fwd, cfg.switch_count, rng);
            if (ode.run(view(x), sig))
                slots[static_cast<std::size_t>(i)] = std::move(x);
        }
    });

    SampleResult out;
    out.endpoints.reserve(slots.size());
    for (auto& slot : slots) {
        if (slot)
            out.endpoints.push_back(std::move(*slot));
        else
            ++out.divergent;
    }
    return out;
}

// ---------------------------------------------------------------- audits

Region Region::union_of(const std::vector<Parallelotope>& ps)
{
    Region r;
    for (const auto& p : ps)
        r.members.emplace_back(p);
    return r;
}

Eigen::Index Region::dim() const
{
    if (members.empty())
        return 0;
    return std::visit(
        [](const auto& s) -> Eigen::Index {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, Polygon2D>)
                return 2;
            else
                return s.dim();
        },
        members.front());
}

double Region::margin(const Vector& x) const
{
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : members) {
        const double v = std::visit(
            [&](const auto& s) -> double {
                using S = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<S, Polygon2D>)
                    return s.margin(Point2(x[0], x[1]));
                else
                    return s.margin(x);
            },
            m);
        best = std::max(best, v);
    }
    return best;
}

ContainmentReport audit_containment(std::span<const Vector> points, const Region& region, double tol)
{
    if (region.members.empty())
        throw ConfigError("audit region is empty");
    ContainmentReport rep;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& x : points) {
        if (x.size() != region.dim())
            throw DimensionError("audit point dimension differs from the region");
        ++rep.total;
        const double m = region.margin(x);
        rep.worst_margin = std::min(rep.worst_margin, m);
        if (m < -tol) {
            ++rep.violations;
            if (rep.witnesses.size() < kMaxWitnesses)
                rep.witnesses.push_back(x);
        }
    }
    if (rep.total == 0)
        rep.worst_margin = 0.0;
    return rep;
}

double occupancy_area(std::span<const Vector> points, double cell)
{
    if (!(cell > 0.0))
        throw ConfigError("occupancy cell size must be positive");
    if (points.empty())
        return 0.0;
    struct Hash {
        std::size_t operator()(const std::pair<long long, long long>& c) const noexcept
        {
            return std::hash<long long>()(c.first * 1000003LL ^ c.second);
        }
    };
    std::unordered_set<std::pair<long long, long long>, Hash> cells;
    for (const auto& p : points) {
        if (p.size() != 2)
            throw DimensionError("occupancy_area needs planar points");
        cells.emplace(static_cast<long long>(std::floor(p[0] / cell)), static_cast<long long>(std::floor(p[1] / cell)));
    }
    return static_cast<double>(cells.size()) * cell * cell;
}

WitnessResult backward_witnesses(const VectorField& s, const Parallelotope& target, const ReachSpec& spec,
                                 const SampleConfig& cfg, const Box& search_box)
{
    cfg.validate();
    if (target.dim() != s.state_dim() || search_box.dim() != s.state_dim())
        throw DimensionError("backward_witnesses: target or search box dimension differs from the system");
    ReachSpec fwd = spec;
    fwd.direction = Direction::Forward;

    enum class Outcome : char { Miss, Hit, Divergent };
    std::vector<Outcome> outcome(static_cast<std::size_t>(cfg.count), Outcome::Miss);
    std::vector<Vector> starts(static_cast<std::size_t>(cfg.count));
    parallel_for(cfg.count, worker_count(cfg.threads, cfg.count), [&](long begin, long end) {
        OdeIntegrator ode(s, fwd);
        for (long i = begin; i < end; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            auto rng = sample_rng(cfg.seed, static_cast<std::uint64_t>(i));
            starts[idx] = draw_in_box(search_box, rng);
            Vector x = starts[idx];
            const StepSignal sig = draw_signal(s.disturbance(), fwd, cfg.switch_count, rng);
            if (!ode.run(view(x), sig))
                outcome[idx] = Outcome::Divergent;
            else if (target.contains(x))
                outcome[idx] = Outcome::Hit;
        }
    });

    WitnessResult out;
    out.candidates = cfg.count;
    for (std::size_t i = 0; i < outcome.size(); ++i) {
        if (outcome[i] == Outcome::Hit)
            out.points.push_back(std::move(starts[i]));
        else if (outcome[i] == Outcome::Divergent)
            ++out.divergent;
    }
    if (out.points.empty())
        out.warning = "no sampled trajectory reached the target set; the backward reachable set may be empty "
                      "or lie outside the search box";
    return out;
}

} // namespace mmreach
