#include "support.hpp"

#include "mmreach/errors.hpp"
#include "mmreach/multiorder.hpp"
#include "mmreach/oracle.hpp"
#include "mmreach/presets.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace mmreach;
using namespace testing;

namespace {

const ReachSpec kSpec{1.0, 1e-3, Direction::Forward};

SampleConfig cfg(long count, std::uint64_t seed = 5)
{
    SampleConfig c;
    c.count = count;
    c.seed = seed;
    return c;
}

SystemPtr decay()
{
    return std::make_shared<SystemDef>(SystemDef::from_strings(1, 0, {"-x1"}, Box(Vector(0), Vector(0))));
}

Parallelotope interval(double lo, double hi) { return Parallelotope(Matrix::Identity(1, 1), Box(v1(lo), v1(hi))); }

} // namespace

TEST_CASE("sample config validation")
{
    CHECK_NOTHROW(cfg(1).validate());
    CHECK_THROWS_AS(cfg(0).validate(), ConfigError);
    SampleConfig c = cfg(10);
    c.switch_count = -1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(init_mode_from_string("corners-plus-uniform") == InitMode::CornersPlusUniform);
    CHECK(std::string(to_string(InitMode::Uniform)) == "uniform");
    CHECK_THROWS_AS(init_mode_from_string("sobol"), ConfigError);
}

TEST_CASE("disturbance signals live on the step grid")
{
    const Box W(v2(-1, 0), v2(1, 0.5));
    const StepSchedule sched(kSpec);
    auto rng = sample_rng(1, 0);
    for (int k = 0; k < 200; ++k) {
        const StepSignal sig = draw_signal(W, kSpec, 4, rng);
        REQUIRE(sig.starts.size() == sig.levels.size());
        CHECK(sig.starts.front() == 0);
        CHECK(sig.starts.size() <= 5);
        for (std::size_t i = 1; i < sig.starts.size(); ++i) {
            CHECK(sig.starts[i] > sig.starts[i - 1]);
            CHECK(sig.starts[i] < sched.steps);
        }
        for (const auto& w : sig.levels)
            CHECK(W.contains(w));
    }
    const StepSignal flat = draw_signal(W, kSpec, 0, rng);
    CHECK(flat.starts.size() == 1);
    CHECK(flat.levels.size() == 1);
}

TEST_CASE("corner levels appear")
{
    const Box W(v1(0), v1(1));
    auto rng = sample_rng(2, 0);
    int corners = 0, total = 0;
    for (int k = 0; k < 2000; ++k) {
        for (const auto& w : draw_signal(W, kSpec, 0, rng).levels) {
            ++total;
            corners += w[0] == 0.0 || w[0] == 1.0;
        }
    }
    CHECK(corners == doctest::Approx(0.2 * total).epsilon(0.15));
}

TEST_CASE("initial draws stay in the set")
{
    auto rng = sample_rng(3, 0);
    const auto hex = presets::hexagon_overlap_split();
    const Parallelotope p = presets::example1_initial_set();
    const Polygon2D tri({{0, 0}, {1, 0}, {0, 1}});
    for (int k = 0; k < 500; ++k) {
        CHECK(hex.contains(draw_initial(hex, rng)));
        CHECK(p.contains(draw_initial(p, rng), 1e-12));
        const Vector t = draw_initial(tri, rng);
        CHECK(tri.contains(Point2(t[0], t[1]), 1e-12));
    }
    CHECK(initial_corners(p).size() == 4);
    CHECK(initial_corners(hex).size() == 12);
    CHECK(initial_corners(tri).size() == 3);
}

TEST_CASE("sampling is deterministic and independent of threads")
{
    const auto s = presets::bilinear_system();
    const Parallelotope x0 = presets::example1_initial_set();
    SampleConfig a = cfg(400, 9);
    a.threads = 1;
    SampleConfig b = a;
    b.threads = 3;
    const auto ra = sample_endpoints(*s, x0, kSpec, a);
    const auto rb = sample_endpoints(*s, x0, kSpec, b);
    REQUIRE(ra.endpoints.size() == 400);
    CHECK(ra.endpoints == rb.endpoints);
    b.seed = 10;
    CHECK(sample_endpoints(*s, x0, kSpec, b).endpoints != ra.endpoints);

    SampleConfig c = a;
    c.init_mode = InitMode::CornersPlusUniform;
    const auto rc = sample_endpoints(*s, x0, kSpec, c);
    CHECK(rc.endpoints == sample_endpoints(*s, x0, kSpec, c).endpoints);
}

TEST_CASE("no uncertainty, one endpoint")
{
    auto fixed = std::make_shared<SystemDef>(
        SystemDef::from_strings(2, 1, {"x1*x2 + w1", "x1 + 1"}, Box(v1(0.1), v1(0.1))));
    const Vector x = v2(0.3, -0.2);
    const Vector end = simulate(*fixed, x, StepSignal::constant(v1(0.1)), kSpec);
    const auto r = sample_endpoints(*fixed, Box::point(x), kSpec, cfg(50));
    for (const auto& e : r.endpoints)
        CHECK(e == end);
}

TEST_CASE("divergent samples are counted and dropped")
{
    auto blowup = std::make_shared<SystemDef>(SystemDef::from_strings(1, 0, {"x1^2"}, Box(Vector(0), Vector(0))));
    const auto r = sample_endpoints(*blowup, Box(v1(0), v1(2)), ReachSpec{1.0, 1e-3}, cfg(200));
    CHECK(r.divergent > 0);
    CHECK(r.divergent + static_cast<long>(r.endpoints.size()) == 200);
    for (const auto& e : r.endpoints)
        CHECK(std::isfinite(e[0]));
}

TEST_CASE("containment audit")
{
    const Box b(v2(0, 0), v2(1, 1));
    std::vector<Vector> pts{v2(0.5, 0.5), v2(0, 1), v2(1 + 5e-10, 0.5)};
    const auto ok = audit_containment(pts, Region(b));
    CHECK(ok.total == 3);
    CHECK(ok.violations == 0);
    CHECK(ok.witnesses.empty());

    pts.push_back(v2(1.5, 0.5));
    const auto bad = audit_containment(pts, Region(b));
    CHECK(bad.violations == 1);
    REQUIRE(bad.witnesses.size() == 1);
    CHECK(bad.witnesses[0] == v2(1.5, 0.5));
    CHECK(bad.worst_margin == doctest::Approx(-0.5));

    // margins are measured in the parallelotope's own coordinates
    const Parallelotope p(m2(2, 0, 0, 2), b);
    CHECK(audit_containment(std::vector<Vector>{v2(3, 1)}, Region(p)).worst_margin == doctest::Approx(-0.5));

    const Region u = Region::union_of({Parallelotope(Matrix::Identity(2, 2), b),
                                       Parallelotope(Matrix::Identity(2, 2), Box(v2(2, 0), v2(3, 1)))});
    CHECK(audit_containment(std::vector<Vector>{v2(2.5, 0.5), v2(0.5, 0.5)}, u).violations == 0);
    CHECK(audit_containment(std::vector<Vector>{v2(1.5, 0.5)}, u).violations == 1);

    std::vector<Vector> many(25, v2(9, 9));
    const auto capped = audit_containment(many, Region(b));
    CHECK(capped.violations == 25);
    CHECK(capped.witnesses.size() == kMaxWitnesses);

    const Polygon2D tri({{0, 0}, {1, 0}, {0, 1}});
    CHECK(audit_containment(std::vector<Vector>{v2(0.6, 0.6)}, Region(tri)).violations == 1);
    CHECK_THROWS_AS(audit_containment(std::vector<Vector>{v1(0)}, Region(b)), DimensionError);
}

TEST_CASE("occupancy area")
{
    CHECK(occupancy_area({}, 0.1) == 0.0);
    const std::vector<Vector> one{v2(0.33, 0.71)};
    CHECK(occupancy_area(one, 0.05) == doctest::Approx(0.0025));
    CHECK_THROWS_AS(occupancy_area(one, 0.0), ConfigError);

    Rng rng(1);
    std::vector<Vector> pts;
    pts.reserve(1000000);
    for (int k = 0; k < 1000000; ++k)
        pts.push_back(rng.in(Box(v2(0, 0), v2(1, 1))));
    CHECK(occupancy_area(pts, 0.05) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("backward witnesses of the scalar decay")
{
    const auto s = decay();
    const auto w = backward_witnesses(*s, interval(std::exp(-1.0), 2 * std::exp(-1.0)), kSpec, cfg(3000),
                                      Box(v1(0), v1(3)));
    REQUIRE(w.points.size() > 500);
    CHECK(w.warning.empty());
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& p : w.points) {
        lo = std::min(lo, p[0]);
        hi = std::max(hi, p[0]);
    }
    CHECK(lo >= 1 - 1e-9);
    CHECK(hi <= 2 + 1e-9);
    CHECK(lo == doctest::Approx(1.0).epsilon(0.02));
    CHECK(hi == doctest::Approx(2.0).epsilon(0.02));

    const auto none = backward_witnesses(*s, interval(std::exp(-1.0), 2 * std::exp(-1.0)), kSpec, cfg(200),
                                         Box(v1(10), v1(11)));
    CHECK(none.points.empty());
    CHECK_FALSE(none.warning.empty());
}

TEST_CASE("example 1 backward witnesses sit inside the backward parallelogram")
{
    const auto s = presets::bilinear_system();
    const Parallelotope x0 = presets::example1_initial_set();
    const ReachSpec back{1.0, 1e-3, Direction::Backward};
    const Parallelotope r = reach_parallelotope(s, x0.shape(), x0, back);
    const auto w = backward_witnesses(*s, x0, back, cfg(20000), Box(v2(-3, -3), v2(3, 3)));
    CHECK(w.points.size() > 50);
    CHECK(audit_containment(w.points, Region(r)).violations == 0);
}

// At the configured preset cell, doubling the sample count should barely
// move the occupancy estimate.
TEST_CASE("occupancy settles when samples double")
{
    const auto s = presets::bilinear_system();
    const Parallelotope x0 = presets::example1_initial_set();
    const ReachSpec coarse{1.0, 1e-2};
    const double cell = 0.02;
    const auto a = sample_endpoints(*s, x0, coarse, cfg(200000, 1));
    const auto b = sample_endpoints(*s, x0, coarse, cfg(400000, 1));
    const double change = std::abs(occupancy_area(b.endpoints, cell) - occupancy_area(a.endpoints, cell));
    MESSAGE("occupancy change in cells: " << change / (cell * cell));
    CHECK(change <= 2 * cell * cell + 1e-12);
}
