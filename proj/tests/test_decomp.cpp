#include "support.hpp"

#include "mmreach/decomp.hpp"
#include "mmreach/errors.hpp"
#include "mmreach/optimize.hpp"
#include "mmreach/presets.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace mmreach;
using namespace testing;

namespace {

FieldPtr t1_system()
{
    return std::make_shared<TransformedSystem>(transform(presets::cubic_system(), presets::example3_t1()));
}

// Brute-force version of the tight decomposition: the box spanned by the
// arguments, coordinate i pinned, searched on a uniform grid of `g` points per
// free coordinate. Planar state, scalar disturbance only.
Vector brute_tight(const VectorField& f, const Vector& x, const Vector& w, const Vector& xh, const Vector& wh,
                   int g = 401)
{
    const bool lower = leq(x, xh) && leq(w, wh);
    Vector out(2);
    for (int i = 0; i < 2; ++i) {
        const int j = 1 - i;
        double best = lower ? INFINITY : -INFINITY;
        for (int a = 0; a < g; ++a) {
            for (int b = 0; b < g; ++b) {
                Vector y(2);
                y[i] = x[i];
                y[j] = x[j] + (xh[j] - x[j]) * a / (g - 1);
                const Vector z = v1(w[0] + (wh[0] - w[0]) * b / (g - 1));
                const double v = f.component(i, view(y), view(z));
                best = lower ? std::min(best, v) : std::max(best, v);
            }
        }
        out[i] = best;
    }
    return out;
}

struct Probe {
    Vector x, w, xh, wh;
    bool lower;
};

// Ordered probe pair in state box `b` and the disturbance box of `f`; lower
// side when `lower` is set, reversed otherwise.
Probe probe(Rng& rng, const Box& b, const Box& W, bool lower)
{
    auto [x, xh] = rng.ordered(b);
    auto [w, wh] = rng.ordered(W);
    if (lower)
        return {x, w, xh, wh, true};
    return {xh, wh, x, w, false};
}

CheckOptions check_opts(const Box& state_box)
{
    CheckOptions o;
    o.state_box = state_box;
    return o;
}

const char* kTightBilinear[] = {"max(x1,0)*x2 + min(x1,0)*xh2 + w1", "x1 + 1"};

} // namespace

TEST_CASE("box extremum finds corners and interior optima")
{
    const std::vector<double> lo{-1, -1}, hi{1, 2};
    BoxOptimizerStats stats;
    auto lin = [](std::span<const double> p) { return 2 * p[0] - p[1]; };
    CHECK(box_extremum(lin, lo, hi, true, {}, &stats) == -4.0);
    CHECK(box_extremum(lin, lo, hi, false, {}, &stats) == 3.0);
    CHECK(stats.corner == 2);
    auto bowl = [](std::span<const double> p) { return (p[0] - 0.3) * (p[0] - 0.3) + (p[1] - 0.7) * (p[1] - 0.7); };
    CHECK(box_extremum(bowl, lo, hi, true, {}, &stats) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(stats.search >= 1);
    // fixed coordinates stay put
    const std::vector<double> flo{0.5, -1}, fhi{0.5, 2};
    CHECK(box_extremum(bowl, flo, fhi, true) == doctest::Approx(0.04).epsilon(1e-10));
}

TEST_CASE("tight decomposition of the bilinear system")
{
    const auto s = presets::bilinear_system();
    const auto d = tight_decomposition(s);
    CHECK(d.method() == DecompMethod::Tight);

    const Vector a = d(v2(1, 0), v1(0), v2(2, 1), v1(0.25));
    CHECK(a[0] == doctest::Approx(brute_tight(*s, v2(1, 0), v1(0), v2(2, 1), v1(0.25))[0]).epsilon(1e-12));
    CHECK(a[0] == 0.0);
    CHECK(a[1] == 2.0);
    const Vector b = d(v2(-1, 0), v1(0), v2(0, 1), v1(0.25));
    CHECK(b[0] == doctest::Approx(brute_tight(*s, v2(-1, 0), v1(0), v2(0, 1), v1(0.25))[0]).epsilon(1e-12));
    CHECK(b[0] == -1.0);
}

TEST_CASE("tight decomposition agrees with a grid search")
{
    Rng rng(21);
    const Box states(v2(-1.5, -1.5), v2(1.5, 1.5));
    for (const auto& s : {presets::bilinear_system(), presets::cubic_system(), presets::trig_system()}) {
        const auto d = tight_decomposition(s);
        for (int k = 0; k < 40; ++k) {
            const Probe p = probe(rng, states, s->disturbance(), k % 2 == 0);
            const Vector got = d(p.x, p.w, p.xh, p.wh);
            const Vector want = brute_tight(*s, p.x, p.w, p.xh, p.wh);
            // grid values are attained, so the optimum is never worse than them
            for (int i = 0; i < 2; ++i) {
                if (p.lower)
                    CHECK(got[i] <= want[i] + 1e-9);
                else
                    CHECK(got[i] >= want[i] - 1e-9);
                CHECK(std::abs(got[i] - want[i]) <= 1e-4);
            }
        }
    }
}

TEST_CASE("tight decomposition rejects unordered arguments")
{
    const auto d = tight_decomposition(presets::bilinear_system());
    CHECK_THROWS_AS(d(v2(0, 1), v1(0), v2(1, 0), v1(0.25)), OrderError);
    CHECK_THROWS_AS(d(v2(0, 0), v1(0.25), v2(1, 1), v1(0)), OrderError);
    CHECK_THROWS_AS(d(v2(0, 0), v1(0), v1(1), v1(0)), DimensionError);
}

TEST_CASE("diagonal of every decomposition is the field")
{
    const auto s = presets::cubic_system();
    Rng rng(4);
    for (const auto& d : {tight_decomposition(s), tight_decomposition(presets::trig_system())}) {
        for (int k = 0; k < 100; ++k) {
            const Vector x = rng.in(Box(v2(-2, -2), v2(2, 2)));
            const Vector w = rng.in(d.source()->disturbance());
            CHECK((d(x, w, x, w) - eval_field(*d.source(), x, w)).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("jacobian-sign decompositions")
{
    const auto s = presets::bilinear_system();
    const Box pos(v2(0, -1), v2(0.75, 1));
    const auto d = jacobian_sign_decomposition(s, pos, 500);
    CHECK(d.method() == DecompMethod::JacobianSign);
    Rng rng(6);
    for (int k = 0; k < 200; ++k) {
        const Probe p = probe(rng, pos, s->disturbance(), k % 2 == 0);
        CHECK(d(p.x, p.w, p.xh, p.wh) == eval_field(*s, p.x, p.w));
    }

    try {
        jacobian_sign_decomposition(s, Box(v2(-1, -1), v2(1, 1)), 500);
        FAIL("expected an indefinite Jacobian entry");
    } catch (const IndefiniteError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("(1, x2)") != std::string::npos);
    }

    const auto t = t1_system();
    const auto dt = jacobian_sign_decomposition(t, Box(v2(-3, -3), v2(3, 3)), 500);
    for (int k = 0; k < 200; ++k) {
        const Probe p = probe(rng, Box(v2(-3, -3), v2(3, 3)), t->disturbance(), k % 2 == 0);
        CHECK((dt(p.x, p.w, p.xh, p.wh) - eval_field(*t, p.x, p.w)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("monotone pass-through")
{
    const auto t = t1_system();
    const auto d = monotone_decomposition(t, Box(v2(-3, -3), v2(3, 3)), 500);
    CHECK(d.method() == DecompMethod::Monotone);
    const Vector v = d(v2(0.5, -1), v1(0.2), v2(1, 1), v1(0.9));
    CHECK(v[0] == doctest::Approx(-1 + 0.2).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(0.5).epsilon(1e-12));

    CHECK_THROWS_AS(monotone_decomposition(presets::cubic_system(), Box(v2(-1, -1), v2(1, 1)), 500),
                    MonotonicityError);

    auto decay = std::make_shared<SystemDef>(SystemDef::from_strings(1, 0, {"-x1"}, Box(Vector(0), Vector(0))));
    CHECK_NOTHROW(monotone_decomposition(decay, Box(v1(-5), v1(5)), 100));
}

TEST_CASE("closed-form decompositions")
{
    const auto s = presets::bilinear_system();
    const auto closed = closed_form_decomposition(s, std::vector<std::string>(std::begin(kTightBilinear),
                                                                              std::end(kTightBilinear)));
    const auto tight = tight_decomposition(s);
    Rng rng(8);
    const Box states(v2(-2, -2), v2(2, 2));
    for (int k = 0; k < 1000; ++k) {
        const Probe p = probe(rng, states, s->disturbance(), k % 2 == 0);
        CHECK((closed(p.x, p.w, p.xh, p.wh) - tight(p.x, p.w, p.xh, p.wh)).cwiseAbs().maxCoeff() <= 1e-8);
    }

    const auto t = t1_system();
    const auto mono = closed_form_decomposition(t, std::vector<std::string>{"x2^3 + w1", "x1"});
    const auto report = check_decomposition(mono, check_opts(Box(v2(-2, -2), v2(2, 2))));
    CHECK(report.total_violations() == 0);
    CHECK(report.consistency_residual <= 1e-9);

    CHECK_THROWS_AS(closed_form_decomposition(s, std::vector<std::string>{"x1"}), DimensionError);
    CHECK_THROWS(closed_form_decomposition(s, std::vector<std::string>{"x3", "x1"}));
}

TEST_CASE("check_decomposition finds planted faults")
{
    const auto s = presets::bilinear_system();
    const Box states(v2(-2, -2), v2(2, 2));

    const auto good = check_decomposition(tight_decomposition(s), check_opts(states));
    CHECK(good.total_violations() == 0);
    CHECK(good.consistency_residual <= 1e-8);
    CHECK(good.witnesses.empty());

    // x and xh swapped in the x2 term: still consistent, wrong signs
    const auto swapped = closed_form_decomposition(
        s, std::vector<std::string>{"max(x1,0)*xh2 + min(x1,0)*x2 + w1", "x1 + 1"});
    const auto bad = check_decomposition(swapped, check_opts(states));
    CHECK(bad.consistency_residual <= 1e-12);
    CHECK(bad.total_violations() > 0);
    CHECK_FALSE(bad.witnesses.empty());
    CHECK(bad.witnesses.size() <= 10);

    // increasing in its own hatted coordinate
    const auto pinned = closed_form_decomposition(
        s, std::vector<std::string>{"max(x1,0)*x2 + min(x1,0)*xh2 + w1 + (xh1 - x1)", "x1 + 1"});
    const auto r = check_decomposition(pinned, check_opts(states));
    CHECK(r.violations[3] > 0);

    // disturbance entering negatively without a hat swap
    const auto wrong_w = closed_form_decomposition(
        s, std::vector<std::string>{"max(x1,0)*x2 + min(x1,0)*xh2 + 2*wh1 - w1", "x1 + 1"});
    CHECK(check_decomposition(wrong_w, check_opts(states)).violations[4] > 0);
}

TEST_CASE("combine")
{
    const auto s = presets::bilinear_system();
    const auto tight = tight_decomposition(s);
    const auto a = jacobian_sign_decomposition(s, Box(v2(0, -1), v2(1, 1)), 500);
    const auto b = jacobian_sign_decomposition(s, Box(v2(0.5, -2), v2(2, 2)), 500);
    const auto ab = combine(a, b);
    CHECK(ab.method() == DecompMethod::Combined);
    const auto aa = combine(a, a);
    const auto with_tight = combine(tight, a);

    Rng rng(10);
    const Box overlap(v2(0.5, -1), v2(1, 1));
    for (int k = 0; k < 1000; ++k) {
        const Probe p = probe(rng, overlap, s->disturbance(), k % 2 == 0);
        const Vector va = a(p.x, p.w, p.xh, p.wh);
        const Vector vb = b(p.x, p.w, p.xh, p.wh);
        const Vector vab = ab(p.x, p.w, p.xh, p.wh);
        if (p.lower)
            CHECK(vab == va.cwiseMax(vb));
        else
            CHECK(vab == va.cwiseMin(vb));
        CHECK(aa(p.x, p.w, p.xh, p.wh) == va);
        CHECK(with_tight(p.x, p.w, p.xh, p.wh) == tight(p.x, p.w, p.xh, p.wh));
    }

    const auto other = presets::cubic_system();
    CHECK_THROWS_AS(combine(tight, tight_decomposition(other)), MismatchError);
}

TEST_CASE("build_decomposition follows the recipe")
{
    const auto s = presets::bilinear_system();
    CHECK(build_decomposition(s, {}).method() == DecompMethod::Tight);
    DecompositionSpec js{DecompMethod::JacobianSign, Box(v2(0, -1), v2(1, 1)), 200, {}};
    CHECK(build_decomposition(s, js).method() == DecompMethod::JacobianSign);
    DecompositionSpec missing{DecompMethod::Monotone, std::nullopt, 200, {}};
    CHECK_THROWS_AS(build_decomposition(s, missing), ConfigError);
    DecompositionSpec cf{DecompMethod::ClosedForm, std::nullopt, 0, {kTightBilinear[0], kTightBilinear[1]}};
    CHECK(build_decomposition(s, cf).method() == DecompMethod::ClosedForm);
    CHECK(decomp_method_from_string("jacobian_sign") == DecompMethod::JacobianSign);
    CHECK_THROWS_AS(decomp_method_from_string("magic"), ConfigError);
}

// ---------------------------------------------------------------- properties

TEST_CASE("every constructed decomposition is consistent and sign-correct")
{
    struct Case {
        const char* name;
        Decomposition d;
        Box box;
        double consistency;
    };
    const auto bil = presets::bilinear_system();
    const auto t = t1_system();
    const Box wide(v2(-2, -2), v2(2, 2));
    const Box pos(v2(0, -1), v2(0.75, 1));
    std::vector<Case> cases{
        {"tight bilinear", tight_decomposition(bil), wide, 1e-6},
        {"tight cubic", tight_decomposition(presets::cubic_system()), wide, 1e-6},
        {"tight trig", tight_decomposition(presets::trig_system()), wide, 1e-6},
        {"tight T1", tight_decomposition(t), wide, 1e-6},
        {"jacobian bilinear", jacobian_sign_decomposition(bil, pos, 500), pos, 1e-9},
        {"monotone T1", monotone_decomposition(t, wide, 500), wide, 1e-9},
        {"closed bilinear",
         closed_form_decomposition(bil, std::vector<std::string>(std::begin(kTightBilinear), std::end(kTightBilinear))),
         wide, 1e-9},
        {"combined", combine(tight_decomposition(bil), jacobian_sign_decomposition(bil, pos, 500)), pos, 1e-6},
    };
    for (const auto& c : cases) {
        const std::string name = c.name;
        CAPTURE(name);
        const auto r = check_decomposition(c.d, check_opts(c.box));
        CHECK(r.consistency_residual <= c.consistency);
        CHECK(r.total_violations() == 0);
    }
}

TEST_CASE("tight dominates other valid decompositions")
{
    const auto bil = presets::bilinear_system();
    const Box pos(v2(0, -1), v2(0.75, 1));
    const auto tight = tight_decomposition(bil);
    const auto js = jacobian_sign_decomposition(bil, pos, 500);
    const auto t = t1_system();
    const auto tight_t = tight_decomposition(t);
    const auto mono_t = monotone_decomposition(t, Box(v2(-2, -2), v2(2, 2)), 500);

    Rng rng(12);
    for (int k = 0; k < 1000; ++k) {
        const Probe p = probe(rng, pos, bil->disturbance(), k % 2 == 0);
        const Vector a = tight(p.x, p.w, p.xh, p.wh);
        const Vector b = js(p.x, p.w, p.xh, p.wh);
        const Probe q = probe(rng, Box(v2(-2, -2), v2(2, 2)), t->disturbance(), k % 2 == 0);
        const Vector c = tight_t(q.x, q.w, q.xh, q.wh);
        const Vector e = mono_t(q.x, q.w, q.xh, q.wh);
        for (int i = 0; i < 2; ++i) {
            if (p.lower)
                CHECK(a[i] >= b[i] - 1e-7);
            else
                CHECK(a[i] <= b[i] + 1e-7);
            if (q.lower)
                CHECK(c[i] >= e[i] - 1e-7);
            else
                CHECK(c[i] <= e[i] + 1e-7);
        }
    }
}
