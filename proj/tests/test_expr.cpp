#include "support.hpp"

#include "mmreach/errors.hpp"
#include "mmreach/expr.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>

using namespace mmreach;
using namespace testing;

namespace {

double ev(const std::string& src, const Vector& x, const Vector& w)
{
    return Expr::parse(src, static_cast<int>(x.size()), static_cast<int>(w.size())).eval(view(x), view(w));
}

} // namespace

TEST_CASE("parse and evaluate field expressions")
{
    CHECK(ev("x1*x2 + w1", v2(2, 3), v1(0.25)) == 6.25);
    CHECK(ev("x2^3 + w1", v2(0, 2), v1(0.5)) == 8.5);
    CHECK(ev("x1 + cos(x1) + 1", v2(0, 7), v1(0)) == 2.0);
    CHECK(ev("x2 + sin(x2) + w1", v2(0, 0), v1(0)) == 0.0);
    CHECK(ev("  x1*  x2+w1 ", v2(2, 3), v1(1)) == 7.0);
}

TEST_CASE("precedence and associativity")
{
    const Vector x = v2(2, 3), w = v1(0);
    CHECK(ev("-x1^2", x, w) == -4.0);  // ^ binds tighter than unary minus
    CHECK(ev("2^3^2", x, w) == 512.0); // right associative
    CHECK(ev("x2 - x1 - 1", x, w) == 0.0);
    CHECK(ev("12 / x1 / x2", x, w) == 2.0);
    CHECK(ev("1 + x1 * x2", x, w) == 7.0);
    CHECK(ev("(1 + x1) * x2", x, w) == 9.0);
    CHECK(ev("2^-1", x, w) == 0.5);
    CHECK(ev("--x1", x, w) == 2.0);
    CHECK(ev("min(x1, x2, 1) + max(x1, -x2)", x, w) == 3.0);
    CHECK(ev("abs(-x2) + sqrt(4) + exp(0) + tan(0)", x, w) == 6.0);
    CHECK(ev("2*pi", x, w) == doctest::Approx(2 * M_PI));
    CHECK(ev("1.5e1 + .5", x, w) == 15.5);
}

TEST_CASE("parse errors carry a location")
{
    CHECK_THROWS_AS(Expr::parse("x3", 2, 1), ParseError);
    CHECK_THROWS_AS(Expr::parse("w2", 2, 1), ParseError);
    CHECK_THROWS_AS(Expr::parse("x0", 2, 1), ParseError);
    CHECK_THROWS_AS(Expr::parse("y1 + 1", 2, 1), ParseError);
    CHECK_THROWS_AS(Expr::parse("xh1", 2, 1), ParseError);
    CHECK_THROWS_AS(Expr::parse("", 2, 1), ParseError);
    CHECK_THROWS_AS(Expr::parse("sin x1", 2, 1), ParseError);
    CHECK_THROWS_AS(Expr::parse("min(x1)", 2, 1), ParseError);
    CHECK_THROWS_AS(Expr::parse("x1 +", 2, 1), ParseError);
    CHECK_THROWS_AS(Expr::parse("(x1", 2, 1), ParseError);
    try {
        Expr::parse("x1 + x3", 2, 1);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.column() == 6);
        CHECK(e.source() == "x1 + x3");
        CHECK(std::string(e.what()).find("x3") != std::string::npos);
    }
    try {
        Expr::parse("x1 * )", 2, 1);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.column() == 6);
        CHECK_FALSE(e.expected().empty());
    }
}

TEST_CASE("depth limit")
{
    std::string deep(300, '(');
    deep += "x1" + std::string(300, ')');
    CHECK_THROWS_AS(Expr::parse(deep, 1, 0), ParseError);
    std::string ok(200, '(');
    ok += "x1" + std::string(200, ')');
    CHECK(Expr::parse(ok, 1, 0).eval(view(v1(3)), {}) == 3.0);

    // a left-leaning sum of k terms is a tree of depth k
    auto chain = [](int k) {
        std::string s = "x1";
        for (int i = 1; i < k; ++i)
            s += "+x1";
        return s;
    };
    CHECK(Expr::parse(chain(256), 1, 0).eval(view(v1(1)), {}) == 256.0);
    CHECK_THROWS_AS(Expr::parse(chain(257), 1, 0), ParseError);
}

TEST_CASE("non-finite results are reported")
{
    CHECK_THROWS_AS(ev("1/x1", v2(0, 1), v1(0)), NumericError);
    CHECK_THROWS_AS(ev("sqrt(x1)", v2(-1, 1), v1(0)), NumericError);
    try {
        ev("x2 + 1/x1", v2(0, 1), v1(0));
        FAIL("expected a numeric error");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("1 / x1") != std::string::npos);
    }
}

TEST_CASE("decomposition expressions see hatted variables")
{
    const Expr e = Expr::parse_decomposition("max(x1,0)*x2 + min(x1,0)*xh2 + w1", 2, 1);
    const Vector x = v2(-1, 0), xh = v2(0, 1), w = v1(0), wh = v1(0.25);
    CHECK(e.eval(Bindings{view(x), view(w), view(xh), view(wh)}) == -1.0);
    CHECK(Expr::parse_decomposition("wh1 - xh1", 2, 1).eval(Bindings{view(x), view(w), view(xh), view(wh)}) == 0.25);
}

TEST_CASE("partial derivatives by central differences")
{
    const Vector w = v1(0);
    CHECK(partial(Expr::parse("x1*x2", 2, 1), VarKind::State, 1, view(v2(3, 5)), view(w)) ==
          doctest::Approx(3.0).epsilon(1e-7));
    CHECK(std::abs(partial(Expr::parse("x1 + w1", 2, 1), VarKind::Disturbance, 0, view(v2(7, -2)), view(w)) - 1.0) <
          1e-9);
    CHECK(std::abs(partial(Expr::parse("x2^3", 2, 1), VarKind::State, 1, view(v2(0, 1)), view(w)) - 3.0) < 1e-5);
    CHECK_THROWS_AS(partial(Expr::parse("sqrt(x1)", 2, 1), VarKind::State, 0, view(v2(0, 1)), view(w)), NumericError);
    CHECK_THROWS(partial(Expr::parse("x1", 2, 1), VarKind::State, 0, view(v2(0, 1)), view(w), 0.0));
}

TEST_CASE("partial matches hand derivatives")
{
    struct Case {
        const char* src;
        VarKind kind;
        int j;
        std::function<double(const Vector&, const Vector&)> d;
    };
    const std::vector<Case> cases{
        {"x1*x2 + w1", VarKind::State, 0, [](auto& x, auto&) { return x[1]; }},
        {"x1*x2 + w1", VarKind::Disturbance, 0, [](auto&, auto&) { return 1.0; }},
        {"x1 - x2 + x2^3 + w1", VarKind::State, 1, [](auto& x, auto&) { return -1 + 3 * x[1] * x[1]; }},
        {"x2 + sin(x2) + w1", VarKind::State, 1, [](auto& x, auto&) { return 1 + std::cos(x[1]); }},
        {"x1 + cos(x1) + 1", VarKind::State, 0, [](auto& x, auto&) { return 1 - std::sin(x[0]); }},
        {"exp(x1*x2)", VarKind::State, 1, [](auto& x, auto&) { return x[0] * std::exp(x[0] * x[1]); }},
        {"x1^2*x2", VarKind::State, 0, [](auto& x, auto&) { return 2 * x[0] * x[1]; }},
        {"sqrt(1 + x1^2)", VarKind::State, 0, [](auto& x, auto&) { return x[0] / std::sqrt(1 + x[0] * x[0]); }},
        {"tan(x1/4)", VarKind::State, 0, [](auto& x, auto&) { return 0.25 / std::pow(std::cos(x[0] / 4), 2); }},
        {"x1/(1 + x2^2)", VarKind::State, 1,
         [](auto& x, auto&) { return -2 * x[0] * x[1] / std::pow(1 + x[1] * x[1], 2); }},
        {"w1^2*x1", VarKind::Disturbance, 0, [](auto& x, auto& w) { return 2 * w[0] * x[0]; }},
        {"sin(x1)*cos(x2)", VarKind::State, 1, [](auto& x, auto&) { return -std::sin(x[0]) * std::sin(x[1]); }},
        {"-x2^4", VarKind::State, 1, [](auto& x, auto&) { return -4 * std::pow(x[1], 3); }},
        {"(x1 + x2)^3", VarKind::State, 0, [](auto& x, auto&) { return 3 * std::pow(x[0] + x[1], 2); }},
        {"exp(-x1^2)", VarKind::State, 0, [](auto& x, auto&) { return -2 * x[0] * std::exp(-x[0] * x[0]); }},
        {"x1*w1 - x2*w1", VarKind::Disturbance, 0, [](auto& x, auto&) { return x[0] - x[1]; }},
        {"cos(x1 + w1)", VarKind::Disturbance, 0, [](auto& x, auto& w) { return -std::sin(x[0] + w[0]); }},
        {"3*x1 - 2*x2 + 5", VarKind::State, 1, [](auto&, auto&) { return -2.0; }},
        {"x2*exp(x2)", VarKind::State, 1, [](auto& x, auto&) { return (1 + x[1]) * std::exp(x[1]); }},
        {"1/(2 + sin(x1))", VarKind::State, 0,
         [](auto& x, auto&) { return -std::cos(x[0]) / std::pow(2 + std::sin(x[0]), 2); }},
    };
    REQUIRE(cases.size() == 20);
    Rng rng(2);
    for (const auto& c : cases) {
        const Expr e = Expr::parse(c.src, 2, 1);
        for (int k = 0; k < 20; ++k) {
            const Vector x = v2(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5));
            const Vector w = v1(rng.uniform(-1, 1));
            INFO(c.src);
            CHECK(std::abs(partial(e, c.kind, c.j, view(x), view(w)) - c.d(x, w)) <= 1e-5);
        }
    }
}

TEST_CASE("printing round-trips")
{
    const std::vector<std::string> sources{
        "x1*x2 + w1",           "x1 - x2 + x2^3 + w1", "x2 + sin(x2) + w1",         "-x1^2",
        "(-x1)^2",              "2^3^2",               "(2^3)^2",                    "x1 - (x2 - w1)",
        "x1/(x2*w1 + 3)",       "-(x1 + x2)",          "min(x1, max(x2, -1), w1)",   "0.1 + 1e-7*x1",
        "-2*x1",                "x1*-2",               "exp(-(x1 - x2)^2/0.3)",      "abs(x1)^0.5 - sqrt(abs(x2))",
        "x1 - -x2",             "1/3*pi",              "tan(x1)/(1 + cos(x2)^2)",    "x2^-2 + 1",
    };
    Rng rng(9);
    for (const auto& src : sources) {
        const Expr a = Expr::parse(src, 2, 1);
        const Expr b = Expr::parse(a.str(), 2, 1);
        INFO(src << " -> " << a.str());
        CHECK(b.str() == a.str());
        for (int k = 0; k < 100; ++k) {
            const Vector x = v2(rng.uniform(0.2, 2), rng.uniform(0.2, 2));
            const Vector w = v1(rng.uniform(0.2, 1));
            const double va = a.eval(view(x), view(w)), vb = b.eval(view(x), view(w));
            CHECK(std::abs(va - vb) <= 1e-15 * std::max(1.0, std::abs(va)));
        }
    }
}

TEST_CASE("negation flips every evaluation")
{
    const Expr e = Expr::parse("x1*x2 + w1 - sin(x1)", 2, 1);
    const Expr n = e.negated();
    Rng rng(4);
    for (int k = 0; k < 100; ++k) {
        const Vector x = v2(rng.uniform(-3, 3), rng.uniform(-3, 3)), w = v1(rng.uniform(-1, 1));
        CHECK(n.eval(view(x), view(w)) == -e.eval(view(x), view(w)));
    }
    CHECK(Expr::constant(2.5).eval({}, {}) == 2.5);
}
