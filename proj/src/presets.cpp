#include "mmreach/presets.hpp"

#include "mmreach/linalg.hpp"

#include <cmath>
#include <numbers>

namespace mmreach::presets {

namespace {

Box scalar_box(double lo, double hi) { return Box(Vector::Constant(1, lo), Vector::Constant(1, hi)); }

Vector vec2(double a, double b) { return Vector{{a, b}}; }

Matrix mat2(double a, double b, double c, double d)
{
    Matrix t(2, 2);
    t << a, b, c, d;
    return t;
}

} // namespace

SystemPtr bilinear_system()
{
    return std::make_shared<const SystemDef>(
        SystemDef::from_strings(2, 1, {"x1*x2 + w1", "x1 + 1"}, scalar_box(0.0, 0.25), "bilinear"));
}

SystemPtr cubic_system()
{
    return std::make_shared<const SystemDef>(
        SystemDef::from_strings(2, 1, {"x1 - x2 + x2^3 + w1", "x1 - x2"}, scalar_box(-1.0, 1.0), "cubic"));
}

SystemPtr trig_system()
{
    return std::make_shared<const SystemDef>(SystemDef::from_strings(
        2, 1, {"x2 + sin(x2) + w1", "x1 + cos(x1) + 1"}, scalar_box(0.0, 0.5), "trigonometric"));
}

Parallelotope example1_initial_set()
{
    return Parallelotope(mat2(1, -2, 1, 1), Box(vec2(0.0, -0.25), vec2(0.25, 0.0)));
}

Box example2_outer_box() { return Box(vec2(0.0, -0.25), vec2(0.75, 0.25)); }

Matrix example3_t1() { return mat2(1, 1, 0, 1); }
Matrix example3_t2() { return mat2(1, 4, -1, 1); }
Vector example3_x0() { return vec2(1.0, 1.0); }

std::vector<Vector> hexagon_vertices()
{
    std::vector<Vector> v;
    for (int i = 1; i <= 6; ++i)
        v.push_back(vec2(1.0 + std::cos(i * std::numbers::pi / 3.0), 1.0 + std::sin(i * std::numbers::pi / 3.0)));
    return v;
}

UnionInitialSet hexagon_disjoint_split()
{
    UnionInitialSet u;
    const Vector centre = vec2(1.0, 1.0);
    for (int i = 1; i <= 3; ++i) {
        const double a = 2.0 * std::numbers::pi * (i - 1) / 3.0;
        const double b = 2.0 * std::numbers::pi * i / 3.0;
        const Matrix t = mat2(-std::cos(a), std::cos(b), -std::sin(a), std::sin(b));
        const Vector shift = checked_inverse(t) * centre;
        u.members.emplace_back(t, Box(vec2(-1.0, 0.0) + shift, vec2(0.0, 1.0) + shift));
    }
    return u;
}

UnionInitialSet hexagon_overlap_split()
{
    const auto v = hexagon_vertices();
    UnionInitialSet u;
    for (int i = 0; i < 3; ++i) {
        const std::vector<Vector> corners{v[i], v[i + 1], v[i + 3], v[(i + 4) % 6]};
        const Vector e1 = v[i + 1] - v[i];
        const Vector e2 = (v[(i + 4) % 6] - v[i]).normalized();
        Matrix t(2, 2);
        t.col(0) = e1;
        t.col(1) = e2;
        u.members.emplace_back(t, bounding_coords(corners, t));
    }
    return u;
}

} // namespace mmreach::presets
