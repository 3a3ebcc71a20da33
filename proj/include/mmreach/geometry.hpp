#pragma once

#include "mmreach/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mmreach {

/// Absolute tolerance used for parallelotope membership in transformed
/// coordinates.
inline constexpr double kMembershipTol = 1e-12;

/// Componentwise order: true iff a_i <= b_i for every i.
bool leq(std::span<const double> a, std::span<const double> b);
bool leq(const Vector& a, const Vector& b);

/// Hyperrectangle [lo, hi]. Entries are finite and lo <= hi componentwise.
class Box {
public:
    Box() = default;
    Box(Vector lo, Vector hi);

    static Box point(const Vector& x) { return Box(x, x); }

    Eigen::Index dim() const noexcept { return lo_.size(); }
    const Vector& lo() const noexcept { return lo_; }
    const Vector& hi() const noexcept { return hi_; }

    Vector center() const { return 0.5 * (lo_ + hi_); }
    Vector widths() const { return hi_ - lo_; }
    double volume() const { return widths().prod(); }

    bool contains(const Vector& x, double tol = 0.0) const;
    bool contains(const Box& other, double tol = 0.0) const;

    /// Smallest signed distance from x to the faces (positive inside).
    double margin(const Vector& x) const;

    /// Box scaled about its center by `factor`.
    Box scaled(double factor) const;

    bool operator==(const Box& other) const { return lo_ == other.lo_ && hi_ == other.hi_; }

private:
    Vector lo_;
    Vector hi_;
};

/// Parallelotope [lo, hi]_T = { x | shape^-1 x in coords }.
class Parallelotope {
public:
    Parallelotope(Matrix shape, Box coords);

    Eigen::Index dim() const noexcept { return coords_.dim(); }
    const Matrix& shape() const noexcept { return shape_; }
    const Matrix& shape_inverse() const noexcept { return inverse_; }
    const Box& coords() const noexcept { return coords_; }

    Vector to_coords(const Vector& x) const { return inverse_ * x; }
    bool contains(const Vector& x, double tol = kMembershipTol) const;
    double margin(const Vector& x) const { return coords_.margin(to_coords(x)); }
    double volume() const { return std::abs(shape_.determinant()) * coords_.volume(); }

private:
    Matrix shape_;
    Matrix inverse_;
    Box coords_;
};

/// Pair (lower, upper) in R^2n with lower <= upper, the domain of embedding
/// systems. Ordered by the southeast order.
class EmbeddingState {
public:
    EmbeddingState(Vector lower, Vector upper);

    Eigen::Index dim() const noexcept { return lower_.size(); }
    const Vector& lower() const noexcept { return lower_; }
    const Vector& upper() const noexcept { return upper_; }
    Box rect() const { return Box(lower_, upper_); }

private:
    Vector lower_;
    Vector upper_;
};

/// Southeast order: a.lower <= b.lower and b.upper <= a.upper, which for
/// valid states means rect(b) is inside rect(a).
bool se_leq(const EmbeddingState& a, const EmbeddingState& b);

using Point2 = Eigen::Vector2d;

/// Polygon in the plane, stored counterclockwise starting from the
/// lexicographically smallest vertex, with duplicate and collinear vertices
/// removed.
class Polygon2D {
public:
    Polygon2D() = default;
    explicit Polygon2D(std::vector<Point2> vertices);

    const std::vector<Point2>& vertices() const noexcept { return vertices_; }
    std::size_t size() const noexcept { return vertices_.size(); }
    bool is_convex() const;
    bool contains(const Point2& p, double tol) const;
    /// Smallest signed distance to the edge lines (positive inside).
    double margin(const Point2& p) const;

private:
    std::vector<Point2> vertices_;
};

/// Images under the shape matrix of the 2^n corners of the coordinate box;
/// for n = 2 in counterclockwise order. Throws SizeError for n > 20.
std::vector<Vector> vertices(const Parallelotope& p);

/// Smallest coordinate box B with shape^-1 v in B for every vertex v.
Box bounding_coords(std::span<const Vector> vertices, const Matrix& shape);

Polygon2D to_polygon(const Parallelotope& p);

/// Convex intersection by successive half-plane clipping. Returns nullopt when
/// the intersection has zero area. Throws GeometryError on non-convex input.
std::optional<Polygon2D> clip_intersection(std::span<const Polygon2D> polys);

/// Convex hull of a planar point set (monotone chain).
Polygon2D convex_hull(std::span<const Point2> points);

/// Shoelace area; 0 for fewer than 3 vertices.
double area(const Polygon2D& p);

} // namespace mmreach
