#include "mmreach/geometry.hpp"

#include "mmreach/errors.hpp"
#include "mmreach/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace mmreach {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what)
{
    if (a != b)
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                             std::to_string(b) + ")");
}

double cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

double signed_area(const std::vector<Point2>& v)
{
    double s = 0.0;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++)
        s += cross(v[j], v[i]);
    return 0.5 * s;
}

// Removes repeated and collinear vertices until none remain.
void simplify(std::vector<Point2>& v)
{
    constexpr double kDupTol = 1e-12;
    constexpr double kSinTol = 1e-12;
    bool changed = true;
    while (changed && v.size() >= 2) {
        changed = false;
        for (std::size_t i = 0; i < v.size() && v.size() >= 2; ++i) {
            const std::size_t j = (i + 1) % v.size();
            if ((v[i] - v[j]).lpNorm<Eigen::Infinity>() <= kDupTol) {
                v.erase(v.begin() + static_cast<std::ptrdiff_t>(j));
                changed = true;
                break;
            }
        }
        if (changed || v.size() < 3)
            continue;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Point2& prev = v[(i + v.size() - 1) % v.size()];
            const Point2& next = v[(i + 1) % v.size()];
            const Point2 a = v[i] - prev;
            const Point2 b = next - v[i];
            if (std::abs(cross(a, b)) <= kSinTol * a.norm() * b.norm()) {
                v.erase(v.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
                break;
            }
        }
    }
}

} // namespace

bool leq(std::span<const double> a, std::span<const double> b)
{
    require_same_length(a.size(), b.size(), "leq");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(a[i] <= b[i]))
            return false;
    return true;
}

bool leq(const Vector& a, const Vector& b) { return leq(view(a), view(b)); }

// ---------------------------------------------------------------- Box

Box::Box(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi))
{
    require_same_length(static_cast<std::size_t>(lo_.size()), static_cast<std::size_t>(hi_.size()), "Box");
    if (!lo_.allFinite() || !hi_.allFinite())
        throw GeometryError("Box endpoints must be finite");
    if (!leq(lo_, hi_))
        throw GeometryError("Box requires lo <= hi componentwise");
}

bool Box::contains(const Vector& x, double tol) const
{
    require_same_length(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(dim()), "Box::contains");
    for (Eigen::Index i = 0; i < dim(); ++i)
        if (!(x[i] >= lo_[i] - tol && x[i] <= hi_[i] + tol))
            return false;
    return true;
}

bool Box::contains(const Box& other, double tol) const
{
    return contains(other.lo_, tol) && contains(other.hi_, tol);
}

double Box::margin(const Vector& x) const
{
    require_same_length(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(dim()), "Box::margin");
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < dim(); ++i)
        m = std::min({m, x[i] - lo_[i], hi_[i] - x[i]});
    if (std::isnan(m))
        return -std::numeric_limits<double>::infinity();
    return m;
}

Box Box::scaled(double factor) const
{
    const Vector c = center();
    const Vector half = 0.5 * factor * widths();
    return Box(c - half, c + half);
}

// ---------------------------------------------------------------- Parallelotope

Parallelotope::Parallelotope(Matrix shape, Box coords)
    : shape_(std::move(shape)), inverse_(checked_inverse(shape_)), coords_(std::move(coords))
{
    if (shape_.rows() != coords_.dim())
        throw DimensionError("Parallelotope: shape is " + std::to_string(shape_.rows()) + "x" +
                             std::to_string(shape_.cols()) + " but coordinates have dimension " +
                             std::to_string(coords_.dim()));
}

bool Parallelotope::contains(const Vector& x, double tol) const
{
    require_same_length(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(dim()),
                        "Parallelotope::contains");
    return coords_.contains(to_coords(x), tol);
}

// ---------------------------------------------------------------- EmbeddingState

EmbeddingState::EmbeddingState(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper))
{
    require_same_length(static_cast<std::size_t>(lower_.size()), static_cast<std::size_t>(upper_.size()),
                        "EmbeddingState");
    if (!leq(lower_, upper_))
        throw GeometryError("EmbeddingState requires lower <= upper");
}

bool se_leq(const EmbeddingState& a, const EmbeddingState& b)
{
    require_same_length(static_cast<std::size_t>(a.dim()), static_cast<std::size_t>(b.dim()), "se_leq");
    return leq(a.lower(), b.lower()) && leq(b.upper(), a.upper());
}

// ---------------------------------------------------------------- Polygon2D

Polygon2D::Polygon2D(std::vector<Point2> vertices) : vertices_(std::move(vertices))
{
    for (const auto& p : vertices_)
        if (!p.allFinite())
            throw GeometryError("polygon vertex is not finite");
    simplify(vertices_);
    if (vertices_.size() >= 3 && signed_area(vertices_) < 0.0)
        std::reverse(vertices_.begin(), vertices_.end());
    auto smallest = std::min_element(vertices_.begin(), vertices_.end(), [](const Point2& a, const Point2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    std::rotate(vertices_.begin(), smallest, vertices_.end());
}

bool Polygon2D::is_convex() const
{
    const std::size_t n = vertices_.size();
    if (n < 3)
        return true;
    double turning = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = vertices_[(i + 1) % n] - vertices_[i];
        const Point2 b = vertices_[(i + 2) % n] - vertices_[(i + 1) % n];
        const double c = cross(a, b);
        if (c < -1e-9 * a.norm() * b.norm())
            return false;
        turning += std::atan2(c, a.dot(b));
    }
    // A star-shaped vertex order can keep every turn positive while winding twice.
    return std::abs(turning - 2.0 * std::numbers::pi) < 1e-6;
}

double Polygon2D::margin(const Point2& p) const
{
    const std::size_t n = vertices_.size();
    if (n < 3)
        return -std::numeric_limits<double>::infinity();
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = vertices_[i];
        const Point2 e = vertices_[(i + 1) % n] - a;
        m = std::min(m, cross(e, p - a) / e.norm());
    }
    return m;
}

bool Polygon2D::contains(const Point2& p, double tol) const { return margin(p) >= -tol; }

// ---------------------------------------------------------------- operations

std::vector<Vector> vertices(const Parallelotope& p)
{
    const auto n = p.dim();
    if (n > 20)
        throw SizeError("vertex enumeration limited to n <= 20, got n = " + std::to_string(n));
    const Box& c = p.coords();
    std::vector<Vector> out;
    if (n == 2) {
        const double lx = c.lo()[0], hx = c.hi()[0], ly = c.lo()[1], hy = c.hi()[1];
        for (const auto& [a, b] : {std::pair{lx, ly}, {hx, ly}, {hx, hy}, {lx, hy}})
            out.push_back(p.shape() * Eigen::Vector2d(a, b));
        if (p.shape().determinant() < 0.0)
            std::reverse(out.begin(), out.end());
        return out;
    }
    const std::size_t count = std::size_t{1} << n;
    out.reserve(count);
    Vector corner(n);
    for (std::size_t mask = 0; mask < count; ++mask) {
        for (Eigen::Index i = 0; i < n; ++i)
            corner[i] = (mask >> i) & 1U ? c.hi()[i] : c.lo()[i];
        out.push_back(p.shape() * corner);
    }
    return out;
}

Box bounding_coords(std::span<const Vector> verts, const Matrix& shape)
{
    if (verts.empty())
        throw GeometryError("bounding_coords needs at least one vertex");
    const Matrix inv = checked_inverse(shape);
    Vector lo = Vector::Constant(shape.rows(), std::numeric_limits<double>::infinity());
    Vector hi = -lo;
    for (const auto& v : verts) {
        require_same_length(static_cast<std::size_t>(v.size()), static_cast<std::size_t>(shape.rows()),
                            "bounding_coords");
        const Vector y = inv * v;
        lo = lo.cwiseMin(y);
        hi = hi.cwiseMax(y);
    }
    return Box(lo, hi);
}

Polygon2D to_polygon(const Parallelotope& p)
{
    if (p.dim() != 2)
        throw DimensionError("to_polygon requires n = 2");
    std::vector<Point2> pts;
    for (const auto& v : vertices(p))
        pts.emplace_back(v[0], v[1]);
    return Polygon2D(std::move(pts));
}

std::optional<Polygon2D> clip_intersection(std::span<const Polygon2D> polys)
{
    if (polys.empty())
        throw GeometryError("clip_intersection needs at least one polygon");
    for (std::size_t k = 0; k < polys.size(); ++k)
        if (!polys[k].is_convex())
            throw GeometryError("clip_intersection: polygon " + std::to_string(k) + " is not convex");

    std::vector<Point2> subject = polys[0].vertices();
    for (std::size_t k = 1; k < polys.size() && subject.size() >= 3; ++k) {
        const auto& clip = polys[k].vertices();
        if (clip.size() < 3)
            return std::nullopt;
        for (std::size_t e = 0; e < clip.size() && !subject.empty(); ++e) {
            const Point2& a = clip[e];
            const Point2 dir = clip[(e + 1) % clip.size()] - a;
            const double len = dir.norm();
            auto side = [&](const Point2& p) { return cross(dir, p - a) / len; };

            std::vector<Point2> out;
            out.reserve(subject.size() + 2);
            for (std::size_t i = 0; i < subject.size(); ++i) {
                const Point2& cur = subject[i];
                const Point2& nxt = subject[(i + 1) % subject.size()];
                const double sc = side(cur);
                const double sn = side(nxt);
                if (sc >= 0.0)
                    out.push_back(cur);
                if ((sc >= 0.0) != (sn >= 0.0)) {
                    const double t = sc / (sc - sn);
                    out.push_back(cur + t * (nxt - cur));
                }
            }
            subject = std::move(out);
        }
    }
    Polygon2D result(std::move(subject));
    if (result.size() < 3 || area(result) <= 0.0)
        return std::nullopt;
    return result;
}

double area(const Polygon2D& p)
{
    if (p.size() < 3)
        return 0.0;
    return std::abs(signed_area(p.vertices()));
}

} // namespace mmreach

namespace mmreach {

Polygon2D convex_hull(std::span<const Point2> points)
{
    std::vector<Point2> pts(points.begin(), points.end());
    std::sort(pts.begin(), pts.end(), [](const Point2& a, const Point2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    if (pts.size() < 3)
        return Polygon2D(std::move(pts));
    auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Point2> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0)
            --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0)
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return Polygon2D(std::move(hull));
}

} // namespace mmreach
