#pragma once

// Planar predicates used by meshing, crack cutting and assembly.

#include "crackfem/core.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace crackfem {

using TrianglePoints = std::array<Point, 3>;

struct Segment {
    Point a;
    Point b;

    [[nodiscard]] double length() const { return (b - a).norm(); }
    [[nodiscard]] Point midpoint() const { return 0.5 * (a + b); }
};

struct Box {
    Point lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Point hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

    void extend(const Point& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    [[nodiscard]] double diameter() const { return (hi - lo).norm(); }
    [[nodiscard]] bool contains(const Point& p, double tol) const {
        return p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol &&
               p.y() <= hi.y() + tol;
    }
};

inline double signed_area(const Point& a, const Point& b, const Point& c) {
    return 0.5 * cross(b - a, c - a);
}

inline double signed_area(const TrianglePoints& t) { return signed_area(t[0], t[1], t[2]); }

/// Longest edge length.
inline double diameter(const TrianglePoints& t) {
    return std::max({(t[1] - t[0]).norm(), (t[2] - t[1]).norm(), (t[0] - t[2]).norm()});
}

/// Smallest interior angle in degrees.
inline double min_angle_deg(const TrianglePoints& t) {
    double best = 180.0;
    for (int i = 0; i < 3; ++i) {
        const Vec2 u = t[(i + 1) % 3] - t[i];
        const Vec2 v = t[(i + 2) % 3] - t[i];
        const double ang = std::atan2(std::abs(cross(u, v)), u.dot(v));
        best = std::min(best, ang * 180.0 / M_PI);
    }
    return best;
}

inline Eigen::Vector3d barycentric(const TrianglePoints& t, const Point& x) {
    const double area = signed_area(t);
    Eigen::Vector3d lambda;
    lambda[0] = signed_area(x, t[1], t[2]) / area;
    lambda[1] = signed_area(t[0], x, t[2]) / area;
    lambda[2] = 1.0 - lambda[0] - lambda[1];
    return lambda;
}

/// Closed containment; `tol` is an absolute distance.
inline bool point_in_triangle(const TrianglePoints& t, const Point& x, double tol) {
    const double orient = signed_area(t) >= 0.0 ? 1.0 : -1.0;
    for (int k = 0; k < 3; ++k) {
        const Vec2 e = t[(k + 1) % 3] - t[k];
        const double len = e.norm();
        if (len == 0.0) continue;
        if (orient * cross(e, x - t[k]) / len < -tol) return false;
    }
    return true;
}

inline double point_segment_distance(const Point& x, const Point& a, const Point& b) {
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0) return (x - a).norm();
    const double s = std::clamp((x - a).dot(d) / len2, 0.0, 1.0);
    return (x - (a + s * d)).norm();
}

/// Parameter interval [s0, s1] of p + s (q - p) lying in the closed triangle.
struct ClipInterval {
    double s0;
    double s1;
};

/// Clips segment pq against the closed triangle. Containment decisions use
/// the absolute tolerance `tol`; crossing parameters are the exact line/edge
/// intersections so that points on an edge land on it.
inline std::optional<ClipInterval> clip_segment(const Point& p, const Point& q,
                                                const TrianglePoints& tri, double tol) {
    const Vec2 d = q - p;
    const double orient = signed_area(tri) >= 0.0 ? 1.0 : -1.0;
    const double dlen = d.norm();
    double lo = 0.0;
    double hi = 1.0;
    // Tolerance-widened bounds decide emptiness.
    double lo_tol = 0.0;
    double hi_tol = 1.0;
    for (int k = 0; k < 3; ++k) {
        const Vec2 e = tri[(k + 1) % 3] - tri[k];
        const double elen = e.norm();
        if (elen == 0.0) continue;
        const double g0 = orient * cross(e, p - tri[k]) / elen;
        const double g1 = orient * cross(e, d) / elen;
        if (std::abs(g1) <= tol * 1e-3) {
            if (g0 < -tol) return std::nullopt;
            continue;
        }
        const double exact = -g0 / g1;
        const double widened = (-tol - g0) / g1;
        if (g1 > 0.0) {
            lo = std::max(lo, exact);
            lo_tol = std::max(lo_tol, widened);
        } else {
            hi = std::min(hi, exact);
            hi_tol = std::min(hi_tol, widened);
        }
    }
    if (lo_tol > hi_tol) return std::nullopt;
    lo = std::clamp(lo, 0.0, 1.0);
    hi = std::clamp(hi, 0.0, 1.0);
    if (lo > hi) {
        // Touching within tolerance: collapse to a single point.
        const double mid = dlen > 0.0 ? 0.5 * (lo + hi) : 0.0;
        lo = hi = mid;
    }
    return ClipInterval{lo, hi};
}

/// Portion of segment pq inside the closed triangle. The result is
/// independent (as a point set, bitwise) of the order of p and q and is
/// oriented from the p side to the q side. A touching contact yields a
/// zero-length segment.
inline std::optional<Segment> segment_triangle_intersection(const Point& p, const Point& q,
                                                            const TrianglePoints& tri,
                                                            double tol) {
    const bool swapped = (q.x() < p.x()) || (q.x() == p.x() && q.y() < p.y());
    const Point& first = swapped ? q : p;
    const Point& second = swapped ? p : q;
    const auto clip = clip_segment(first, second, tri, tol);
    if (!clip) return std::nullopt;
    const Vec2 d = second - first;
    const Point a = clip->s0 == 0.0 ? first : Point(first + clip->s0 * d);
    const Point b = clip->s1 == 1.0 ? second : Point(first + clip->s1 * d);
    if (swapped) return Segment{b, a};
    return Segment{a, b};
}

}  // namespace crackfem
