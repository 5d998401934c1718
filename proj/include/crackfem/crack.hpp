#pragma once

// Crack networks: curve primitives, their polygonal sampling, the crack
// graph (nodes joined by polygonal chains) and the cutting of chains into
// per-triangle segments.

#include "crackfem/mesh.hpp"
#include "crackfem/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace crackfem {

using ScalarFunction = std::function<double(const Point&)>;

inline ScalarFunction constant_function(double value) {
    return [value](const Point&) { return value; };
}

// ---------------------------------------------------------------------------
// Curve primitives

struct LineCurve {
    Point a;
    Point b;
    bool operator==(const LineCurve&) const = default;
};

/// Circular arc, counterclockwise from start_angle to end_angle when
/// end_angle > start_angle and clockwise otherwise.
struct ArcCurve {
    Point center;
    double radius = 1.0;
    double start_angle = 0.0;
    double end_angle = 0.0;
    bool operator==(const ArcCurve&) const = default;
};

/// Full circle starting and ending at start_angle.
struct CircleCurve {
    Point center;
    double radius = 1.0;
    double start_angle = 0.0;
    bool operator==(const CircleCurve&) const = default;
};

/// Circular arc from `a` through `via` to `b`.
struct ArcThroughCurve {
    Point a;
    Point via;
    Point b;
    bool operator==(const ArcThroughCurve&) const = default;
};

struct PolylineCurve {
    std::vector<Point> points;
    bool operator==(const PolylineCurve&) const = default;
};

using Curve = std::variant<LineCurve, ArcCurve, CircleCurve, ArcThroughCurve, PolylineCurve>;

inline ArcCurve to_arc(const ArcThroughCurve& c) {
    // Circumcenter of (a, via, b).
    const Vec2 ab = c.via - c.a;
    const Vec2 ac = c.b - c.a;
    const double d = 2.0 * cross(ab, ac);
    if (std::abs(d) < 1e-14 * ab.squaredNorm())
        throw GeometryError("arc_through: the three points are collinear");
    const Vec2 off((ac.y() * ab.squaredNorm() - ab.y() * ac.squaredNorm()) / d,
                   (ab.x() * ac.squaredNorm() - ac.x() * ab.squaredNorm()) / d);
    const Point center = c.a + off;
    const double radius = off.norm();
    const double t0 = std::atan2(c.a.y() - center.y(), c.a.x() - center.x());
    double t1 = std::atan2(c.b.y() - center.y(), c.b.x() - center.x());
    // Orientation of a -> via -> b decides the sweep direction.
    const bool ccw = cross(ab, ac) > 0.0;
    if (ccw) {
        while (t1 <= t0) t1 += 2.0 * std::numbers::pi;
    } else {
        while (t1 >= t0) t1 -= 2.0 * std::numbers::pi;
    }
    return {center, radius, t0, t1};
}

namespace detail {

inline Point arc_point(const Point& center, double r, double theta) {
    return center + r * Vec2(std::cos(theta), std::sin(theta));
}

inline std::vector<Point> sample_arc(const ArcCurve& arc, double spacing) {
    const double sweep = arc.end_angle - arc.start_angle;
    const double len = std::abs(sweep) * arc.radius;
    const int n = std::max(1, static_cast<int>(std::ceil(len / spacing - 1e-12)));
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        const double theta = k == n ? arc.end_angle : arc.start_angle + sweep * k / n;
        pts.push_back(arc_point(arc.center, arc.radius, theta));
    }
    return pts;
}

inline void append_line(std::vector<Point>& pts, const Point& a, const Point& b, double spacing) {
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / spacing - 1e-12)));
    for (int k = 1; k <= n; ++k) pts.push_back(k == n ? b : Point(a + (b - a) * (static_cast<double>(k) / n)));
}

}  // namespace detail

inline double curve_length(const Curve& curve) {
    return std::visit(
        [](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, LineCurve>) {
                return (c.b - c.a).norm();
            } else if constexpr (std::is_same_v<T, ArcCurve>) {
                return std::abs(c.end_angle - c.start_angle) * c.radius;
            } else if constexpr (std::is_same_v<T, CircleCurve>) {
                return 2.0 * std::numbers::pi * c.radius;
            } else if constexpr (std::is_same_v<T, ArcThroughCurve>) {
                const ArcCurve arc = to_arc(c);
                return std::abs(arc.end_angle - arc.start_angle) * arc.radius;
            } else {
                double len = 0.0;
                for (std::size_t k = 1; k < c.points.size(); ++k) len += (c.points[k] - c.points[k - 1]).norm();
                return len;
            }
        },
        curve);
}

/// Polyline approximation whose parts all have arc length <= spacing.
/// Arcs and circles are split uniformly in angle, lines uniformly in length;
/// polyline inputs keep their vertices and subdivide long parts.
inline std::vector<Point> sample_curve(const Curve& curve, double spacing) {
    if (!(spacing > 0.0)) throw InvalidArgument("sample_curve: spacing must be positive");
    return std::visit(
        [spacing](const auto& c) -> std::vector<Point> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, LineCurve>) {
                std::vector<Point> pts{c.a};
                detail::append_line(pts, c.a, c.b, spacing);
                return pts;
            } else if constexpr (std::is_same_v<T, ArcCurve>) {
                return detail::sample_arc(c, spacing);
            } else if constexpr (std::is_same_v<T, CircleCurve>) {
                auto pts = detail::sample_arc(
                    {c.center, c.radius, c.start_angle, c.start_angle + 2.0 * std::numbers::pi}, spacing);
                pts.back() = pts.front();
                return pts;
            } else if constexpr (std::is_same_v<T, ArcThroughCurve>) {
                auto pts = detail::sample_arc(to_arc(c), spacing);
                pts.front() = c.a;
                pts.back() = c.b;
                return pts;
            } else {
                if (c.points.size() < 2) throw GeometryError("polyline needs at least two points");
                std::vector<Point> pts{c.points.front()};
                for (std::size_t k = 1; k < c.points.size(); ++k)
                    detail::append_line(pts, c.points[k - 1], c.points[k], spacing);
                return pts;
            }
        },
        curve);
}

// ---------------------------------------------------------------------------
// Crack graph

struct Chain {
    std::vector<Point> points;
    std::array<int, 2> nodes{0, 0};  // I_N(j)
    double a_gamma = 1.0;
    ScalarFunction f_gamma = constant_function(0.0);

    [[nodiscard]] double length() const {
        double len = 0.0;
        for (std::size_t k = 1; k < points.size(); ++k) len += (points[k] - points[k - 1]).norm();
        return len;
    }
    [[nodiscard]] bool closed() const { return points.size() > 2 && points.front() == points.back(); }
};

/// Graph of nodes x_i joined by polygonal chains Γ_j.
class CrackGraph {
public:
    CrackGraph() = default;

    /// Validates the chains against the nodes. Chain end points within `tol`
    /// of their node are snapped onto it exactly.
    CrackGraph(std::vector<Point> nodes, std::vector<Chain> chains, double tol)
        : nodes_(std::move(nodes)), chains_(std::move(chains)) {
        for (std::size_t j = 0; j < chains_.size(); ++j) {
            Chain& c = chains_[j];
            const std::string tag = "chain " + std::to_string(j);
            if (c.points.size() < 2) throw GeometryError(tag + ": needs at least two points");
            for (int end = 0; end < 2; ++end) {
                const int node = c.nodes[static_cast<std::size_t>(end)];
                if (node < 0 || static_cast<std::size_t>(node) >= nodes_.size())
                    throw GeometryError(tag + ": node index out of range");
                Point& p = end == 0 ? c.points.front() : c.points.back();
                if ((p - nodes_[static_cast<std::size_t>(node)]).norm() > tol)
                    throw GeometryError(tag + ": end point does not coincide with node " + std::to_string(node));
                p = nodes_[static_cast<std::size_t>(node)];
            }
            for (std::size_t k = 1; k < c.points.size(); ++k)
                if (c.points[k] == c.points[k - 1]) throw GeometryError(tag + ": repeated consecutive point");
            if (c.a_gamma < 0.0) throw GeometryError(tag + ": negative a_gamma");
        }
        incident_.assign(nodes_.size(), {});
        for (std::size_t j = 0; j < chains_.size(); ++j) {
            for (int node : chains_[j].nodes) {
                auto& inc = incident_[static_cast<std::size_t>(node)];
                if (inc.empty() || inc.back() != static_cast<int>(j)) inc.push_back(static_cast<int>(j));
            }
        }
    }

    [[nodiscard]] const std::vector<Point>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<Chain>& chains() const { return chains_; }
    [[nodiscard]] bool empty() const { return chains_.empty(); }

    /// I_N(j): the two node indices of chain j.
    [[nodiscard]] const std::array<int, 2>& chain_nodes(std::size_t j) const { return chains_[j].nodes; }
    /// I_G(i): chains having node i as an end point.
    [[nodiscard]] const std::vector<int>& incident_chains(std::size_t i) const { return incident_[i]; }

    [[nodiscard]] Box bounds() const {
        Box b;
        for (const auto& c : chains_)
            for (const auto& p : c.points) b.extend(p);
        return b;
    }

private:
    std::vector<Point> nodes_;
    std::vector<Chain> chains_;
    std::vector<std::vector<int>> incident_;
};

/// Description of one chain before sampling.
struct ChainSpec {
    std::array<int, 2> nodes{0, 0};
    Curve curve;
    double a_gamma = 1.0;
    ScalarFunction f_gamma = constant_function(0.0);
};

/// Samples each curve at `spacing` and assembles the graph.
inline CrackGraph build_crack_graph(std::vector<Point> nodes, const std::vector<ChainSpec>& specs,
                                    double spacing, double tol) {
    std::vector<Chain> chains;
    chains.reserve(specs.size());
    for (const auto& s : specs) chains.push_back({sample_curve(s.curve, spacing), s.nodes, s.a_gamma, s.f_gamma});
    return CrackGraph(std::move(nodes), std::move(chains), tol);
}

namespace detail {

/// Crossing-number test against a closed polyline.
inline bool inside_closed_polyline(const std::vector<Point>& poly, const Point& x) {
    bool inside = false;
    for (std::size_t k = 1; k < poly.size(); ++k) {
        const Point& a = poly[k - 1];
        const Point& b = poly[k];
        if ((a.y() > x.y()) != (b.y() > x.y())) {
            const double xc = a.x() + (x.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (x.x() < xc) inside = !inside;
        }
    }
    return inside;
}

}  // namespace detail

/// Distance from x to the crack. For a crack made of a single closed chain
/// the value is signed: positive in the enclosed region, negative outside.
/// For every other crack it is the unsigned distance.
inline double signed_distance_to_crack(const Point& x, const CrackGraph& crack) {
    if (crack.empty()) throw InvalidArgument("signed_distance_to_crack: empty crack");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : crack.chains())
        for (std::size_t k = 1; k < c.points.size(); ++k)
            best = std::min(best, point_segment_distance(x, c.points[k - 1], c.points[k]));
    if (crack.chains().size() == 1 && crack.chains().front().closed())
        return detail::inside_closed_polyline(crack.chains().front().points, x) ? best : -best;
    return best;
}

// ---------------------------------------------------------------------------
// Cutting chains by the mesh

struct CrackSegment {
    int triangle = -1;
    Segment seg;
    int chain = -1;
    double length = 0.0;
    double position = 0.0;  // arc length along the chain to seg.a
};

struct SegmentedCrack {
    /// Sorted by chain, then by position along the chain.
    std::vector<CrackSegment> segments;

    [[nodiscard]] double chain_length(int chain) const {
        double len = 0.0;
        for (const auto& s : segments)
            if (s.chain == chain) len += s.length;
        return len;
    }
};

/// Splits every chain at its crossings with triangle edges. Each resulting
/// segment is owned by the lowest-index triangle containing its midpoint,
/// so a segment running along a shared edge is counted once. Pieces shorter
/// than the geometric tolerance are merged into a neighbour.
inline SegmentedCrack cut_chains(const Mesh& mesh, const CrackGraph& crack, const TriangleGrid& grid) {
    const double tol = mesh.tolerance();
    SegmentedCrack out;
    for (std::size_t j = 0; j < crack.chains().size(); ++j) {
        const Chain& chain = crack.chains()[j];
        std::vector<CrackSegment> pieces;
        double position = 0.0;
        for (std::size_t k = 1; k < chain.points.size(); ++k) {
            const Point& p = chain.points[k - 1];
            const Point& q = chain.points[k];
            const Vec2 d = q - p;
            const double len = d.norm();
            const auto cand = grid.candidates_along(p, q, tol);
            std::vector<double> breaks{0.0, 1.0};
            for (int t : cand) {
                if (auto clip = clip_segment(p, q, mesh.points(static_cast<std::size_t>(t)), tol)) {
                    breaks.push_back(clip->s0);
                    breaks.push_back(clip->s1);
                }
            }
            std::sort(breaks.begin(), breaks.end());
            const double merge = len > 0.0 ? tol / len : 1.0;
            std::vector<double> s{0.0};
            for (double b : breaks)
                if (b - s.back() > merge) s.push_back(b);
            if (s.size() == 1) {
                s.push_back(1.0);
            } else {
                s.back() = 1.0;
            }
            for (std::size_t i = 1; i < s.size(); ++i) {
                const Point mid = p + 0.5 * (s[i - 1] + s[i]) * d;
                int owner = -1;
                for (int t : cand)
                    if (point_in_triangle(mesh.points(static_cast<std::size_t>(t)), mid, tol)) {
                        owner = t;
                        break;
                    }
                if (owner < 0)
                    throw GeometryError("cut_chains: chain " + std::to_string(j) +
                                        " leaves the meshed domain");
                const Point a = s[i - 1] == 0.0 ? p : Point(p + s[i - 1] * d);
                const Point b = s[i] == 1.0 ? q : Point(p + s[i] * d);
                pieces.push_back({owner, {a, b}, static_cast<int>(j), (b - a).norm(), position + s[i - 1] * len});
            }
            position += len;
        }
        // Merge slivers into the previous piece (or the next one at the start).
        std::vector<CrackSegment> merged;
        for (auto& piece : pieces) {
            if (piece.length <= tol && !merged.empty()) {
                merged.back().seg.b = piece.seg.b;
                merged.back().length = merged.back().seg.length();
            } else {
                merged.push_back(piece);
            }
        }
        if (merged.size() > 1 && merged.front().length <= tol) {
            merged[1].seg.a = merged.front().seg.a;
            merged[1].length = merged[1].seg.length();
            merged[1].position = merged.front().position;
            merged.erase(merged.begin());
        }
        out.segments.insert(out.segments.end(), merged.begin(), merged.end());
    }
    return out;
}

inline SegmentedCrack cut_chains(const Mesh& mesh, const CrackGraph& crack) {
    const TriangleGrid grid(mesh);
    return cut_chains(mesh, crack, grid);
}

/// T_h(Γ): sorted indices of triangles whose closure meets a chain.
inline std::vector<int> mark_crack_elements(const Mesh& mesh, const CrackGraph& crack, const TriangleGrid& grid) {
    const double tol = mesh.tolerance();
    std::vector<char> hit(mesh.triangles.size(), 0);
    for (const auto& c : crack.chains()) {
        for (std::size_t k = 1; k < c.points.size(); ++k) {
            for (int t : grid.candidates_along(c.points[k - 1], c.points[k], tol)) {
                if (hit[static_cast<std::size_t>(t)]) continue;
                if (clip_segment(c.points[k - 1], c.points[k], mesh.points(static_cast<std::size_t>(t)), tol))
                    hit[static_cast<std::size_t>(t)] = 1;
            }
        }
    }
    std::vector<int> out;
    for (std::size_t t = 0; t < hit.size(); ++t)
        if (hit[t]) out.push_back(static_cast<int>(t));
    return out;
}

inline std::vector<int> mark_crack_elements(const Mesh& mesh, const CrackGraph& crack) {
    const TriangleGrid grid(mesh);
    return mark_crack_elements(mesh, crack, grid);
}

}  // namespace crackfem
