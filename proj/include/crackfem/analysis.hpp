#pragma once

// Exact solutions, error norms, convergence rates and the node flux balance.

#include "crackfem/solve.hpp"

#include <concepts>
#include <numbers>
#include <ostream>
#include <span>

namespace crackfem {

/// Radially symmetric solution on the square (1, e^{5/4})² with the crack
/// r = e, f = 0, f_Γ = 1 and a = a_Γ = 1:
///   u = (4 + e)/5 log r                        for r < e
///   u = (4 - 4e)/5 (log r - 5/4) + 1           for r > e
class ExactRadialSolution {
public:
    static constexpr double kE = std::numbers::e;
    static constexpr double kCrackRadius = std::numbers::e;

    [[nodiscard]] static double outer_radius() { return std::exp(1.25); }
    [[nodiscard]] static Box domain() { return {{1.0, 1.0}, {outer_radius(), outer_radius()}}; }

    [[nodiscard]] static double inner_value(double r) { return std::log(r) / 5.0 * (4.0 + kE); }
    [[nodiscard]] static double outer_value(double r) {
        return (4.0 - 4.0 * kE) / 5.0 * (std::log(r) - 1.25) + 1.0;
    }
    [[nodiscard]] static double inner_slope(double r) { return (4.0 + kE) / (5.0 * r); }
    [[nodiscard]] static double outer_slope(double r) { return (4.0 - 4.0 * kE) / (5.0 * r); }

    [[nodiscard]] static double radial_value(double r) { return r < kCrackRadius ? inner_value(r) : outer_value(r); }
    [[nodiscard]] static double radial_slope(double r) { return r < kCrackRadius ? inner_slope(r) : outer_slope(r); }

    [[nodiscard]] double value(const Point& x) const { return radial_value(x.norm()); }
    [[nodiscard]] Vec2 gradient(const Point& x) const {
        const double r = x.norm();
        return radial_slope(r) / r * x;
    }

    /// True when the closed triangle reaches both sides of the circle.
    [[nodiscard]] bool straddles(const TrianglePoints& t) const {
        double rmax = 0.0;
        for (const auto& p : t) rmax = std::max(rmax, p.norm());
        double rmin = point_in_triangle(t, Point::Zero(), 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
        for (int k = 0; k < 3; ++k) rmin = std::min(rmin, point_segment_distance(Point::Zero(), t[k], t[(k + 1) % 3]));
        return rmin < kCrackRadius && kCrackRadius < rmax;
    }
};

/// u = sin(πx) sin(πy), solving -Δu = 2π² u on the unit square.
struct SinSinSolution {
    [[nodiscard]] double value(const Point& x) const {
        return std::sin(std::numbers::pi * x.x()) * std::sin(std::numbers::pi * x.y());
    }
    [[nodiscard]] Vec2 gradient(const Point& x) const {
        const double pi = std::numbers::pi;
        return {pi * std::cos(pi * x.x()) * std::sin(pi * x.y()), pi * std::sin(pi * x.x()) * std::cos(pi * x.y())};
    }
    [[nodiscard]] static double source(const Point& x) {
        return 2.0 * std::numbers::pi * std::numbers::pi * std::sin(std::numbers::pi * x.x()) *
               std::sin(std::numbers::pi * x.y());
    }
};

template <typename E>
concept ExactSolution = requires(const E& e, const Point& p) {
    { e.value(p) } -> std::convertible_to<double>;
    { e.gradient(p) } -> std::convertible_to<Vec2>;
};

/// Type-erased exact solution, for registries.
struct AnyExactSolution {
    std::function<double(const Point&)> value_fn;
    std::function<Vec2(const Point&)> gradient_fn;
    std::function<bool(const TrianglePoints&)> straddles_fn;

    template <ExactSolution E>
    static AnyExactSolution from(E e) {
        AnyExactSolution a;
        a.value_fn = [e](const Point& p) { return e.value(p); };
        a.gradient_fn = [e](const Point& p) { return e.gradient(p); };
        if constexpr (requires(const TrianglePoints& t) { e.straddles(t); })
            a.straddles_fn = [e](const TrianglePoints& t) { return e.straddles(t); };
        return a;
    }

    [[nodiscard]] double value(const Point& p) const { return value_fn(p); }
    [[nodiscard]] Vec2 gradient(const Point& p) const { return gradient_fn(p); }
    [[nodiscard]] bool straddles(const TrianglePoints& t) const { return straddles_fn && straddles_fn(t); }
};

template <ExactSolution E>
bool exact_straddles(const E& e, const TrianglePoints& t) {
    if constexpr (requires { e.straddles(t); }) {
        return e.straddles(t);
    } else {
        return false;
    }
}

/// Quadrature used by error_norms. Triangles on which the exact solution
/// has a kink are split recursively into four, up to `kink_depth` levels.
/// `subdivide` splits every triangle uniformly that many times first.
struct NormQuadrature {
    int triangle_degree = 4;  // 2: edge-midpoint rule, 4: 6-point rule
    int segment_points = 2;   // Gauss points per crack segment (2 or 3)
    int kink_depth = 8;
    int subdivide = 0;
};

struct NormReport {
    int level = 0;
    double h = 0.0;
    double h_gamma = 0.0;
    std::size_t n_dofs = 0;
    double l2 = 0.0;
    double h1_semi = 0.0;
    double l2_gamma = 0.0;
    double energy = 0.0;
};

namespace detail {

struct TriangleRule {
    std::vector<Eigen::Vector3d> points;  // barycentric
    std::vector<double> weights;          // sum to 1
};

inline const TriangleRule& triangle_rule(int degree) {
    static const TriangleRule deg2{{{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}};
    static const TriangleRule deg4 = [] {
        TriangleRule r;
        const double a = 0.445948490915965, wa = 0.223381589678011;
        const double b = 0.091576213509771, wb = 0.109951743655322;
        for (const auto& [c, w] : {std::pair{a, wa}, std::pair{b, wb}}) {
            r.points.push_back({c, c, 1 - 2 * c});
            r.points.push_back({c, 1 - 2 * c, c});
            r.points.push_back({1 - 2 * c, c, c});
            for (int k = 0; k < 3; ++k) r.weights.push_back(w);
        }
        return r;
    }();
    if (degree == 2) return deg2;
    if (degree == 4) return deg4;
    throw InvalidArgument("triangle quadrature degree must be 2 or 4");
}

inline std::pair<std::vector<double>, std::vector<double>> gauss_rule(int points) {
    if (points == 2) {
        const double d = 0.5 / std::sqrt(3.0);
        return {{0.5 - d, 0.5 + d}, {0.5, 0.5}};
    }
    if (points == 3) {
        const double d = 0.5 * std::sqrt(0.6);
        return {{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18, 8.0 / 18, 5.0 / 18}};
    }
    throw InvalidArgument("segment quadrature must use 2 or 3 points");
}

/// Integrates fn(x) over the triangle, refining where the exact solution kinks.
template <ExactSolution E, typename Fn>
double integrate_triangle(const E& exact, const TrianglePoints& t, const TriangleRule& rule, int depth, Fn&& fn,
                          int subdivide = 0) {
    if (subdivide > 0 || (depth > 0 && exact_straddles(exact, t))) {
        const Point m01 = 0.5 * (t[0] + t[1]), m12 = 0.5 * (t[1] + t[2]), m20 = 0.5 * (t[2] + t[0]);
        const int d = subdivide > 0 ? depth : depth - 1;
        const int s = std::max(subdivide - 1, 0);
        return integrate_triangle(exact, {t[0], m01, m20}, rule, d, fn, s) +
               integrate_triangle(exact, {m01, t[1], m12}, rule, d, fn, s) +
               integrate_triangle(exact, {m20, m12, t[2]}, rule, d, fn, s) +
               integrate_triangle(exact, {m01, m12, m20}, rule, d, fn, s);
    }
    const double area = signed_area(t);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Eigen::Vector3d& l = rule.points[q];
        s += rule.weights[q] * fn(Point(l[0] * t[0] + l[1] * t[1] + l[2] * t[2]));
    }
    return area * s;
}

}  // namespace detail

/// Errors of u_h against `exact`: bulk L² and H¹-seminorm, crack L², and the
/// energy norm |||u - u_h|||² = A(u - u_h, u - u_h).
template <ExactSolution E>
NormReport error_norms(const Mesh& mesh, const SolutionField& uh, const E& exact, const Coefficients& coeffs,
                       const CrackGraph& crack, const SegmentedCrack& segments, const NormQuadrature& quad = {}) {
    const auto& rule = detail::triangle_rule(quad.triangle_degree);
    double l2 = 0.0, h1 = 0.0, energy = 0.0, l2g = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto pts = mesh.points(t);
        const Vec2 g = uh.gradient(mesh, t);
        const double u0 = uh.values[mesh.triangles[t][0]];
        const auto uh_at = [&](const Point& x) { return u0 + g.dot(x - pts[0]); };
        l2 += detail::integrate_triangle(exact, pts, rule, quad.kink_depth, [&](const Point& x) {
            const double e = uh_at(x) - exact.value(x);
            return e * e;
        }, quad.subdivide);
        const double grad_err = detail::integrate_triangle(exact, pts, rule, quad.kink_depth, [&](const Point& x) {
            return (g - exact.gradient(x)).squaredNorm();
        }, quad.subdivide);
        h1 += grad_err;
        energy += coeffs.permeability(pts) * grad_err;
    }
    const auto [gs, gw] = detail::gauss_rule(quad.segment_points);
    for (const auto& s : segments.segments) {
        const auto t = static_cast<std::size_t>(s.triangle);
        const Vec2 g = uh.gradient(mesh, t);
        const Vec2 tangent = (s.seg.b - s.seg.a) / s.length;
        const double a_gamma = crack.chains()[static_cast<std::size_t>(s.chain)].a_gamma;
        for (std::size_t q = 0; q < gs.size(); ++q) {
            const Point x = s.seg.a + gs[q] * (s.seg.b - s.seg.a);
            const double e = uh.value(mesh, t, x) - exact.value(x);
            const double de = tangent.dot(g - exact.gradient(x));
            l2g += gw[q] * s.length * e * e;
            energy += gw[q] * s.length * a_gamma * de * de;
        }
    }
    NormReport r;
    r.n_dofs = mesh.vertices.size();
    r.h = mesh.max_diameter();
    r.l2 = std::sqrt(l2);
    r.h1_semi = std::sqrt(h1);
    r.l2_gamma = std::sqrt(l2g);
    r.energy = std::sqrt(energy);
    return r;
}

/// A(u, v_h) for an exact u and a discrete v_h, using the error-norm quadrature.
template <ExactSolution E>
double exact_bilinear_form(const Mesh& mesh, const E& exact, const Vector& vh, const Coefficients& coeffs,
                           const CrackGraph& crack, const SegmentedCrack& segments, const NormQuadrature& quad = {}) {
    SolutionField v{vh};
    const auto& rule = detail::triangle_rule(quad.triangle_degree);
    double sum = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto pts = mesh.points(t);
        const Vec2 g = v.gradient(mesh, t);
        sum += coeffs.permeability(pts) *
               detail::integrate_triangle(exact, pts, rule, quad.kink_depth,
                                          [&](const Point& x) { return g.dot(exact.gradient(x)); }, quad.subdivide);
    }
    const auto [gs, gw] = detail::gauss_rule(quad.segment_points);
    for (const auto& s : segments.segments) {
        const Vec2 g = v.gradient(mesh, static_cast<std::size_t>(s.triangle));
        const Vec2 tangent = (s.seg.b - s.seg.a) / s.length;
        const double a_gamma = crack.chains()[static_cast<std::size_t>(s.chain)].a_gamma;
        for (std::size_t q = 0; q < gs.size(); ++q) {
            const Point x = s.seg.a + gs[q] * (s.seg.b - s.seg.a);
            sum += gw[q] * s.length * a_gamma * tangent.dot(g) * tangent.dot(exact.gradient(x));
        }
    }
    return sum;
}

/// Least-squares slope of log(error) against log(h). Requires at least
/// three levels with strictly decreasing h.
inline double eoc(std::span<const double> h, std::span<const double> err) {
    if (h.size() != err.size()) throw InvalidArgument("eoc: size mismatch");
    if (h.size() < 3) throw InvalidArgument("eoc: needs at least three levels");
    for (std::size_t i = 1; i < h.size(); ++i)
        if (!(h[i] < h[i - 1])) throw InvalidArgument("eoc: h must decrease strictly across levels");
    double mx = 0.0, my = 0.0;
    const auto n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        mx += std::log(h[i]) / n;
        my += std::log(err[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double dx = std::log(h[i]) - mx;
        sxy += dx * (std::log(err[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

struct Slopes {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double l2_gamma = 0.0;
    double energy = 0.0;
};

/// Slopes against the nominal global size of each level (NormReport::h).
inline Slopes eoc(std::span<const NormReport> reports) {
    std::vector<double> h, l2, h1, l2g, en;
    for (const auto& r : reports) {
        h.push_back(r.h);
        l2.push_back(r.l2);
        h1.push_back(r.h1_semi);
        l2g.push_back(r.l2_gamma);
        en.push_back(r.energy);
    }
    Slopes s;
    s.l2 = eoc(h, l2);
    s.h1_semi = eoc(h, h1);
    s.energy = eoc(h, en);
    s.l2_gamma = std::all_of(l2g.begin(), l2g.end(), [](double v) { return v > 0.0; }) ? eoc(h, l2g)
                                                                                           : std::nan("");
    return s;
}

inline void write_norm_csv_header(std::ostream& os) { os << "level,h,h_gamma,n_dofs,l2,h1_semi,l2_gamma,energy\n"; }

inline void write_norm_csv_row(std::ostream& os, const NormReport& r) {
    os << r.level << ',' << format_double(r.h) << ',' << format_double(r.h_gamma) << ',' << r.n_dofs << ','
       << format_double(r.l2) << ',' << format_double(r.h1_semi) << ',' << format_double(r.l2_gamma) << ','
       << format_double(r.energy) << '\n';
}

struct NodeFlux {
    int node = -1;
    int degree = 0;
    double imbalance = 0.0;  // Σ_j a_Γj t_j·∇u_h, t_j the exterior tangent
};

/// Discrete Kirchhoff balance at every graph node, using the constant
/// tangential derivative of the segment of each incident chain that
/// touches the node.
inline std::vector<NodeFlux> kirchhoff_residual(const Mesh& mesh, const SolutionField& uh, const CrackGraph& crack,
                                                const SegmentedCrack& segments) {
    std::vector<NodeFlux> out(crack.nodes().size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i].node = static_cast<int>(i);
    std::vector<const CrackSegment*> first(crack.chains().size(), nullptr), last(crack.chains().size(), nullptr);
    for (const auto& s : segments.segments) {
        const auto j = static_cast<std::size_t>(s.chain);
        if (!first[j] || s.position < first[j]->position) first[j] = &s;
        if (!last[j] || s.position > last[j]->position) last[j] = &s;
    }
    for (std::size_t j = 0; j < crack.chains().size(); ++j) {
        if (!first[j]) continue;
        const Chain& chain = crack.chains()[j];
        const auto flux = [&](const CrackSegment& s, const Vec2& exterior) {
            return chain.a_gamma * exterior.normalized().dot(uh.gradient(mesh, static_cast<std::size_t>(s.triangle)));
        };
        NodeFlux& start = out[static_cast<std::size_t>(chain.nodes[0])];
        start.imbalance += flux(*first[j], first[j]->seg.a - first[j]->seg.b);
        ++start.degree;
        NodeFlux& end = out[static_cast<std::size_t>(chain.nodes[1])];
        end.imbalance += flux(*last[j], last[j]->seg.b - last[j]->seg.a);
        ++end.degree;
    }
    return out;
}

}  // namespace crackfem
