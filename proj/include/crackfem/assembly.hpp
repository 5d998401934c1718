#pragma once

// Assembly of A(u,v) = (a∇u,∇v)_Ω + (a_Γ∇_Γu,∇_Γv)_Γ and
// L(v) = (f,v)_Ω + (f_Γ,v)_Γ on continuous P1 elements. The interface form
// is superimposed on the bulk form using the same 2D hat functions.

#include "crackfem/crack.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <array>
#include <functional>
#include <optional>
#include <tuple>

namespace crackfem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct ElementGradients {
    std::array<Vec2, 3> grad;
    double area = 0.0;
};

/// Constant gradients of the three barycentric hat functions.
inline ElementGradients element_gradients(const TrianglePoints& t) {
    const double area = signed_area(t);
    const double h = diameter(t);
    if (!(area > 1e-12 * h * h)) throw AssemblyError("element_gradients: degenerate or clockwise triangle");
    const double inv = 1.0 / (2.0 * area);
    ElementGradients g;
    g.area = area;
    g.grad[0] = Vec2(t[1].y() - t[2].y(), t[2].x() - t[1].x()) * inv;
    g.grad[1] = Vec2(t[2].y() - t[0].y(), t[0].x() - t[2].x()) * inv;
    g.grad[2] = Vec2(t[0].y() - t[1].y(), t[1].x() - t[0].x()) * inv;
    return g;
}

/// a |T| ∇φ_i·∇φ_j.
inline Eigen::Matrix3d bulk_element_matrix(const TrianglePoints& t, double a) {
    const ElementGradients g = element_gradients(t);
    Eigen::Matrix3d k;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k(i, j) = a * g.area * g.grad[i].dot(g.grad[j]);
    return k;
}

/// a_Γ |S| (t·∇φ_i)(t·∇φ_j) for a straight crack segment S inside t.
inline Eigen::Matrix3d interface_segment_matrix(const Segment& seg, const TrianglePoints& tri, double a_gamma) {
    const double len = seg.length();
    const double tol = 1e-9 * diameter(tri);
    if (!(len > 0.0)) throw AssemblyError("interface_segment_matrix: zero-length segment");
    if (!point_in_triangle(tri, seg.a, tol) || !point_in_triangle(tri, seg.b, tol))
        throw AssemblyError("interface_segment_matrix: segment is not inside its triangle");
    const ElementGradients g = element_gradients(tri);
    const Vec2 tangent = (seg.b - seg.a) / len;
    std::array<double, 3> s{};
    for (int i = 0; i < 3; ++i) s[static_cast<std::size_t>(i)] = tangent.dot(g.grad[static_cast<std::size_t>(i)]);
    const double w = a_gamma * len;
    Eigen::Matrix3d k;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k(i, j) = w * (s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(j)]);
    return k;
}

/// Bulk permeability a(x) and source f(x). With a1 != a2 a region
/// classifier returning 1 or 2 is required; elements take the value of the
/// region containing their centroid.
struct Coefficients {
    double a1 = 1.0;
    double a2 = 1.0;
    ScalarFunction f = constant_function(0.0);
    std::function<int(const Point&)> region;

    [[nodiscard]] double permeability(const TrianglePoints& t) const {
        if (a1 == a2) return a1;
        if (!region) throw AssemblyError("coefficients: a1 != a2 requires a region classifier");
        const Point c = (t[0] + t[1] + t[2]) / 3.0;
        return region(c) == 2 ? a2 : a1;
    }
};

/// Classifier for a crack made of one closed chain: region 2 is the
/// enclosed part (positive signed distance).
inline std::function<int(const Point&)> enclosed_region_classifier(const CrackGraph& crack) {
    return [crack](const Point& x) { return signed_distance_to_crack(x, crack) > 0.0 ? 2 : 1; };
}

/// Dirichlet data per side; sides with an empty function carry the
/// homogeneous Neumann condition.
struct BoundarySpec {
    // Plain std::function rather than optional: GCC 11 at -O3 has been seen
    // to drop an optional<function> assignment here.
    std::array<ScalarFunction, 4> dirichlet;

    void set_dirichlet(Side s, ScalarFunction g) { dirichlet[static_cast<std::size_t>(s)] = std::move(g); }
    [[nodiscard]] const ScalarFunction& on(Side s) const {
        return dirichlet[static_cast<std::size_t>(s)];
    }
    [[nodiscard]] bool any_dirichlet() const {
        for (const auto& d : dirichlet)
            if (d) return true;
        return false;
    }
};

struct LinearSystem {
    SparseMatrix stiffness;  // A(φ_j, φ_i) before boundary conditions
    Vector load;             // L(φ_i) before boundary conditions
    SparseMatrix matrix;     // after symmetric elimination
    Vector rhs;
    std::vector<int> constrained;       // sorted vertex ids
    std::vector<double> prescribed;     // values at `constrained`
    std::vector<char> is_constrained;   // per vertex
};

namespace detail {

/// Interface contributions sorted by a key that depends only on geometry,
/// so the scatter order does not depend on chain order or orientation.
inline std::vector<std::size_t> canonical_segment_order(const SegmentedCrack& segments, const CrackGraph& crack) {
    auto key = [&](const CrackSegment& s) {
        auto lex = [](const Point& p, const Point& q) {
            return std::tie(p.x(), p.y()) < std::tie(q.x(), q.y());
        };
        const Point& lo = lex(s.seg.a, s.seg.b) ? s.seg.a : s.seg.b;
        const Point& hi = lex(s.seg.a, s.seg.b) ? s.seg.b : s.seg.a;
        return std::make_tuple(s.triangle, lo.x(), lo.y(), hi.x(), hi.y(),
                               crack.chains()[static_cast<std::size_t>(s.chain)].a_gamma);
    };
    std::vector<std::size_t> order(segments.segments.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return key(segments.segments[i]) < key(segments.segments[j]);
    });
    return order;
}

}  // namespace detail

/// Global stiffness: bulk element matrices in triangle order, then interface
/// segment matrices in canonical order. Element matrices are computed on
/// `threads` workers; the scatter is serial, so the result is identical for
/// any thread count.
inline SparseMatrix assemble_stiffness(const Mesh& mesh, const SegmentedCrack& segments, const CrackGraph& crack,
                                       const Coefficients& coeffs, int threads = 1) {
    const auto n = static_cast<Eigen::Index>(mesh.vertices.size());
    std::vector<Eigen::Matrix3d> bulk(mesh.triangles.size());
    parallel_for(mesh.triangles.size(), threads, [&](std::size_t t) {
        const auto pts = mesh.points(t);
        bulk[t] = bulk_element_matrix(pts, coeffs.permeability(pts));
    });
    const auto order = detail::canonical_segment_order(segments, crack);
    std::vector<Eigen::Matrix3d> iface(order.size());
    parallel_for(order.size(), threads, [&](std::size_t i) {
        const CrackSegment& s = segments.segments[order[i]];
        iface[i] = interface_segment_matrix(s.seg, mesh.points(static_cast<std::size_t>(s.triangle)),
                                            crack.chains()[static_cast<std::size_t>(s.chain)].a_gamma);
    });

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * (bulk.size() + iface.size()));
    auto scatter = [&](const Tri& tri, const Eigen::Matrix3d& k) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trips.emplace_back(tri[static_cast<std::size_t>(i)], tri[static_cast<std::size_t>(j)], k(i, j));
    };
    for (std::size_t t = 0; t < bulk.size(); ++t) scatter(mesh.triangles[t], bulk[t]);
    // Chains with a_Γ = 0 add nothing, not even explicit zeros.
    for (std::size_t i = 0; i < order.size(); ++i) {
        const CrackSegment& s = segments.segments[order[i]];
        if (crack.chains()[static_cast<std::size_t>(s.chain)].a_gamma == 0.0) continue;
        scatter(mesh.triangles[static_cast<std::size_t>(s.triangle)], iface[i]);
    }

    SparseMatrix k(n, n);
    k.setFromTriplets(trips.begin(), trips.end());
    return k;
}

/// Bulk part by the vertex rule |T|/3 Σ f(x_i); interface part by the
/// segment midpoint rule f_Γ(m) |S| φ_i(m).
inline Vector load_vector(const Mesh& mesh, const SegmentedCrack& segments, const CrackGraph& crack,
                          const ScalarFunction& f) {
    Vector b = Vector::Zero(static_cast<Eigen::Index>(mesh.vertices.size()));
    std::vector<double> fv(mesh.vertices.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) fv[v] = f(mesh.vertices[v]);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const double w = signed_area(mesh.points(t)) / 3.0;
        for (int v : mesh.triangles[t]) b[v] += w * fv[static_cast<std::size_t>(v)];
    }
    for (std::size_t i : detail::canonical_segment_order(segments, crack)) {
        const CrackSegment& s = segments.segments[i];
        const auto pts = mesh.points(static_cast<std::size_t>(s.triangle));
        const Point m = s.seg.midpoint();
        const double fg = crack.chains()[static_cast<std::size_t>(s.chain)].f_gamma(m);
        if (fg == 0.0) continue;
        const Eigen::Vector3d lambda = barycentric(pts, m);
        const Tri& tri = mesh.triangles[static_cast<std::size_t>(s.triangle)];
        for (int k = 0; k < 3; ++k) b[tri[static_cast<std::size_t>(k)]] += fg * s.length * lambda[k];
    }
    return b;
}

/// Dirichlet vertices and their nodally interpolated values.
inline std::vector<std::pair<int, double>> dirichlet_vertices(const Mesh& mesh, const BoundarySpec& bc) {
    std::vector<char> seen(mesh.vertices.size(), 0);
    std::vector<std::pair<int, double>> out;
    for (const auto& e : mesh.boundary_edges) {
        const auto& g = bc.on(e.side);
        if (!g) continue;
        for (int v : {e.v0, e.v1}) {
            if (seen[static_cast<std::size_t>(v)]) continue;
            seen[static_cast<std::size_t>(v)] = 1;
            out.emplace_back(v, g(mesh.vertices[static_cast<std::size_t>(v)]));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Full system with Dirichlet rows and columns eliminated symmetrically:
/// known columns move to the right-hand side and constrained rows/columns
/// become identity.
inline LinearSystem assemble(const Mesh& mesh, const SegmentedCrack& segments, const CrackGraph& crack,
                             const Coefficients& coeffs, const BoundarySpec& bc, int threads = 1) {
    if (!bc.any_dirichlet()) throw AssemblyError("assemble: no Dirichlet boundary, the system would be singular");
    LinearSystem sys;
    sys.stiffness = assemble_stiffness(mesh, segments, crack, coeffs, threads);
    sys.load = load_vector(mesh, segments, crack, coeffs.f);

    const auto dir = dirichlet_vertices(mesh, bc);
    if (dir.empty()) throw AssemblyError("assemble: Dirichlet sides contain no mesh vertices");
    const std::size_t n = mesh.vertices.size();
    sys.is_constrained.assign(n, 0);
    std::vector<double> g(n, 0.0);
    for (const auto& [v, val] : dir) {
        sys.constrained.push_back(v);
        sys.prescribed.push_back(val);
        sys.is_constrained[static_cast<std::size_t>(v)] = 1;
        g[static_cast<std::size_t>(v)] = val;
    }

    sys.rhs = sys.load;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(sys.stiffness.nonZeros()));
    for (Eigen::Index i = 0; i < sys.stiffness.outerSize(); ++i) {
        if (sys.is_constrained[static_cast<std::size_t>(i)]) {
            trips.emplace_back(i, i, 1.0);
            sys.rhs[i] = g[static_cast<std::size_t>(i)];
            continue;
        }
        for (SparseMatrix::InnerIterator it(sys.stiffness, i); it; ++it) {
            const auto j = static_cast<std::size_t>(it.col());
            if (sys.is_constrained[j]) {
                sys.rhs[i] -= it.value() * g[j];
            } else {
                trips.emplace_back(i, it.col(), it.value());
            }
        }
    }
    sys.matrix.resize(sys.stiffness.rows(), sys.stiffness.cols());
    sys.matrix.setFromTriplets(trips.begin(), trips.end());
    return sys;
}

}  // namespace crackfem
