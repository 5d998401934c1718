#pragma once

// Triangulations of rectangular domains and their text exports.
//
// Triangles are stored counterclockwise with the newest-vertex bisection
// labelling: local vertex 2 is the newest vertex and the edge (0, 1) opposite
// to it is the refinement edge.

#include "crackfem/geometry.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crackfem {

enum class Side { left, right, bottom, top };

inline constexpr std::array<Side, 4> kAllSides{Side::left, Side::right, Side::bottom, Side::top};

inline std::string_view to_string(Side s) {
    switch (s) {
        case Side::left: return "left";
        case Side::right: return "right";
        case Side::bottom: return "bottom";
        case Side::top: return "top";
    }
    return "?";
}

inline std::optional<Side> side_from_string(std::string_view name) {
    for (Side s : kAllSides)
        if (to_string(s) == name) return s;
    return std::nullopt;
}

struct BoundaryEdge {
    int v0;
    int v1;
    Side side;
};

using Tri = std::array<int, 3>;

struct Mesh {
    Box domain;
    std::vector<Point> vertices;
    std::vector<Tri> triangles;
    std::vector<BoundaryEdge> boundary_edges;

    [[nodiscard]] std::size_t num_vertices() const { return vertices.size(); }
    [[nodiscard]] std::size_t num_triangles() const { return triangles.size(); }

    [[nodiscard]] TrianglePoints points(std::size_t t) const {
        const Tri& tri = triangles[t];
        return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
    }

    /// h_T: longest edge of triangle t.
    [[nodiscard]] double diameter(std::size_t t) const { return crackfem::diameter(points(t)); }

    [[nodiscard]] std::vector<double> diameters() const {
        std::vector<double> h(triangles.size());
        for (std::size_t t = 0; t < triangles.size(); ++t) h[t] = diameter(t);
        return h;
    }

    /// Global mesh parameter h = max h_T.
    [[nodiscard]] double max_diameter() const {
        double h = 0.0;
        for (std::size_t t = 0; t < triangles.size(); ++t) h = std::max(h, diameter(t));
        return h;
    }

    [[nodiscard]] double tolerance() const { return kRelativeGeomTolerance * domain.diameter(); }
};

/// Structured n_x-by-n_y grid with n = ceil(side / target_h) cells per side.
/// Every cell is split along its (i,j)-(i+1,j+1) diagonal; the diagonal is
/// the refinement edge of both halves. Boundary edges are tagged by side.
inline Mesh build_rectangle_mesh(const Box& bounds, double target_h) {
    const double width = bounds.hi.x() - bounds.lo.x();
    const double height = bounds.hi.y() - bounds.lo.y();
    if (!(width > 0.0) || !(height > 0.0))
        throw InvalidArgument("build_rectangle_mesh: degenerate rectangle");
    if (!(target_h > 0.0)) throw InvalidArgument("build_rectangle_mesh: target_h must be positive");
    if (target_h > std::min(width, height) * (1.0 + 1e-12))
        throw InvalidArgument("build_rectangle_mesh: target_h exceeds the shorter rectangle side");

    const int nx = std::max(1, static_cast<int>(std::ceil(width / target_h - 1e-9)));
    const int ny = std::max(1, static_cast<int>(std::ceil(height / target_h - 1e-9)));

    Mesh mesh;
    mesh.domain = bounds;
    mesh.vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) {
            // Snap the last row/column exactly onto the rectangle.
            const double x = i == nx ? bounds.hi.x() : bounds.lo.x() + width * i / nx;
            const double y = j == ny ? bounds.hi.y() : bounds.lo.y() + height * j / ny;
            mesh.vertices.emplace_back(x, y);
        }
    }
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
    mesh.triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = id(i, j), v10 = id(i + 1, j), v11 = id(i + 1, j + 1), v01 = id(i, j + 1);
            mesh.triangles.push_back({v11, v00, v10});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    for (int i = 0; i < nx; ++i) mesh.boundary_edges.push_back({id(i, 0), id(i + 1, 0), Side::bottom});
    for (int j = 0; j < ny; ++j) mesh.boundary_edges.push_back({id(nx, j), id(nx, j + 1), Side::right});
    for (int i = nx; i > 0; --i) mesh.boundary_edges.push_back({id(i, ny), id(i - 1, ny), Side::top});
    for (int j = ny; j > 0; --j) mesh.boundary_edges.push_back({id(0, j), id(0, j - 1), Side::left});
    return mesh;
}

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

/// Returns a description of the first violated mesh invariant, if any:
/// positive orientation, edge multiplicity, boundary list consistency
/// (which also catches hanging nodes) and area coverage of the domain.
inline std::optional<std::string> check_mesh(const Mesh& mesh) {
    std::map<std::uint64_t, int> edge_count;
    double area = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Tri& tri = mesh.triangles[t];
        const double a = signed_area(mesh.points(t));
        if (!(a > 0.0)) return "triangle " + std::to_string(t) + " is not counterclockwise";
        area += a;
        for (int k = 0; k < 3; ++k) ++edge_count[edge_key(tri[k], tri[(k + 1) % 3])];
    }
    std::map<std::uint64_t, int> boundary;
    for (const auto& e : mesh.boundary_edges) ++boundary[edge_key(e.v0, e.v1)];
    for (const auto& [key, count] : edge_count) {
        if (count > 2) return "edge shared by more than two triangles";
        const bool listed = boundary.count(key) > 0;
        if (count == 1 && !listed) return "unlisted single-triangle edge (hanging node or hole)";
        if (count == 2 && listed) return "interior edge listed as boundary";
    }
    for (const auto& [key, count] : boundary) {
        if (count != 1) return "duplicate boundary edge";
        if (edge_count.count(key) == 0) return "boundary edge not in any triangle";
    }
    const double domain_area =
        (mesh.domain.hi.x() - mesh.domain.lo.x()) * (mesh.domain.hi.y() - mesh.domain.lo.y());
    if (std::abs(area - domain_area) > 1e-10 * domain_area) return "triangles do not cover the domain";
    return std::nullopt;
}

inline double min_angle_deg(const Mesh& mesh) {
    double best = 180.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
        best = std::min(best, min_angle_deg(mesh.points(t)));
    return best;
}

/// Shortest round-trip decimal representation; locale independent.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Plain text mesh format:
///   vertices N triangles M
///   N lines "x y"
///   M lines "i j k" (0-based, counterclockwise)
///   boundary_edges B
///   B lines "i j side"
inline void write_mesh_text(std::ostream& os, const Mesh& mesh) {
    os << "vertices " << mesh.vertices.size() << " triangles " << mesh.triangles.size() << '\n';
    for (const auto& v : mesh.vertices) os << format_double(v.x()) << ' ' << format_double(v.y()) << '\n';
    for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "boundary_edges " << mesh.boundary_edges.size() << '\n';
    for (const auto& e : mesh.boundary_edges) os << e.v0 << ' ' << e.v1 << ' ' << to_string(e.side) << '\n';
}

/// Legacy VTK ASCII unstructured grid, optionally with one point-data field.
inline void write_vtk(std::ostream& os, const Mesh& mesh, std::span<const double> field = {},
                      std::string_view field_name = "u") {
    os << "# vtk DataFile Version 3.0\ncrackfem\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.vertices.size() << " double\n";
    for (const auto& v : mesh.vertices) os << format_double(v.x()) << ' ' << format_double(v.y()) << " 0\n";
    os << "CELLS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
    for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    os << "CELL_TYPES " << mesh.triangles.size() << '\n';
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) os << "5\n";
    if (!field.empty()) {
        if (field.size() != mesh.vertices.size())
            throw InvalidArgument("write_vtk: field size does not match vertex count");
        os << "POINT_DATA " << field.size() << "\nSCALARS " << field_name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : field) os << format_double(v) << '\n';
    }
}

}  // namespace crackfem
