#pragma once

// Newest-vertex bisection with conforming closure, and the crack-driven
// local refinement built on it.

#include "crackfem/crack.hpp"

#include <functional>
#include <unordered_map>

namespace crackfem {

/// Owns a mesh and bisects triangles in place. Bisecting a triangle first
/// makes its refinement-edge neighbour compatible (recursively), then splits
/// both at the edge midpoint, so the mesh is conforming after every step.
class Bisector {
public:
    explicit Bisector(Mesh mesh) : mesh_(std::move(mesh)) {
        for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
            const Tri& tri = mesh_.triangles[t];
            for (int k = 0; k < 3; ++k) add_edge(edge_key(tri[k], tri[(k + 1) % 3]), static_cast<int>(t));
        }
        for (std::size_t i = 0; i < mesh_.boundary_edges.size(); ++i) {
            const auto& e = mesh_.boundary_edges[i];
            boundary_index_[edge_key(e.v0, e.v1)] = static_cast<int>(i);
        }
    }

    [[nodiscard]] const Mesh& mesh() const { return mesh_; }
    [[nodiscard]] Mesh take() && { return std::move(mesh_); }
    [[nodiscard]] std::size_t bisections() const { return bisections_; }

    /// Called after every conforming bisection step.
    std::function<void(const Mesh&)> on_bisection;

    void refine(int t) {
        const Tri original = mesh_.triangles[static_cast<std::size_t>(t)];
        for (;;) {
            if (mesh_.triangles[static_cast<std::size_t>(t)] != original) return;
            const Tri& tri = mesh_.triangles[static_cast<std::size_t>(t)];
            const std::uint64_t e = edge_key(tri[0], tri[1]);
            const int n = neighbour(e, t);
            if (n < 0) {
                bisect({t});
                return;
            }
            const Tri& ntri = mesh_.triangles[static_cast<std::size_t>(n)];
            if (edge_key(ntri[0], ntri[1]) == e) {
                bisect({t, n});
                return;
            }
            refine(n);
        }
    }

    /// Bisects each listed triangle once unless the closure of an earlier
    /// entry already split it.
    void refine_all(const std::vector<int>& marked) {
        std::vector<Tri> snapshot;
        snapshot.reserve(marked.size());
        for (int t : marked) snapshot.push_back(mesh_.triangles[static_cast<std::size_t>(t)]);
        for (std::size_t i = 0; i < marked.size(); ++i)
            if (mesh_.triangles[static_cast<std::size_t>(marked[i])] == snapshot[i]) refine(marked[i]);
    }

private:
    void add_edge(std::uint64_t e, int t) {
        auto [it, fresh] = edge_tris_.try_emplace(e, std::array<int, 2>{t, -1});
        if (!fresh) it->second[1] = t;
    }
    void replace_edge(std::uint64_t e, int from, int to) {
        auto& pair = edge_tris_.at(e);
        (pair[0] == from ? pair[0] : pair[1]) = to;
    }
    [[nodiscard]] int neighbour(std::uint64_t e, int t) const {
        const auto& pair = edge_tris_.at(e);
        return pair[0] == t ? pair[1] : pair[0];
    }

    void split(int t, int m) {
        const Tri tri = mesh_.triangles[static_cast<std::size_t>(t)];
        const int v0 = tri[0], v1 = tri[1], v2 = tri[2];
        const int child = static_cast<int>(mesh_.triangles.size());
        mesh_.triangles[static_cast<std::size_t>(t)] = {v2, v0, m};
        mesh_.triangles.push_back({v1, v2, m});
        replace_edge(edge_key(v1, v2), t, child);
        add_edge(edge_key(v0, m), t);
        add_edge(edge_key(m, v1), child);
        add_edge(edge_key(v2, m), t);
        add_edge(edge_key(v2, m), child);
    }

    void bisect(std::initializer_list<int> tris) {
        const Tri& first = mesh_.triangles[static_cast<std::size_t>(*tris.begin())];
        const int a = first[0], b = first[1];
        const std::uint64_t e = edge_key(a, b);
        const int m = static_cast<int>(mesh_.vertices.size());
        mesh_.vertices.push_back(0.5 * (mesh_.vertices[static_cast<std::size_t>(a)] +
                                        mesh_.vertices[static_cast<std::size_t>(b)]));
        edge_tris_.erase(e);
        for (int t : tris) split(t, m);
        if (tris.size() == 1) {
            const auto it = boundary_index_.find(e);
            if (it == boundary_index_.end())
                throw RefinementError("bisection: refinement edge has one triangle but is not on the boundary");
            const int idx = it->second;
            boundary_index_.erase(it);
            BoundaryEdge& be = mesh_.boundary_edges[static_cast<std::size_t>(idx)];
            const BoundaryEdge tail{m, be.v1, be.side};
            be.v1 = m;
            boundary_index_[edge_key(be.v0, m)] = idx;
            boundary_index_[edge_key(m, tail.v1)] = static_cast<int>(mesh_.boundary_edges.size());
            mesh_.boundary_edges.push_back(tail);
        }
        ++bisections_;
        if (on_bisection) on_bisection(mesh_);
    }

    Mesh mesh_;
    std::unordered_map<std::uint64_t, std::array<int, 2>> edge_tris_;
    std::unordered_map<std::uint64_t, int> boundary_index_;
    std::size_t bisections_ = 0;
};

enum class GammaRule { none, fixed, quadratic };

struct RefinementConfig {
    double global_h = 0.1;
    GammaRule rule = GammaRule::none;
    double h_gamma = 0.0;       // used by GammaRule::fixed
    double constant = 1.0;      // C in h_Γ = C h² (quadratic rule)
    double length_scale = 0.0;  // h is measured relative to this; 0 selects the domain diameter
    int max_generations = 60;

    bool operator==(const RefinementConfig&) const = default;

    void validate() const {
        if (!(global_h > 0.0)) throw InvalidArgument("refinement: global_h must be positive");
        if (rule == GammaRule::fixed && !(h_gamma > 0.0))
            throw InvalidArgument("refinement: fixed rule needs h_gamma > 0");
        if (rule == GammaRule::quadratic && !(constant > 0.0))
            throw InvalidArgument("refinement: quadratic rule needs C > 0");
        if (length_scale < 0.0) throw InvalidArgument("refinement: negative length_scale");
        if (max_generations < 0) throw InvalidArgument("refinement: negative max_generations");
    }

    /// Interface-local size target. With the quadratic rule h is made
    /// dimensionless by the length scale ℓ: h_Γ = ℓ C (h/ℓ)².
    [[nodiscard]] double target_h_gamma(const Box& domain) const {
        switch (rule) {
            case GammaRule::none: return std::numeric_limits<double>::infinity();
            case GammaRule::fixed: return h_gamma;
            case GammaRule::quadratic: {
                const double scale = length_scale > 0.0 ? length_scale : domain.diameter();
                return constant * global_h * global_h / scale;
            }
        }
        return std::numeric_limits<double>::infinity();
    }
};

/// N_h(T): `marked` plus every triangle sharing a vertex with it (one ring).
inline std::vector<int> vertex_neighbourhood(const Mesh& mesh, const std::vector<int>& marked) {
    std::vector<char> hot(mesh.vertices.size(), 0);
    for (int t : marked)
        for (int v : mesh.triangles[static_cast<std::size_t>(t)]) hot[static_cast<std::size_t>(v)] = 1;
    std::vector<int> out;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Tri& tri = mesh.triangles[t];
        if (hot[static_cast<std::size_t>(tri[0])] || hot[static_cast<std::size_t>(tri[1])] ||
            hot[static_cast<std::size_t>(tri[2])])
            out.push_back(static_cast<int>(t));
    }
    return out;
}

/// Bisects the crack neighbourhood N_h(T_h(Γ)) until every triangle in it
/// has h_T <= h_Γ. Each generation re-marks the current mesh and bisects the
/// oversized triangles once.
inline Mesh refine_near_crack(const Mesh& mesh, const CrackGraph& crack, const RefinementConfig& config) {
    config.validate();
    if (config.rule == GammaRule::none || crack.empty()) return mesh;
    const double target = config.target_h_gamma(mesh.domain) * (1.0 + 1e-12);
    Bisector bisector(mesh);
    for (int gen = 0;; ++gen) {
        const Mesh& current = bisector.mesh();
        const TriangleGrid grid(current);
        const auto near = vertex_neighbourhood(current, mark_crack_elements(current, crack, grid));
        std::vector<int> oversized;
        for (int t : near)
            if (current.diameter(static_cast<std::size_t>(t)) > target) oversized.push_back(t);
        if (oversized.empty()) break;
        if (gen == config.max_generations)
            throw RefinementError("refine_near_crack: " + std::to_string(oversized.size()) +
                                  " triangles still exceed h_gamma = " + format_double(target) + " after " +
                                  std::to_string(gen) + " generations");
        bisector.refine_all(oversized);
    }
    return std::move(bisector).take();
}

struct DofProfile {
    std::size_t total = 0;
    std::size_t near_crack = 0;
};

/// Vertex counts of the whole mesh and of N_h(T_h(Γ)).
inline DofProfile dof_count_profile(const Mesh& mesh, const CrackGraph& crack) {
    DofProfile p;
    p.total = mesh.vertices.size();
    if (crack.empty()) return p;
    std::vector<char> seen(mesh.vertices.size(), 0);
    for (int t : vertex_neighbourhood(mesh, mark_crack_elements(mesh, crack)))
        for (int v : mesh.triangles[static_cast<std::size_t>(t)]) seen[static_cast<std::size_t>(v)] = 1;
    p.near_crack = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), 1));
    return p;
}

}  // namespace crackfem
