#pragma once

#include "crackfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace crackfem {

/// Uniform bucket grid over triangle bounding boxes.
class TriangleGrid {
public:
    explicit TriangleGrid(const Mesh& mesh) : mesh_(&mesh) {
        origin_ = mesh.domain.lo;
        const Vec2 ext = mesh.domain.hi - mesh.domain.lo;
        const double area = std::max(ext.x() * ext.y(), 1e-300);
        const double n = std::max<double>(1.0, static_cast<double>(mesh.triangles.size()));
        cell_ = std::sqrt(2.0 * area / n);
        nx_ = std::max(1, static_cast<int>(std::ceil(ext.x() / cell_)));
        ny_ = std::max(1, static_cast<int>(std::ceil(ext.y() / cell_)));

        std::vector<int> count(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
        auto for_cells = [&](std::size_t t, auto&& fn) {
            Box b;
            for (const auto& p : mesh.points(t)) b.extend(p);
            const auto [i0, j0] = cell_of(b.lo);
            const auto [i1, j1] = cell_of(b.hi);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) fn(j * nx_ + i);
        };
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
            for_cells(t, [&](int c) { ++count[static_cast<std::size_t>(c) + 1]; });
        for (std::size_t c = 1; c < count.size(); ++c) count[c] += count[c - 1];
        start_ = count;
        items_.resize(static_cast<std::size_t>(start_.back()));
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
            for_cells(t, [&](int c) { items_[static_cast<std::size_t>(count[static_cast<std::size_t>(c)]++)] = static_cast<int>(t); });
    }

    [[nodiscard]] double cell_size() const { return cell_; }

    /// Sorted, unique triangles whose bounding box may meet `box`.
    [[nodiscard]] std::vector<int> candidates(const Box& box) const {
        std::vector<int> out;
        append_box(box, out);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Sorted, unique triangles that may meet segment pq (within tol).
    [[nodiscard]] std::vector<int> candidates_along(const Point& p, const Point& q, double tol) const {
        std::vector<int> out;
        const int pieces = std::max(1, static_cast<int>(std::ceil((q - p).norm() / cell_)));
        for (int k = 0; k < pieces; ++k) {
            Box b;
            b.extend(p + (q - p) * (static_cast<double>(k) / pieces));
            b.extend(p + (q - p) * (static_cast<double>(k + 1) / pieces));
            b.lo.array() -= tol;
            b.hi.array() += tol;
            append_box(b, out);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Lowest-index triangle containing x (closed, within tol).
    [[nodiscard]] std::optional<int> locate(const Point& x, double tol) const {
        Box b;
        b.extend(x);
        b.lo.array() -= tol;
        b.hi.array() += tol;
        for (int t : candidates(b))
            if (point_in_triangle(mesh_->points(static_cast<std::size_t>(t)), x, tol)) return t;
        return std::nullopt;
    }

private:
    [[nodiscard]] std::pair<int, int> cell_of(const Point& p) const {
        const int i = static_cast<int>(std::floor((p.x() - origin_.x()) / cell_));
        const int j = static_cast<int>(std::floor((p.y() - origin_.y()) / cell_));
        return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
    }

    void append_box(const Box& box, std::vector<int>& out) const {
        const auto [i0, j0] = cell_of(box.lo);
        const auto [i1, j1] = cell_of(box.hi);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                const auto c = static_cast<std::size_t>(j * nx_ + i);
                out.insert(out.end(), items_.begin() + start_[c], items_.begin() + start_[c + 1]);
            }
    }

    const Mesh* mesh_;
    Point origin_;
    double cell_ = 1.0;
    int nx_ = 1;
    int ny_ = 1;
    std::vector<int> start_;
    std::vector<int> items_;
};

}  // namespace crackfem
