#pragma once

// Shared vocabulary for the crackfem headers: point type, error types,
// geometric tolerance and a small deterministic parallel_for.

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace crackfem {

using Point = Eigen::Vector2d;
using Vec2 = Eigen::Vector2d;

/// Base class for every failure reported by the library.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string& what) : Error("invalid-argument", what) {}
};
struct GeometryError : Error {
    explicit GeometryError(const std::string& what) : Error("geometry", what) {}
};
struct RefinementError : Error {
    explicit RefinementError(const std::string& what) : Error("refinement", what) {}
};
struct AssemblyError : Error {
    explicit AssemblyError(const std::string& what) : Error("assembly", what) {}
};
struct SolverError : Error {
    explicit SolverError(const std::string& what) : Error("solver", what) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// Relative factor applied to the domain diameter for every incidence test.
inline constexpr double kRelativeGeomTolerance = 1e-12;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Runs fn(i) for i in [0, n) on `threads` workers using fixed contiguous
/// chunks. fn must only write to slots owned by index i.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2 * workers) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace crackfem
