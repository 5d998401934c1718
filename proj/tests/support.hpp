#pragma once

#include "crackfem.hpp"

#include <random>

namespace testing_support {

using namespace crackfem;

/// Crack graph from one straight segment pq with nodes at its ends.
inline CrackGraph line_crack(const Point& p, const Point& q, double a_gamma = 1.0, double f_gamma = 0.0) {
    return CrackGraph({p, q}, {Chain{{p, q}, {0, 1}, a_gamma, constant_function(f_gamma)}}, 1e-12);
}

/// Three straight chains meeting at `centre`.
inline CrackGraph y_crack(const Point& centre, const std::array<Point, 3>& tips, double a_gamma = 1.0) {
    std::vector<Point> nodes{centre, tips[0], tips[1], tips[2]};
    std::vector<Chain> chains;
    for (int k = 0; k < 3; ++k)
        chains.push_back({{centre, tips[static_cast<std::size_t>(k)]}, {0, k + 1}, a_gamma, constant_function(0.0)});
    return CrackGraph(nodes, chains, 1e-12);
}

inline Mesh radial_mesh(double h) { return build_rectangle_mesh(ExactRadialSolution::domain(), h); }

inline CrackGraph radial_crack(double h, double tol) { return build_crack(radial_preset(false), h, tol); }

inline double radial_side() {
    const Box d = ExactRadialSolution::domain();
    return d.hi.x() - d.lo.x();
}

}  // namespace testing_support
