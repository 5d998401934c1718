#pragma once

// Solvers for the constrained SPD system: Jacobi-preconditioned conjugate
// gradients (default) and a sparse Cholesky factorization as cross-check.

#include "crackfem/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

namespace crackfem {

enum class SolverMethod { cg, direct };

struct SolverConfig {
    SolverMethod method = SolverMethod::cg;
    double rel_tolerance = 1e-10;
    int max_iterations = 200000;
    int threads = 1;

    bool operator==(const SolverConfig&) const = default;

    void validate() const {
        if (!(rel_tolerance > 0.0 && rel_tolerance < 1.0))
            throw InvalidArgument("solver: rel_tolerance must lie in (0, 1)");
        if (max_iterations < 1) throw InvalidArgument("solver: max_iterations must be >= 1");
    }
};

/// Nodal coefficients of u_h.
struct SolutionField {
    Vector values;
    int iterations = 0;
    double relative_residual = 0.0;

    [[nodiscard]] Vec2 gradient(const Mesh& mesh, std::size_t t) const {
        const ElementGradients g = element_gradients(mesh.points(t));
        const Tri& tri = mesh.triangles[t];
        return values[tri[0]] * g.grad[0] + values[tri[1]] * g.grad[1] + values[tri[2]] * g.grad[2];
    }

    [[nodiscard]] double value(const Mesh& mesh, std::size_t t, const Point& x) const {
        const Eigen::Vector3d l = barycentric(mesh.points(t), x);
        const Tri& tri = mesh.triangles[t];
        return l[0] * values[tri[0]] + l[1] * values[tri[1]] + l[2] * values[tri[2]];
    }
};

namespace detail {

inline void multiply(const SparseMatrix& a, const Vector& x, Vector& y, int threads) {
    const auto* outer = a.outerIndexPtr();
    const auto* inner = a.innerIndexPtr();
    const auto* val = a.valuePtr();
    parallel_for(static_cast<std::size_t>(a.rows()), threads, [&](std::size_t i) {
        double s = 0.0;
        for (auto k = outer[i]; k < outer[i + 1]; ++k) s += val[k] * x[inner[k]];
        y[static_cast<Eigen::Index>(i)] = s;
    });
}

inline double free_norm(const Vector& v, const std::vector<char>& mask) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!mask[static_cast<std::size_t>(i)]) s += v[i] * v[i];
    return std::sqrt(s);
}

}  // namespace detail

/// ‖b - K u‖ / ‖b‖ restricted to the unconstrained rows.
inline double reduced_relative_residual(const LinearSystem& sys, const Vector& u) {
    Vector r(u.size());
    detail::multiply(sys.matrix, u, r, 1);
    r = sys.rhs - r;
    const double bnorm = detail::free_norm(sys.rhs, sys.is_constrained);
    const double rnorm = detail::free_norm(r, sys.is_constrained);
    return bnorm > 0.0 ? rnorm / bnorm : rnorm;
}

namespace detail {

inline SolutionField solve_cg(const LinearSystem& sys, const SolverConfig& cfg) {
    const Eigen::Index n = sys.matrix.rows();
    const auto& mask = sys.is_constrained;
    SolutionField out;
    out.values = Vector::Zero(n);
    for (std::size_t k = 0; k < sys.constrained.size(); ++k) out.values[sys.constrained[k]] = sys.prescribed[k];

    const double bnorm = free_norm(sys.rhs, mask);
    if (bnorm == 0.0) return out;

    Vector diag = sys.matrix.diagonal();
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(diag[i] > 0.0)) throw SolverError("cg: non-positive diagonal entry at row " + std::to_string(i));
    const Vector inv_diag = diag.cwiseInverse();

    Vector r(n), z(n), p(n), q(n);
    // The Jacobi-weighted residual tracks the energy error much better than
    // the plain one when a_gamma makes the diagonal uneven; both must pass.
    Vector b_free = sys.rhs;
    for (Eigen::Index i = 0; i < n; ++i)
        if (mask[static_cast<std::size_t>(i)]) b_free[i] = 0.0;
    const double bz = std::sqrt(b_free.dot(inv_diag.cwiseProduct(b_free)));
    const auto converged = [&] {
        return r.norm() <= cfg.rel_tolerance * bnorm &&
               std::sqrt(r.dot(inv_diag.cwiseProduct(r))) <= cfg.rel_tolerance * bz;
    };
    Vector& x = out.values;
    auto residual = [&] {
        multiply(sys.matrix, x, r, cfg.threads);
        r = sys.rhs - r;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask[static_cast<std::size_t>(i)]) r[i] = 0.0;
    };
    residual();
    int it = 0;
    // Restart from the true residual if the recursive one has drifted.
    for (int restart = 0; restart < 20; ++restart) {
        z = inv_diag.cwiseProduct(r);
        p = z;
        double rz = r.dot(z);
        while (it < cfg.max_iterations && !converged()) {
            multiply(sys.matrix, p, q, cfg.threads);
            const double pq = p.dot(q);
            if (!(pq > 0.0)) throw SolverError("cg: matrix is not positive definite (p'Kp <= 0)");
            const double alpha = rz / pq;
            x += alpha * p;
            r -= alpha * q;
            z = inv_diag.cwiseProduct(r);
            const double rz_new = r.dot(z);
            p = z + (rz_new / rz) * p;
            rz = rz_new;
            ++it;
        }
        residual();
        if (converged() || it >= cfg.max_iterations) break;
    }
    out.iterations = it;
    out.relative_residual = r.norm() / bnorm;
    if (!converged())
        throw SolverError("cg: no convergence after " + std::to_string(it) +
                          " iterations, relative residual " + format_double(out.relative_residual));
    return out;
}

inline SolutionField solve_direct(const LinearSystem& sys, const SolverConfig&) {
    const Eigen::SparseMatrix<double> a = sys.matrix;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(a);
    if (llt.info() != Eigen::Success)
        throw SolverError("direct: Cholesky factorization failed (matrix not SPD)");
    SolutionField out;
    out.values = llt.solve(sys.rhs);
    if (llt.info() != Eigen::Success) throw SolverError("direct: back substitution failed");
    for (std::size_t k = 0; k < sys.constrained.size(); ++k) out.values[sys.constrained[k]] = sys.prescribed[k];
    out.relative_residual = reduced_relative_residual(sys, out.values);
    return out;
}

}  // namespace detail

inline SolutionField solve(const LinearSystem& sys, const SolverConfig& cfg = {}) {
    cfg.validate();
    return cfg.method == SolverMethod::cg ? detail::solve_cg(sys, cfg) : detail::solve_direct(sys, cfg);
}

}  // namespace crackfem
