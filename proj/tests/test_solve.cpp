#include "support.hpp"

#include <gtest/gtest.h>

using namespace crackfem;
using namespace testing_support;

namespace {

LinearSystem unconstrained(const Eigen::MatrixXd& k, const Vector& b) {
    LinearSystem s;
    s.stiffness = k.sparseView();
    s.matrix = s.stiffness;
    s.load = b;
    s.rhs = b;
    s.is_constrained.assign(static_cast<std::size_t>(b.size()), 0);
    return s;
}

LinearSystem radial_system(double h, double a_gamma) {
    const Mesh m = radial_mesh(h);
    auto chains = radial_crack(h, m.tolerance()).chains();
    for (auto& c : chains) c.a_gamma = a_gamma;
    const CrackGraph crack(radial_crack(h, m.tolerance()).nodes(), chains, m.tolerance());
    BoundarySpec bc;
    const ExactRadialSolution ex;
    for (Side s : kAllSides) bc.set_dirichlet(s, [ex](const Point& x) { return ex.value(x); });
    return assemble(m, cut_chains(m, crack), crack, Coefficients{}, bc);
}

double energy(const SparseMatrix& k, const Vector& v) { return std::sqrt(v.dot(k * v)); }

}  // namespace

TEST(Solve, OneByOne) {
    Eigen::MatrixXd k(1, 1);
    k << 4.0;
    Vector b(1);
    b << 3.0;
    for (auto method : {SolverMethod::cg, SolverMethod::direct}) {
        const auto u = solve(unconstrained(k, b), {method});
        EXPECT_NEAR(u.values[0], 0.75, 1e-15);
    }
}

TEST(Solve, Identity) {
    const Vector b = Vector::LinSpaced(7, -1.0, 2.0);
    for (auto method : {SolverMethod::cg, SolverMethod::direct}) {
        const auto u = solve(unconstrained(Eigen::MatrixXd::Identity(7, 7), b), {method});
        EXPECT_LT((u.values - b).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(Solve, ConstrainedValuesExactAndResidualSmall) {
    const auto sys = radial_system(radial_side() / 16, 1.0);
    const auto u = solve(sys);
    for (std::size_t k = 0; k < sys.constrained.size(); ++k)
        EXPECT_EQ(u.values[sys.constrained[k]], sys.prescribed[k]);
    EXPECT_LE(reduced_relative_residual(sys, u.values), 1e-10);
    EXPECT_GT(u.iterations, 0);
}

TEST(Solve, CgAgreesWithDirect) {
    for (double a_gamma : {0.0, 1.0, 100.0}) {
        const auto sys = radial_system(radial_side() / 16, a_gamma);
        const auto cg = solve(sys, {SolverMethod::cg});
        const auto direct = solve(sys, {SolverMethod::direct});
        EXPECT_LE(energy(sys.stiffness, cg.values - direct.values), 1e-8 * energy(sys.stiffness, direct.values));
    }
}

TEST(Solve, ThreadCountDoesNotChangeResult) {
    const auto sys = radial_system(radial_side() / 16, 1.0);
    SolverConfig one, four;
    four.threads = 4;
    EXPECT_EQ(solve(sys, one).values, solve(sys, four).values);
}

TEST(Solve, PermutationInvariance) {
    const auto sys = radial_system(radial_side() / 16, 10.0);
    const auto n = sys.matrix.rows();
    Eigen::VectorXi idx = Eigen::VectorXi::LinSpaced(n, 0, static_cast<int>(n) - 1);
    std::mt19937 rng(9);
    std::shuffle(idx.data(), idx.data() + n, rng);
    const Eigen::PermutationMatrix<Eigen::Dynamic> p(idx);
    LinearSystem permuted = sys;
    permuted.matrix = (p * Eigen::SparseMatrix<double>(sys.matrix) * p.transpose());
    permuted.rhs = p * sys.rhs;
    for (Eigen::Index i = 0; i < n; ++i) permuted.is_constrained[static_cast<std::size_t>(idx[i])] = sys.is_constrained[static_cast<std::size_t>(i)];
    for (auto& v : permuted.constrained) v = idx[v];
    const auto base = solve(sys);
    for (auto method : {SolverMethod::cg, SolverMethod::direct}) {
        const Vector back = p.transpose() * solve(permuted, {method}).values;
        EXPECT_LE((back - base.values).norm(), 1e-8 * base.values.norm());
    }
}

TEST(Solve, SinSinNodalErrorQuartersPerRefinement) {
    std::vector<double> err;
    const SinSinSolution ex;
    for (int n : {8, 16, 32, 64}) {
        const Mesh m = build_rectangle_mesh(Box{Point(0, 0), Point(1, 1)}, 1.0 / n);
        Coefficients co;
        co.f = SinSinSolution::source;
        BoundarySpec bc;
        for (Side s : kAllSides) bc.set_dirichlet(s, constant_function(0.0));
        const auto u = solve(assemble(m, {}, CrackGraph{}, co, bc), {SolverMethod::direct});
        double e = 0.0;
        for (std::size_t v = 0; v < m.vertices.size(); ++v)
            e = std::max(e, std::abs(u.values[static_cast<Eigen::Index>(v)] - ex.value(m.vertices[v])));
        err.push_back(e);
    }
    for (std::size_t k = 1; k < err.size(); ++k) EXPECT_NEAR(err[k - 1] / err[k], 4.0, 0.6);
}

TEST(Solve, DiagnosesNonConvergence) {
    const auto sys = radial_system(radial_side() / 16, 1.0);
    SolverConfig cfg;
    cfg.max_iterations = 3;
    EXPECT_THROW(solve(sys, cfg), SolverError);
}

TEST(Solve, DiagnosesIndefiniteMatrix) {
    Eigen::MatrixXd k(2, 2);
    k << 1.0, 2.0, 2.0, 1.0;
    const Vector b = Vector::Ones(2);
    EXPECT_THROW(solve(unconstrained(k, b), {SolverMethod::direct}), SolverError);
    Eigen::MatrixXd neg(2, 2);
    neg << -1.0, 0.0, 0.0, 1.0;
    EXPECT_THROW(solve(unconstrained(neg, b), {SolverMethod::cg}), SolverError);
}

TEST(SolverConfig, Validation) {
    SolverConfig c;
    c.rel_tolerance = 1.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c.rel_tolerance = 1e-8;
    c.max_iterations = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
}
