#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace crackfem;
using namespace testing_support;

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("crackfem_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

ProblemConfig short_study(bool local) {
    auto c = radial_preset(local);
    c.levels.resize(3);
    c.h = c.levels.front();
    c.solver.method = SolverMethod::direct;
    return c;
}

}  // namespace

TEST(Study, PlaneSolutionWithoutCrackStiffness) {
    auto cfg = crack_network_preset(true);
    for (auto& ch : cfg.crack.chains) ch.a_gamma = 0.0;
    cfg.solver.method = SolverMethod::cg;
    const auto s = solve_problem(cfg, cfg.h);
    ASSERT_GT(s.segments.segments.size(), 0u);
    double worst = 0.0;
    for (std::size_t v = 0; v < s.mesh.vertices.size(); ++v)
        worst = std::max(worst, std::abs(s.solution.values[static_cast<Eigen::Index>(v)] - (1.0 - s.mesh.vertices[v].x() / 13.0)));
    EXPECT_LE(worst, 1e-8);
}

TEST(Study, NetworkRunExports) {
    auto cfg = crack_network_preset(false);
    const auto dir = scratch("network");
    const auto s = run_single(cfg, dir);
    for (const char* f : {"mesh.txt", "solution.vtk", "field.csv", "kirchhoff.csv"})
        EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    EXPECT_FALSE(std::filesystem::exists(dir / "norms.csv"));
    // The permeable crack pulls the field away from the plane.
    double dev = 0.0;
    for (std::size_t v = 0; v < s.mesh.vertices.size(); ++v)
        dev = std::max(dev, std::abs(s.solution.values[static_cast<Eigen::Index>(v)] - (1.0 - s.mesh.vertices[v].x() / 13.0)));
    EXPECT_GT(dev, 0.05);
    const auto field = read_file(dir / "field.csv");
    EXPECT_EQ(field.rfind("vertex,x,y,u\n", 0), 0u);
    std::filesystem::remove_all(dir);
}

TEST(Study, EmptyCrackIsPlainPoisson) {
    auto cfg = poisson_preset();
    const auto s = solve_problem(cfg, 1.0 / 16);
    EXPECT_TRUE(s.crack.empty());
    EXPECT_TRUE(s.segments.segments.empty());
    ASSERT_TRUE(s.norms);
    EXPECT_EQ(s.norms->l2_gamma, 0.0);
    EXPECT_GT(s.norms->l2, 0.0);
}

TEST(Study, PoissonBaselineRates) {
    const auto dir = scratch("poisson");
    const auto r = run_convergence_study(poisson_preset(), dir);
    EXPECT_NEAR(r.slopes.h1_semi, 1.0, 0.1);
    EXPECT_NEAR(r.slopes.l2, 2.0, 0.1);
    for (const char* f : {"rates.csv", "slopes.csv", "dofs.csv"}) EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
    std::filesystem::remove_all(dir);
}

TEST(Study, UniformSlopeNeverExceedsLocal) {
    const auto uni = run_convergence_study(short_study(false), scratch("uni"));
    const auto loc = run_convergence_study(short_study(true), scratch("loc"));
    EXPECT_LE(uni.slopes.l2, loc.slopes.l2);
    EXPECT_LE(uni.slopes.h1_semi, loc.slopes.h1_semi);
    for (const auto* r : {&uni, &loc})
        for (std::size_t k = 1; k < r->reports.size(); ++k) {
            const auto& a = r->reports[k - 1];
            const auto& b = r->reports[k];
            EXPECT_LE(b.l2, 1.2 * a.l2);
            EXPECT_LE(b.h1_semi, 1.2 * a.h1_semi);
            EXPECT_LE(b.l2_gamma, 1.2 * a.l2_gamma);
            EXPECT_LE(b.energy, 1.2 * a.energy);
            EXPECT_LT(b.h, a.h);
        }
    // Locally refined levels resolve the crack at roughly h².
    for (const auto& rep : loc.reports) EXPECT_LE(rep.h_gamma, rep.h * rep.h);
    std::filesystem::remove_all(scratch("uni"));
    std::filesystem::remove_all(scratch("loc"));
}

TEST(Study, RepeatedRunsAreBitIdentical) {
    auto cfg = short_study(true);
    cfg.export_fields = true;
    cfg.solver.method = SolverMethod::cg;
    const auto a = scratch("det_a"), b = scratch("det_b");
    run_convergence_study(cfg, a);
    run_convergence_study(cfg, b, 3);
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
        const auto other = b / entry.path().filename();
        ASSERT_TRUE(std::filesystem::exists(other)) << other;
        EXPECT_EQ(read_file(entry.path()), read_file(other)) << entry.path().filename();
        ++files;
    }
    EXPECT_GE(files, 3u + 3u * 4u);
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}

TEST(Study, StudyNeedsExactSolutionAndLevels) {
    EXPECT_THROW(run_convergence_study(crack_network_preset(false), scratch("x")), ConfigError);
    auto c = radial_preset(false);
    c.levels.resize(2);
    EXPECT_THROW(run_convergence_study(c, scratch("x")), ConfigError);
}
