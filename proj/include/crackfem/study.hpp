#pragma once

// Runs a ProblemConfig end to end: mesh, crack, refinement, assembly, solve,
// norms and file exports.

#include "crackfem/config.hpp"

#include <filesystem>
#include <fstream>

namespace crackfem {

struct ProblemSolution {
    Mesh mesh;
    CrackGraph crack;
    SegmentedCrack segments;
    Coefficients coefficients;
    LinearSystem system;
    SolutionField solution;
    DofProfile dofs;
    std::optional<NormReport> norms;
};

inline CrackGraph build_crack(const ProblemConfig& c, double global_h, double tol) {
    std::vector<ChainSpec> specs;
    for (const auto& ch : c.crack.chains) specs.push_back({ch.nodes, ch.curve, ch.a_gamma, resolve(ch.f_gamma)});
    return build_crack_graph(c.crack.nodes, specs, c.crack.spacing_factor * global_h, tol);
}

inline Coefficients build_coefficients(const ProblemConfig& c, const CrackGraph& crack) {
    Coefficients co;
    co.a1 = c.coefficients.a1;
    co.a2 = c.coefficients.a2;
    co.f = resolve(c.coefficients.f);
    if (c.coefficients.region == "enclosed") {
        if (crack.chains().size() != 1 || !crack.chains().front().closed())
            throw ConfigError("coefficients.region = enclosed needs a crack made of one closed chain");
        co.region = enclosed_region_classifier(crack);
    }
    return co;
}

inline BoundarySpec build_boundary(const ProblemConfig& c) {
    BoundarySpec bc;
    for (Side s : kAllSides)
        if (const auto& d = c.dirichlet[static_cast<std::size_t>(s)]) bc.set_dirichlet(s, resolve(*d));
    return bc;
}

/// h_Γ as realized by the mesh: the largest diameter over T_h(Γ), or h
/// when there is no crack.
inline double realized_h_gamma(const Mesh& mesh, const SegmentedCrack& segments) {
    double h = 0.0;
    for (const auto& s : segments.segments) h = std::max(h, mesh.diameter(static_cast<std::size_t>(s.triangle)));
    return h > 0.0 ? h : mesh.max_diameter();
}

inline ProblemSolution solve_problem(const ProblemConfig& config, double global_h, int threads = 1) {
    Mesh base = build_rectangle_mesh(config.domain, global_h);
    CrackGraph crack = build_crack(config, global_h, base.tolerance());
    RefinementConfig rc = config.refinement;
    rc.global_h = global_h;
    Mesh mesh = refine_near_crack(base, crack, rc);
    SegmentedCrack segments = cut_chains(mesh, crack);
    Coefficients coeffs = build_coefficients(config, crack);
    LinearSystem system = assemble(mesh, segments, crack, coeffs, build_boundary(config), threads);
    SolverConfig sc = config.solver;
    sc.threads = threads;
    SolutionField solution = solve(system, sc);
    std::optional<NormReport> norms;
    if (config.exact) {
        const auto& exact = builtin_exact_solutions().at(*config.exact);
        norms = error_norms(mesh, solution, exact, coeffs, crack, segments);
        norms->h_gamma = realized_h_gamma(mesh, segments);
    }
    DofProfile dofs = dof_count_profile(mesh, crack);
    return {std::move(mesh), std::move(crack),  std::move(segments), std::move(coeffs),
            std::move(system), std::move(solution), dofs, norms};
}

/// Largest |imbalance| over nodes where at least three chains meet.
inline double max_junction_residual(const std::vector<NodeFlux>& fluxes) {
    double m = 0.0;
    for (const auto& f : fluxes)
        if (f.degree >= 3) m = std::max(m, std::abs(f.imbalance));
    return m;
}

// ---------------------------------------------------------------------------
// Exports

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("io", "cannot open '" + path.string() + "' for writing");
    return os;
}

}  // namespace detail

inline void write_field_csv(std::ostream& os, const Mesh& mesh, const SolutionField& u) {
    os << "vertex,x,y,u\n";
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        os << i << ',' << format_double(mesh.vertices[i].x()) << ',' << format_double(mesh.vertices[i].y()) << ','
           << format_double(u.values[static_cast<Eigen::Index>(i)]) << '\n';
}

inline void write_kirchhoff_csv(std::ostream& os, const std::vector<NodeFlux>& fluxes) {
    os << "node,degree,imbalance\n";
    for (const auto& f : fluxes) os << f.node << ',' << f.degree << ',' << format_double(f.imbalance) << '\n';
}

/// Writes <prefix>mesh.txt, solution.vtk, field.csv and, when present,
/// norms.csv and kirchhoff.csv into `dir`.
inline void export_solution(const std::filesystem::path& dir, const std::string& prefix, const ProblemSolution& s,
                            int level = 0) {
    std::filesystem::create_directories(dir);
    {
        auto os = detail::open_output(dir / (prefix + "mesh.txt"));
        write_mesh_text(os, s.mesh);
    }
    {
        auto os = detail::open_output(dir / (prefix + "solution.vtk"));
        const std::vector<double> u(s.solution.values.begin(), s.solution.values.end());
        write_vtk(os, s.mesh, u, "u");
    }
    {
        auto os = detail::open_output(dir / (prefix + "field.csv"));
        write_field_csv(os, s.mesh, s.solution);
    }
    if (s.norms) {
        auto os = detail::open_output(dir / (prefix + "norms.csv"));
        write_norm_csv_header(os);
        NormReport r = *s.norms;
        r.level = level;
        write_norm_csv_row(os, r);
    }
    if (!s.crack.empty()) {
        auto os = detail::open_output(dir / (prefix + "kirchhoff.csv"));
        write_kirchhoff_csv(os, kirchhoff_residual(s.mesh, s.solution, s.crack, s.segments));
    }
}

inline ProblemSolution run_single(const ProblemConfig& config, const std::filesystem::path& out_dir, int threads = 1) {
    ProblemSolution s = solve_problem(config, config.h, threads);
    export_solution(out_dir, "", s);
    return s;
}

struct StudyResult {
    std::vector<NormReport> reports;
    std::vector<DofProfile> dofs;
    Slopes slopes;
};

/// Solves every level of `config.levels`, writes rates.csv, dofs.csv and
/// slopes.csv, plus level<k>_* field exports when export_fields is set.
inline StudyResult run_convergence_study(const ProblemConfig& config, const std::filesystem::path& out_dir,
                                         int threads = 1) {
    if (!config.exact) throw ConfigError("study: config declares no exact solution");
    if (config.levels.size() < 3) throw ConfigError("study: needs at least three levels");
    StudyResult result;
    for (std::size_t k = 0; k < config.levels.size(); ++k) {
        ProblemSolution s = solve_problem(config, config.levels[k], threads);
        NormReport r = *s.norms;
        r.level = static_cast<int>(k);
        result.reports.push_back(r);
        result.dofs.push_back(s.dofs);
        if (config.export_fields) export_solution(out_dir, "level" + std::to_string(k) + "_", s, r.level);
    }
    result.slopes = eoc(result.reports);

    std::filesystem::create_directories(out_dir);
    {
        auto os = detail::open_output(out_dir / "rates.csv");
        write_norm_csv_header(os);
        for (const auto& r : result.reports) write_norm_csv_row(os, r);
    }
    {
        auto os = detail::open_output(out_dir / "dofs.csv");
        os << "level,h,n_total,n_near_crack\n";
        for (std::size_t k = 0; k < result.dofs.size(); ++k)
            os << k << ',' << format_double(config.levels[k]) << ',' << result.dofs[k].total << ','
               << result.dofs[k].near_crack << '\n';
    }
    {
        auto os = detail::open_output(out_dir / "slopes.csv");
        os << "norm,slope\n"
           << "l2," << format_double(result.slopes.l2) << '\n'
           << "h1_semi," << format_double(result.slopes.h1_semi) << '\n'
           << "l2_gamma," << format_double(result.slopes.l2_gamma) << '\n'
           << "energy," << format_double(result.slopes.energy) << '\n';
    }
    return result;
}

}  // namespace crackfem
