// crackfem command line: run a single problem, run a convergence study, or
// inspect the shipped presets.

#include "crackfem.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

using namespace crackfem;

ProblemConfig load_config(const std::string& arg) {
    if (std::filesystem::is_regular_file(arg)) {
        std::ifstream in(arg);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_config(ss.str());
    }
    const auto all = presets();
    const auto it = all.find(arg);
    if (it == all.end()) throw ConfigError("'" + arg + "' is neither a config file nor a preset name");
    return it->second;
}

struct Overrides {
    int threads = 1;
    std::string out;
    std::string solver;
};

void apply(ProblemConfig& c, const Overrides& o) {
    if (o.solver == "cg") c.solver.method = SolverMethod::cg;
    else if (o.solver == "direct") c.solver.method = SolverMethod::direct;
    if (!o.out.empty()) c.output_dir = o.out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crackfem: P1 finite elements with a superimposed crack stiffness"};
    app.require_subcommand(1);
    Overrides ov;
    std::string config_arg;
    std::string preset_name;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_arg, "Config file or preset name")->required();
        cmd->add_option("--threads", ov.threads, "Worker threads for assembly and matvec")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--out", ov.out, "Output directory (overrides the config)");
        cmd->add_option("--solver", ov.solver, "Linear solver")->check(CLI::IsMember({"cg", "direct"}));
    };
    auto* run = app.add_subcommand("run", "Solve one problem at the config's mesh size");
    add_common(run);
    auto* study = app.add_subcommand("study", "Run every study level and report convergence slopes");
    add_common(study);
    auto* pre = app.add_subcommand("presets", "Shipped problem configs");
    pre->require_subcommand(1);
    pre->add_subcommand("list", "List preset names");
    auto* show = pre->add_subcommand("show", "Print a preset as JSON");
    show->add_option("name", preset_name)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (pre->parsed()) {
            const auto all = presets();
            if (pre->got_subcommand("list")) {
                for (const auto& [name, c] : all) std::cout << name << '\n';
            } else {
                const auto it = all.find(preset_name);
                if (it == all.end()) throw ConfigError("unknown preset '" + preset_name + "'");
                std::cout << serialize_config(it->second);
            }
            return 0;
        }
        ProblemConfig config = load_config(config_arg);
        apply(config, ov);
        if (run->parsed()) {
            const auto s = run_single(config, config.output_dir, ov.threads);
            std::cout << "vertices " << s.mesh.vertices.size() << " triangles " << s.mesh.triangles.size()
                      << " crack segments " << s.segments.segments.size() << '\n';
            if (s.solution.iterations > 0) std::cout << "cg iterations " << s.solution.iterations << '\n';
            if (s.norms)
                std::cout << "l2 " << format_double(s.norms->l2) << " h1_semi " << format_double(s.norms->h1_semi)
                          << " energy " << format_double(s.norms->energy) << '\n';
            if (!s.crack.empty())
                std::cout << "max junction imbalance "
                          << format_double(max_junction_residual(
                                 kirchhoff_residual(s.mesh, s.solution, s.crack, s.segments)))
                          << '\n';
        } else {
            const auto r = run_convergence_study(config, config.output_dir, ov.threads);
            write_norm_csv_header(std::cout);
            for (const auto& rep : r.reports) write_norm_csv_row(std::cout, rep);
            std::cout << "slopes l2 " << format_double(r.slopes.l2) << " h1_semi "
                      << format_double(r.slopes.h1_semi) << " l2_gamma " << format_double(r.slopes.l2_gamma)
                      << " energy " << format_double(r.slopes.energy) << '\n';
        }
        std::cout << "wrote " << config.output_dir << '\n';
    } catch (const Error& e) {
        std::cerr << "error[" << e.kind() << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
