#pragma once

// Declarative problem description (JSON, schema_version 1), the built-in
// function registry and the shipped presets.

#include "crackfem/analysis.hpp"
#include "crackfem/refine.hpp"

#include <json.hpp>

#include <map>
#include <numbers>
#include <string>
#include <variant>

namespace crackfem {

inline constexpr int kSchemaVersion = 1;

/// A constant or the name of a built-in function.
struct FunctionRef {
    std::variant<double, std::string> value = 0.0;
    bool operator==(const FunctionRef&) const = default;
};

inline const std::map<std::string, ScalarFunction>& builtin_functions() {
    static const std::map<std::string, ScalarFunction> registry{
        {"zero", constant_function(0.0)},
        {"one", constant_function(1.0)},
        {"radial-exact", [](const Point& x) { return ExactRadialSolution{}.value(x); }},
        {"plane-1-minus-x-over-13", [](const Point& x) { return 1.0 - x.x() / 13.0; }},
        {"sin-sin", [](const Point& x) { return SinSinSolution{}.value(x); }},
        {"sin-sin-source", [](const Point& x) { return SinSinSolution::source(x); }},
    };
    return registry;
}

inline const std::map<std::string, AnyExactSolution>& builtin_exact_solutions() {
    static const std::map<std::string, AnyExactSolution> registry{
        {"radial-exact", AnyExactSolution::from(ExactRadialSolution{})},
        {"sin-sin", AnyExactSolution::from(SinSinSolution{})},
    };
    return registry;
}

inline ScalarFunction resolve(const FunctionRef& ref) {
    if (const auto* c = std::get_if<double>(&ref.value)) return constant_function(*c);
    const auto& name = std::get<std::string>(ref.value);
    const auto it = builtin_functions().find(name);
    if (it == builtin_functions().end()) throw ConfigError("unknown built-in function '" + name + "'");
    return it->second;
}

struct ChainConfig {
    std::array<int, 2> nodes{0, 0};
    /// LineCurve and ArcThroughCurve end points are taken from the nodes.
    Curve curve;
    double a_gamma = 1.0;
    FunctionRef f_gamma;
    bool operator==(const ChainConfig&) const = default;
};

struct CrackConfig {
    std::vector<Point> nodes;
    std::vector<ChainConfig> chains;
    /// Polygonal parts have length spacing_factor * h.
    double spacing_factor = 0.1;
    bool operator==(const CrackConfig&) const = default;
};

struct CoefficientConfig {
    double a1 = 1.0;
    double a2 = 1.0;
    std::string region = "none";  // "none" | "enclosed"
    FunctionRef f;
    bool operator==(const CoefficientConfig&) const = default;
};

struct ProblemConfig {
    int schema_version = kSchemaVersion;
    std::string name;
    Box domain{{0.0, 0.0}, {1.0, 1.0}};
    double h = 0.1;
    CrackConfig crack;
    CoefficientConfig coefficients;
    std::array<std::optional<FunctionRef>, 4> dirichlet;  // indexed by Side; empty = Neumann
    RefinementConfig refinement;
    SolverConfig solver;
    std::optional<std::string> exact;
    std::vector<double> levels;  // global h per study level
    std::string output_dir = "out";
    bool export_fields = false;

    bool operator==(const ProblemConfig& o) const {
        return schema_version == o.schema_version && name == o.name && domain.lo == o.domain.lo &&
               domain.hi == o.domain.hi && h == o.h && crack == o.crack && coefficients == o.coefficients &&
               dirichlet == o.dirichlet && refinement == o.refinement && solver == o.solver && exact == o.exact &&
               levels == o.levels && output_dir == o.output_dir && export_fields == o.export_fields;
    }
};

// ---------------------------------------------------------------------------
// JSON

namespace detail {

using json = nlohmann::ordered_json;

inline json point_json(const Point& p) { return json::array({p.x(), p.y()}); }

inline Point json_point(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(where + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json function_json(const FunctionRef& f) {
    if (const auto* c = std::get_if<double>(&f.value)) return *c;
    return std::get<std::string>(f.value);
}

inline FunctionRef json_function(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>()};
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (!builtin_functions().count(name)) throw ConfigError(where + ": unknown built-in function '" + name + "'");
        return {name};
    }
    throw ConfigError(where + ": expected a number or a built-in function name");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

inline json curve_json(const Curve& curve) {
    return std::visit(
        [](const auto& c) -> json {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, LineCurve>) {
                return {{"type", "segment"}};
            } else if constexpr (std::is_same_v<T, ArcThroughCurve>) {
                return {{"type", "arc_through"}, {"via", point_json(c.via)}};
            } else if constexpr (std::is_same_v<T, ArcCurve>) {
                return {{"type", "arc"}, {"center", point_json(c.center)}, {"radius", c.radius},
                        {"start_angle", c.start_angle}, {"end_angle", c.end_angle}};
            } else if constexpr (std::is_same_v<T, CircleCurve>) {
                return {{"type", "circle"}, {"center", point_json(c.center)}, {"radius", c.radius},
                        {"start_angle", c.start_angle}};
            } else {
                json pts = json::array();
                for (const auto& p : c.points) pts.push_back(point_json(p));
                return {{"type", "polyline"}, {"points", pts}};
            }
        },
        curve);
}

inline Curve json_curve(const json& j, const Point& from, const Point& to, const std::string& where) {
    const auto type = get_or<std::string>(j, "type", "", where);
    if (type == "segment") return LineCurve{from, to};
    if (type == "arc_through") return ArcThroughCurve{from, json_point(j.at("via"), where + ".via"), to};
    if (type == "arc")
        return ArcCurve{json_point(j.at("center"), where + ".center"), j.at("radius").get<double>(),
                        j.at("start_angle").get<double>(), j.at("end_angle").get<double>()};
    if (type == "circle")
        return CircleCurve{json_point(j.at("center"), where + ".center"), j.at("radius").get<double>(),
                           get_or<double>(j, "start_angle", 0.0, where)};
    if (type == "polyline") {
        PolylineCurve p;
        for (const auto& q : j.at("points")) p.points.push_back(json_point(q, where + ".points"));
        return p;
    }
    throw ConfigError(where + ": unknown curve type '" + type + "'");
}

inline std::string rule_name(GammaRule r) {
    switch (r) {
        case GammaRule::none: return "none";
        case GammaRule::fixed: return "fixed";
        case GammaRule::quadratic: return "quadratic";
    }
    return "none";
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ProblemConfig& c) {
    using detail::point_json;
    using json = nlohmann::ordered_json;
    json nodes = json::array();
    for (const auto& p : c.crack.nodes) nodes.push_back(point_json(p));
    json chains = json::array();
    for (const auto& ch : c.crack.chains)
        chains.push_back({{"nodes", {ch.nodes[0], ch.nodes[1]}},
                          {"curve", detail::curve_json(ch.curve)},
                          {"a_gamma", ch.a_gamma},
                          {"f_gamma", detail::function_json(ch.f_gamma)}});
    json boundary = json::object();
    for (Side s : kAllSides) {
        const auto& d = c.dirichlet[static_cast<std::size_t>(s)];
        boundary[std::string(to_string(s))] =
            d ? json{{"type", "dirichlet"}, {"value", detail::function_json(*d)}} : json{{"type", "neumann"}};
    }
    json j{
        {"schema_version", c.schema_version},
        {"name", c.name},
        {"domain", {{"min", point_json(c.domain.lo)}, {"max", point_json(c.domain.hi)}}},
        {"mesh", {{"h", c.h}}},
        {"crack", {{"nodes", nodes}, {"chains", chains}, {"spacing_factor", c.crack.spacing_factor}}},
        {"coefficients",
         {{"a1", c.coefficients.a1},
          {"a2", c.coefficients.a2},
          {"region", c.coefficients.region},
          {"f", detail::function_json(c.coefficients.f)}}},
        {"boundary", boundary},
        {"refinement",
         {{"rule", detail::rule_name(c.refinement.rule)},
          {"h_gamma", c.refinement.h_gamma},
          {"C", c.refinement.constant},
          {"length_scale", c.refinement.length_scale},
          {"max_generations", c.refinement.max_generations}}},
        {"solver",
         {{"method", c.solver.method == SolverMethod::cg ? "cg" : "direct"},
          {"rel_tolerance", c.solver.rel_tolerance},
          {"max_iterations", c.solver.max_iterations}}},
        {"study", {{"levels", c.levels}}},
        {"output", {{"dir", c.output_dir}, {"export_fields", c.export_fields}}},
    };
    if (c.exact) j["exact"] = *c.exact;
    return j;
}

inline ProblemConfig config_from_json(const nlohmann::ordered_json& j) {
    using detail::get_or;
    using detail::json_point;
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    ProblemConfig c;
    try {
        c.schema_version = get_or<int>(j, "schema_version", -1, "config");
        if (c.schema_version != kSchemaVersion)
            throw ConfigError("config.schema_version: expected " + std::to_string(kSchemaVersion));
        c.name = get_or<std::string>(j, "name", "", "config");
        const auto& dom = j.at("domain");
        c.domain = Box{json_point(dom.at("min"), "domain.min"), json_point(dom.at("max"), "domain.max")};
        if (!(c.domain.hi.x() > c.domain.lo.x() && c.domain.hi.y() > c.domain.lo.y()))
            throw ConfigError("domain: max must exceed min");
        c.h = j.at("mesh").at("h").get<double>();
        if (!(c.h > 0.0)) throw ConfigError("mesh.h must be positive");

        if (j.contains("crack")) {
            const auto& cr = j.at("crack");
            for (const auto& p : cr.value("nodes", nlohmann::ordered_json::array()))
                c.crack.nodes.push_back(json_point(p, "crack.nodes"));
            c.crack.spacing_factor = get_or<double>(cr, "spacing_factor", 0.1, "crack");
            if (!(c.crack.spacing_factor > 0.0)) throw ConfigError("crack.spacing_factor must be positive");
            int idx = 0;
            for (const auto& ch : cr.value("chains", nlohmann::ordered_json::array())) {
                const std::string where = "crack.chains[" + std::to_string(idx++) + "]";
                ChainConfig cc;
                const auto& n = ch.at("nodes");
                if (!n.is_array() || n.size() != 2) throw ConfigError(where + ".nodes: expected two node indices");
                cc.nodes = {n[0].get<int>(), n[1].get<int>()};
                for (int node : cc.nodes)
                    if (node < 0 || static_cast<std::size_t>(node) >= c.crack.nodes.size())
                        throw ConfigError(where + ".nodes: index out of range");
                cc.curve = detail::json_curve(ch.at("curve"), c.crack.nodes[static_cast<std::size_t>(cc.nodes[0])],
                                              c.crack.nodes[static_cast<std::size_t>(cc.nodes[1])], where + ".curve");
                cc.a_gamma = get_or<double>(ch, "a_gamma", 1.0, where);
                if (cc.a_gamma < 0.0) throw ConfigError(where + ".a_gamma must be >= 0");
                cc.f_gamma = ch.contains("f_gamma") ? detail::json_function(ch.at("f_gamma"), where + ".f_gamma")
                                                    : FunctionRef{};
                c.crack.chains.push_back(std::move(cc));
            }
        }

        if (j.contains("coefficients")) {
            const auto& co = j.at("coefficients");
            c.coefficients.a1 = get_or<double>(co, "a1", 1.0, "coefficients");
            c.coefficients.a2 = get_or<double>(co, "a2", 1.0, "coefficients");
            if (!(c.coefficients.a1 > 0.0 && c.coefficients.a2 > 0.0))
                throw ConfigError("coefficients: a1 and a2 must be positive");
            c.coefficients.region = get_or<std::string>(co, "region", "none", "coefficients");
            if (c.coefficients.region != "none" && c.coefficients.region != "enclosed")
                throw ConfigError("coefficients.region: expected 'none' or 'enclosed'");
            if (co.contains("f")) c.coefficients.f = detail::json_function(co.at("f"), "coefficients.f");
            if (c.coefficients.a1 != c.coefficients.a2 && c.coefficients.region == "none")
                throw ConfigError("coefficients: a1 != a2 needs region = enclosed");
        }

        const auto& bnd = j.at("boundary");
        for (Side s : kAllSides) {
            const std::string key(to_string(s));
            if (!bnd.contains(key)) continue;
            const auto& b = bnd.at(key);
            const auto type = get_or<std::string>(b, "type", "", "boundary." + key);
            if (type == "dirichlet") {
                c.dirichlet[static_cast<std::size_t>(s)] = detail::json_function(b.at("value"), "boundary." + key);
            } else if (type != "neumann") {
                throw ConfigError("boundary." + key + ".type: expected 'dirichlet' or 'neumann'");
            }
        }

        if (j.contains("refinement")) {
            const auto& r = j.at("refinement");
            const auto rule = get_or<std::string>(r, "rule", "none", "refinement");
            if (rule == "none") c.refinement.rule = GammaRule::none;
            else if (rule == "fixed") c.refinement.rule = GammaRule::fixed;
            else if (rule == "quadratic") c.refinement.rule = GammaRule::quadratic;
            else throw ConfigError("refinement.rule: expected none, fixed or quadratic");
            c.refinement.h_gamma = get_or<double>(r, "h_gamma", 0.0, "refinement");
            c.refinement.constant = get_or<double>(r, "C", 1.0, "refinement");
            c.refinement.length_scale = get_or<double>(r, "length_scale", 0.0, "refinement");
            c.refinement.max_generations = get_or<int>(r, "max_generations", 60, "refinement");
        }
        c.refinement.global_h = c.h;

        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            const auto method = get_or<std::string>(s, "method", "cg", "solver");
            if (method == "cg") c.solver.method = SolverMethod::cg;
            else if (method == "direct") c.solver.method = SolverMethod::direct;
            else throw ConfigError("solver.method: expected cg or direct");
            c.solver.rel_tolerance = get_or<double>(s, "rel_tolerance", 1e-10, "solver");
            c.solver.max_iterations = get_or<int>(s, "max_iterations", 200000, "solver");
        }

        if (j.contains("exact")) {
            c.exact = j.at("exact").get<std::string>();
            if (!builtin_exact_solutions().count(*c.exact))
                throw ConfigError("exact: unknown exact solution '" + *c.exact + "'");
        }
        if (j.contains("study")) c.levels = j.at("study").value("levels", std::vector<double>{});
        if (j.contains("output")) {
            c.output_dir = get_or<std::string>(j.at("output"), "dir", "out", "output");
            c.export_fields = get_or<bool>(j.at("output"), "export_fields", false, "output");
        }
    } catch (const nlohmann::ordered_json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    try {
        c.refinement.validate();
        c.solver.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

inline ProblemConfig parse_config(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::ordered_json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return config_from_json(j);
}

inline std::string serialize_config(const ProblemConfig& c) { return to_json(c).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Presets

/// Square (1, e^{5/4})² with the arc r = e between its two boundary
/// crossings, a = a_Γ = 1, f = 0, f_Γ = 1 and the exact solution as
/// Dirichlet data on all sides. Levels h = L 2^{-k}, k = 3..7.
inline ProblemConfig radial_preset(bool local) {
    ProblemConfig c;
    const Box dom = ExactRadialSolution::domain();
    const double side = dom.hi.x() - dom.lo.x();
    c.name = local ? "radial-local" : "radial-uniform";
    c.domain = dom;
    const double r = ExactRadialSolution::kCrackRadius;
    const double w = std::sqrt(r * r - 1.0);
    const double t0 = std::atan2(1.0, w);
    const double t1 = std::atan2(w, 1.0);
    c.crack.nodes = {Point(w, 1.0), Point(1.0, w)};
    c.crack.chains.push_back({{0, 1}, ArcCurve{{0.0, 0.0}, r, t0, t1}, 1.0, {1.0}});
    c.coefficients.f = {0.0};
    for (Side s : kAllSides) c.dirichlet[static_cast<std::size_t>(s)] = FunctionRef{"radial-exact"};
    c.exact = "radial-exact";
    for (int k = 3; k <= 7; ++k) c.levels.push_back(side * std::ldexp(1.0, -k));
    c.h = c.levels.front();
    c.refinement.global_h = c.h;
    c.refinement.rule = local ? GammaRule::quadratic : GammaRule::none;
    c.solver.method = local ? SolverMethod::direct : SolverMethod::cg;
    c.output_dir = "out/" + c.name;
    return c;
}

/// Rectangle (0,13)×(0,9.5) with a bifurcating crack network (two
/// junctions, three tips), a = 1, a_Γ = 100, f = f_Γ = 0, u = 1 at x = 0,
/// u = 0 at x = 13, no-flux top and bottom. The junctions lie on vertices
/// of the h = 0.5 base grid.
inline ProblemConfig crack_network_preset(bool local) {
    ProblemConfig c;
    c.name = local ? "crack-network-local" : "crack-network";
    c.domain = Box{{0.0, 0.0}, {13.0, 9.5}};
    c.h = 0.5;
    c.crack.nodes = {{1.5, 2.0}, {5.0, 4.5}, {11.5, 7.5}, {9.0, 1.5}, {8.0, 6.5}, {7.0, 9.5}};
    const auto chain = [](int a, int b, Point via) {
        return ChainConfig{{a, b}, ArcThroughCurve{{}, via, {}}, 100.0, {0.0}};
    };
    c.crack.chains = {chain(0, 1, {3.0, 3.6}), chain(1, 4, {6.6, 5.6}), chain(4, 2, {9.8, 7.3}),
                      chain(1, 3, {7.2, 2.4}), chain(4, 5, {7.7, 8.0})};
    for (auto& ch : c.crack.chains) {
        auto& arc = std::get<ArcThroughCurve>(ch.curve);
        arc.a = c.crack.nodes[static_cast<std::size_t>(ch.nodes[0])];
        arc.b = c.crack.nodes[static_cast<std::size_t>(ch.nodes[1])];
    }
    c.dirichlet[static_cast<std::size_t>(Side::left)] = FunctionRef{1.0};
    c.dirichlet[static_cast<std::size_t>(Side::right)] = FunctionRef{0.0};
    c.refinement.global_h = c.h;
    if (local) {
        c.refinement.rule = GammaRule::fixed;
        c.refinement.h_gamma = 0.5 * std::numbers::sqrt2 / 16.0;
    }
    c.solver.method = SolverMethod::direct;
    c.output_dir = "out/" + c.name;
    c.export_fields = true;
    return c;
}

/// Unit square, no crack, u = sin(πx) sin(πy).
inline ProblemConfig poisson_preset() {
    ProblemConfig c;
    c.name = "poisson-sin";
    c.domain = Box{{0.0, 0.0}, {1.0, 1.0}};
    c.coefficients.f = {"sin-sin-source"};
    for (Side s : kAllSides) c.dirichlet[static_cast<std::size_t>(s)] = FunctionRef{0.0};
    c.exact = "sin-sin";
    for (int k = 2; k <= 6; ++k) c.levels.push_back(std::ldexp(1.0, -k));
    c.h = c.levels.front();
    c.refinement.global_h = c.h;
    c.output_dir = "out/" + c.name;
    return c;
}

inline std::map<std::string, ProblemConfig> presets() {
    std::map<std::string, ProblemConfig> out;
    for (auto c : {radial_preset(false), radial_preset(true), crack_network_preset(false),
                   crack_network_preset(true), poisson_preset()})
        out.emplace(c.name, c);
    return out;
}

}  // namespace crackfem
