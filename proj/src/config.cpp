#include "stiga/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace stiga {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where)
{
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(where + "." + key + ": " + e.what());
    }
}

GeometrySpec parse_geometry(const json& g)
{
    if (!g.is_object()) throw std::invalid_argument("geometry: expected an object");
    reject_unknown(g, {"knots", "degree", "control_points", "weights"}, "geometry");
    GeometrySpec spec;
    spec.knots = get<std::vector<std::vector<double>>>(g, "knots", "geometry");
    const json& deg = g.at("degree");
    if (deg.is_array()) {
        spec.degrees = get<std::vector<int>>(g, "degree", "geometry");
    } else {
        spec.degrees.assign(spec.knots.size(), get<int>(g, "degree", "geometry"));
    }
    const auto pts = get<std::vector<std::vector<double>>>(g, "control_points", "geometry");
    const auto dim = Eigen::Index(spec.knots.size());
    spec.control_points.resize(dim, Eigen::Index(pts.size()));
    for (std::size_t j = 0; j < pts.size(); ++j) {
        if (Eigen::Index(pts[j].size()) != dim) {
            throw std::invalid_argument("geometry: control point " + std::to_string(j) + " has " +
                                        std::to_string(pts[j].size()) + " coordinates, expected " +
                                        std::to_string(dim));
        }
        for (Eigen::Index i = 0; i < dim; ++i) spec.control_points(i, Eigen::Index(j)) = pts[j][std::size_t(i)];
    }
    if (g.contains("weights")) spec.weights = get<std::vector<double>>(g, "weights", "geometry");
    return spec;
}

SolverConfig parse_solver(const json& s)
{
    if (!s.is_object()) throw std::invalid_argument("solver: expected an object");
    reject_unknown(s, {"method", "tol", "restart", "max_iter"}, "solver");
    SolverConfig out;
    if (s.contains("method")) {
        const auto m = get<std::string>(s, "method", "solver");
        if (m == "direct") out.method = SolverMethod::direct;
        else if (m == "gmres") out.method = SolverMethod::gmres;
        else if (m == "auto") out.method = SolverMethod::automatic;
        else throw std::invalid_argument("solver.method: expected direct, gmres or auto, got '" + m + "'");
    }
    if (s.contains("tol")) out.tol = get<double>(s, "tol", "solver");
    if (s.contains("restart")) out.restart = get<int>(s, "restart", "solver");
    if (s.contains("max_iter")) out.max_iter = get<int>(s, "max_iter", "solver");
    return out;
}

}  // namespace

CaseConfig parse_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("config: expected a JSON object");
    reject_unknown(root,
                   {"case", "geometry", "form", "degree", "levels", "theta", "quadrature_order", "solver", "output",
                    "deterministic"},
                   "config");
    CaseConfig c;
    c.case_id = get<std::string>(root, "case", "config");
    if (root.contains("geometry")) c.geometry = parse_geometry(root.at("geometry"));
    if (root.contains("form")) {
        const auto f = get<std::string>(root, "form", "config");
        if (f == "fixed") c.form = FormVariant::fixed;
        else if (f == "moving") c.form = FormVariant::moving;
        else throw std::invalid_argument("config.form: expected fixed or moving, got '" + f + "'");
    }
    if (root.contains("degree")) c.degree = get<int>(root, "degree", "config");
    if (root.contains("levels")) c.levels = get<int>(root, "levels", "config");
    if (root.contains("theta")) c.theta = get<double>(root, "theta", "config");
    if (root.contains("quadrature_order")) c.quad_order = get<int>(root, "quadrature_order", "config");
    if (root.contains("solver")) c.solver = parse_solver(root.at("solver"));
    if (root.contains("output")) c.output = get<std::string>(root, "output", "config");
    if (root.contains("deterministic")) c.deterministic = get<bool>(root, "deterministic", "config");
    validate(c);
    return c;
}

CaseConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot read '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config(os.str());
}

void validate(const CaseConfig& c)
{
    const auto ids = builtin_case_ids();
    const bool custom = c.case_id == "custom";
    if (!custom && std::find(ids.begin(), ids.end(), c.case_id) == ids.end()) {
        throw std::invalid_argument("config.case: unknown case '" + c.case_id + "'");
    }
    if (custom && (!c.geometry || !c.form)) {
        throw std::invalid_argument("config: case 'custom' needs a geometry block and a form");
    }
    if (!custom && c.geometry) throw std::invalid_argument("config: geometry is only accepted for case 'custom'");
    if (c.degree < 1 || c.degree > kMaxDegree) {
        throw std::invalid_argument("config.degree: must lie in [1, " + std::to_string(kMaxDegree) + "]");
    }
    if (c.levels < 1) throw std::invalid_argument("config.levels: must be at least 1");
    if (c.levels > 20) throw std::invalid_argument("config.levels: at most 20 levels are supported");
    if (!(c.theta > 0.0)) throw std::invalid_argument("config.theta: must be positive");
    if (c.quad_order < 0 || c.quad_order > 16) throw std::invalid_argument("config.quadrature_order: must lie in [0, 16]");
    if (!(c.solver.tol > 0.0)) throw std::invalid_argument("solver.tol: must be positive");
    if (c.solver.restart < 1) throw std::invalid_argument("solver.restart: must be at least 1");
    if (c.solver.max_iter < 1) throw std::invalid_argument("solver.max_iter: must be at least 1");
    if (c.threads < 1) throw std::invalid_argument("config: thread count must be at least 1");
    if (custom) build_geometry(*c.geometry);
}

CaseDefinition resolve_case(const CaseConfig& c)
{
    if (c.case_id != "custom") return builtin_case(c.case_id);
    GeometryMap g = build_geometry(*c.geometry);
    const int d = g.dim() - 1;
    return {"custom", "user geometry", std::move(g), sine_product_case(d, false), *c.form};
}

}  // namespace stiga
