#include "stiga/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace stiga {

namespace {

constexpr std::size_t kInverseEstimateMaxElements = 5000;

void add_warning(std::vector<std::string>& out, const std::string& w)
{
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
}

SolveResult solve(const LinearSystem& sys, const SolverConfig& cfg)
{
    const bool direct = cfg.method == SolverMethod::direct ||
                        (cfg.method == SolverMethod::automatic && sys.matrix.size() <= cfg.direct_limit);
    if (direct) return solve_direct(sys.matrix, sys.rhs);
    GmresOptions opts;
    opts.tol = cfg.tol;
    opts.restart = cfg.restart;
    opts.max_iter = cfg.max_iter;
    return solve_gmres(sys.matrix, sys.rhs, opts);
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5e", v);
    return buf;
}

}  // namespace

DiscreteSpace solution_space(const GeometryMap& geom, int degree, int level)
{
    if (level < 0) throw std::invalid_argument("solution space: negative level");
    std::vector<KnotVector> kvs;
    for (int a = 0; a < geom.dim(); ++a) {
        const auto bp = geom.basis().knots(a).breakpoints();
        std::vector<double> knots(std::size_t(degree + 1), 0.0);
        for (std::size_t i = 1; i + 1 < bp.size(); ++i) knots.push_back(bp[i]);
        knots.insert(knots.end(), std::size_t(degree + 1), 1.0);
        KnotVector kv(std::move(knots), degree);
        for (int k = 0; k < level; ++k) kv = refine_uniform(kv);
        kvs.push_back(std::move(kv));
    }
    return DiscreteSpace(std::move(kvs));
}

LevelSetup setup_level(const CaseDefinition& def, int degree, int level, double theta, int quad_order)
{
    DiscreteSpace space = solution_space(def.geometry, degree, level);
    PhysicalMesh mesh = mesh_metrics(def.geometry, space, quad_order);
    SchemeParams params;
    params.theta = theta;
    params.h = mesh.h;
    params.quasi_uniformity = mesh.quasi_uniformity;
    if (quad_order > 0) params.quad_orders.assign(std::size_t(space.dim()), quad_order);
    if (def.variant == FormVariant::moving) params.inverse_constant = estimate_inverse_constant(space, def.geometry, mesh);
    return {std::move(space), std::move(mesh), std::move(params)};
}

ConvergenceReport run_case(const CaseConfig& config, std::ostream* log)
{
    validate(config);
    const CaseDefinition def = resolve_case(config);
    ConvergenceReport report;
    report.case_id = def.id;
    report.degree = config.degree;
    report.variant = def.variant;

    std::optional<double> inverse_constant;
    for (int level = 0; level < config.levels; ++level) {
        try {
            const DiscreteSpace space = solution_space(def.geometry, config.degree, level);
            const PhysicalMesh mesh = mesh_metrics(def.geometry, space, config.quad_order);

            SchemeParams params;
            params.theta = config.theta;
            params.h = mesh.h;
            params.quasi_uniformity = mesh.quasi_uniformity;
            params.threads = config.deterministic ? 1 : config.threads;
            if (config.quad_order > 0) params.quad_orders.assign(std::size_t(space.dim()), config.quad_order);
            if (def.variant == FormVariant::moving) {
                if (!inverse_constant || mesh.elements.size() <= kInverseEstimateMaxElements) {
                    inverse_constant = estimate_inverse_constant(space, def.geometry, mesh);
                }
                params.inverse_constant = inverse_constant;
            }

            const AssembledSystem sys = assemble(space, def.geometry, mesh, def.solution, params, def.variant);
            for (const auto& w : sys.warnings) add_warning(report.warnings, "level " + std::to_string(level) + ": " + w);

            const DofMap dofs(space);
            const LinearSystem reduced =
                apply_dirichlet(sys, dofs, def.solution, space, def.geometry, params.quad_orders);

            const auto t0 = std::chrono::steady_clock::now();
            SolveResult sol = solve(reduced, config.solver);
            sol.report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!sol.report.converged) {
                add_warning(report.warnings, "level " + std::to_string(level) + ": " + sol.report.method +
                                                 " stopped at relative residual " + format_double(sol.report.residual));
            }

            const DiscreteField field(space, def.geometry,
                                      expand_coefficients(dofs, sol.x, reduced.dirichlet_values));
            LevelRecord rec;
            rec.level = level;
            rec.dofs = space.size();
            rec.h = mesh.h;
            rec.error_l2 = error_l2(field, def.solution);
            rec.error_energy = error_energy(field, def.solution, params, def.variant);
            rec.solve = sol.report;
            report.levels.push_back(rec);
            report.update_rates();

            if (log) {
                const auto& r = report.levels.back();
                *log << def.id << " p=" << config.degree << " level " << level << ": dofs " << r.dofs << ", L2 "
                     << format_double(r.error_l2) << " (" << format_double(r.rate_l2) << "), energy "
                     << format_double(r.error_energy) << " (" << format_double(r.rate_energy) << "), "
                     << r.solve.method << " " << format_double(r.solve.seconds) << " s\n";
            }
        } catch (const std::exception& e) {
            throw std::runtime_error(def.id + " level " + std::to_string(level) + ": " + e.what());
        }
    }
    return report;
}

void write_csv(const ConvergenceReport& report, std::ostream& out, bool deterministic)
{
    out << kCsvHeader << '\n';
    for (const auto& r : report.levels) {
        out << r.level << ',' << r.dofs << ',' << format_double(r.h) << ',' << format_double(r.error_l2) << ','
            << format_double(r.rate_l2) << ',' << format_double(r.error_energy) << ','
            << format_double(r.rate_energy) << ',' << r.solve.method << ',' << r.solve.iterations << ','
            << format_double(r.solve.residual) << ',' << (deterministic ? "0" : format_double(r.solve.seconds))
            << '\n';
    }
}

void emit_csv(const ConvergenceReport& report, const std::filesystem::path& path, bool deterministic)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    write_csv(report, out, deterministic);
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

int thread_count_from_env()
{
    const char* v = std::getenv("STIGA_NUM_THREADS");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1) throw std::invalid_argument("STIGA_NUM_THREADS must be a positive integer");
    return int(std::min<long>(n, 256));
}

}  // namespace stiga
