#include "stiga/harness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace stiga {

namespace {

using Rng = std::mt19937_64;

std::string sci(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

KnotVector random_knots(Rng& rng, int p)
{
    std::uniform_int_distribution<int> count(1, 6);
    std::uniform_real_distribution<double> pos(0.05, 0.95);
    std::vector<double> interior;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) interior.push_back(std::round(pos(rng) * 40.0) / 40.0);
    std::sort(interior.begin(), interior.end());
    std::vector<double> knots(std::size_t(p + 1), 0.0);
    for (std::size_t i = 0; i < interior.size(); ++i) {
        const auto mult = std::count(knots.begin(), knots.end(), interior[i]);
        if (mult < p) knots.push_back(interior[i]);
    }
    knots.insert(knots.end(), std::size_t(p + 1), 1.0);
    return KnotVector(std::move(knots), p);
}

/// Point at least `gap` away from every knot.
double point_off_knots(Rng& rng, const KnotVector& kv, double gap)
{
    std::uniform_real_distribution<double> u(gap, 1.0 - gap);
    for (;;) {
        const double x = u(rng);
        bool ok = true;
        for (double k : kv.breakpoints()) ok = ok && std::abs(x - k) > gap;
        if (ok) return x;
    }
}

CheckResult partition_of_unity(Rng& rng)
{
    double worst = 0.0, worst_deriv = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        const int p = 1 + trial % 4;
        const KnotVector kv = random_knots(rng, p);
        double hmin = 1.0;
        const auto bp = kv.breakpoints();
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) hmin = std::min(hmin, bp[i + 1] - bp[i]);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int k = 0; k < 250; ++k) {
            const double x = k == 0 ? 1.0 : (k == 1 ? 0.0 : u(rng));
            const BasisEvalRow row = eval_basis(kv, x, 1);
            double s = 0.0, ds = 0.0;
            for (int j = 0; j <= p; ++j) {
                s += row.ders[0][std::size_t(j)];
                ds += row.ders[1][std::size_t(j)];
            }
            worst = std::max(worst, std::abs(s - 1.0));
            worst_deriv = std::max(worst_deriv, std::abs(ds) * hmin);
        }
    }
    return {"partition_of_unity", worst <= 1e-12 && worst_deriv <= 1e-9,
            "max |sum - 1| = " + sci(worst) + ", max |sum'| h = " + sci(worst_deriv)};
}

CheckResult basis_derivatives(Rng& rng)
{
    const double eps = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        const int p = 2 + trial % 3;
        const KnotVector kv = random_knots(rng, p);
        for (int k = 0; k < 20; ++k) {
            const double x = point_off_knots(rng, kv, 1e-3);
            const auto r0 = eval_basis(kv, x, 2);
            const auto rp = eval_basis(kv, x + eps, 2);
            const auto rm = eval_basis(kv, x - eps, 2);
            for (int j = 0; j <= p; ++j) {
                const auto J = std::size_t(j);
                const double d1 = (rp.ders[0][J] - rm.ders[0][J]) / (2 * eps);
                const double d2 = (rp.ders[1][J] - rm.ders[1][J]) / (2 * eps);
                const double s1 = std::max(1.0, std::abs(r0.ders[1][J]));
                const double s2 = std::max(1.0, std::abs(r0.ders[2][J]));
                worst = std::max({worst, std::abs(d1 - r0.ders[1][J]) / s1, std::abs(d2 - r0.ders[2][J]) / s2});
            }
        }
    }
    return {"basis_derivatives", worst <= 1e-5, "max relative FD deviation = " + sci(worst)};
}

CheckResult geometry_derivatives(Rng& rng)
{
    const double eps = 1e-5;
    double worst = 0.0;
    for (const char* id : {"moving-curvi-1d", "moving-curvi-2d", "moving-simple-1d"}) {
        const GeometryMap g = builtin_case(id).geometry;
        const int dim = g.dim();
        std::uniform_real_distribution<double> u(0.01, 0.99);
        for (int k = 0; k < 20; ++k) {
            std::vector<double> xi(static_cast<std::size_t>(dim));
            for (auto& c : xi) c = u(rng);
            const GeometryJet jet = g.evaluate(xi, 2);
            for (int a = 0; a < dim; ++a) {
                auto xp = xi, xm = xi;
                xp[std::size_t(a)] += eps;
                xm[std::size_t(a)] -= eps;
                const Point fd = (g.map_point(xp) - g.map_point(xm)) / (2 * eps);
                const GeometryJet jp = g.evaluate(xp, 1), jm = g.evaluate(xm, 1);
                for (int c = 0; c < dim; ++c) {
                    const double s = std::max(1.0, std::abs(jet.jacobian(c, a)));
                    worst = std::max(worst, std::abs(fd[c] - jet.jacobian(c, a)) / s);
                    for (int b = 0; b < dim; ++b) {
                        const double h2 = (jp.jacobian(c, b) - jm.jacobian(c, b)) / (2 * eps);
                        const double ref = jet.hessian[std::size_t(c)](a, b);
                        worst = std::max(worst, std::abs(h2 - ref) / std::max(1.0, std::abs(ref)));
                    }
                }
            }
        }
    }
    return {"geometry_derivatives", worst <= 1e-5, "max relative FD deviation = " + sci(worst)};
}

CheckResult quadrature_exactness()
{
    double worst = 0.0;
    for (int n = 1; n <= 10; ++n) {
        const QuadratureRule r = gauss_1d(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (Eigen::Index q = 0; q < r.weights.size(); ++q) s += r.weights[q] * std::pow(r.nodes(0, q), k);
            worst = std::max(worst, std::abs(s - 1.0 / (k + 1)));
        }
    }
    return {"quadrature_exactness", worst <= 1e-13, "max monomial error = " + sci(worst)};
}

Eigen::VectorXd random_free_vector(Rng& rng, const DofMap& dofs, std::size_t n)
{
    std::normal_distribution<double> g;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(Eigen::Index(n));
    for (std::size_t i : dofs.free_dofs()) v[Eigen::Index(i)] = g(rng);
    return v;
}

}  // namespace

double coercivity_identity_defect(const CaseDefinition& def, int degree, int level, int samples, std::uint64_t seed,
                                  double norm_theta_factor)
{
    const LevelSetup s = setup_level(def, degree, level, 0.1);
    const AssembledSystem sys = assemble_fixed(s.space, def.geometry, s.mesh, def.solution, s.params);
    SchemeParams np = s.params;
    np.theta *= norm_theta_factor;
    const NormMatrices norms = assemble_norm_matrices(s.space, def.geometry, s.mesh, np);
    const DofMap dofs(s.space);
    if (dofs.num_free() == 0) return 0.0;
    Rng rng(seed);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const Eigen::VectorXd v = random_free_vector(rng, dofs, s.space.size());
        const double a = quadratic_form(sys.matrix, v, v);
        const double n = quadratic_form(norms.energy, v, v);
        const double g = quadratic_form(norms.terminal_gradient, v, v);
        worst = std::max(worst, std::abs(a - n - 0.5 * np.theta * np.h * g) / n);
    }
    return worst;
}

std::vector<CheckResult> run_verify(const VerifyOptions& options)
{
    Rng rng(options.seed);
    std::vector<CheckResult> out;
    out.push_back(partition_of_unity(rng));
    out.push_back(basis_derivatives(rng));
    out.push_back(geometry_derivatives(rng));
    out.push_back(quadrature_exactness());

    {
        const double factor = options.inject_theta_fault ? 1.01 : 1.0;
        double worst = 0.0;
        for (int p = 1; p <= 3; ++p) {
            for (int level = 0; level <= 3; ++level) {
                worst = std::max(worst, coercivity_identity_defect(builtin_case("fixed-1d"), p, level, 20,
                                                                   options.seed + std::uint64_t(level), factor));
            }
        }
        for (int level = 0; level <= 2; ++level) {
            worst = std::max(worst, coercivity_identity_defect(builtin_case("fixed-2d"), 1, level, 20,
                                                               options.seed + std::uint64_t(level), factor));
        }
        out.push_back({"coercivity_identity", worst <= 1e-10, "max relative defect = " + sci(worst)});
    }

    {
        bool ok = true;
        std::ostringstream detail;
        for (const char* id : {"moving-simple-1d", "moving-curvi-1d", "moving-curvi-2d"}) {
            const CaseDefinition def = builtin_case(id);
            const int level = def.geometry.dim() == 3 ? 1 : 2;
            const LevelSetup s = setup_level(def, 2, level, 0.1);
            const AssembledSystem sys = assemble_moving(s.space, def.geometry, s.mesh, def.solution, s.params);
            const NormMatrices norms = assemble_norm_matrices(s.space, def.geometry, s.mesh, s.params);
            const DofMap dofs(s.space);
            double ratio = 1e300;
            for (int k = 0; k < 20; ++k) {
                const Eigen::VectorXd v = random_free_vector(rng, dofs, s.space.size());
                ratio = std::min(ratio, quadratic_form(sys.matrix, v, v) / quadratic_form(norms.energy_moving, v, v));
            }
            const auto limit = theta_threshold(s.params);
            const bool within = limit && s.params.theta < *limit;
            const bool pass = within ? ratio >= 0.5 : !sys.warnings.empty();
            ok = ok && pass;
            if (detail.tellp() > 0) detail << "; ";
            detail << id << ": min ratio " << sci(ratio) << (within ? "" : " (threshold warning raised)");
        }
        out.push_back({"moving_coercivity", ok, detail.str()});
    }

    {
        const CaseDefinition def = builtin_case("fixed-1d");
        double worst = 0.0;
        for (int p = 1; p <= 3; ++p) {
            const LevelSetup s = setup_level(def, p, 2, 0.1);
            const SparseMatrix a = assemble_fixed(s.space, def.geometry, s.mesh, def.solution, s.params).matrix;
            const SparseMatrix b = assemble_moving(s.space, def.geometry, s.mesh, def.solution, s.params).matrix;
            const DofMap dofs(s.space);
            for (std::size_t i : dofs.free_dofs()) {
                for (std::size_t j : dofs.free_dofs()) worst = std::max(worst, std::abs(a.coeff(i, j) - b.coeff(i, j)));
            }
        }
        out.push_back({"fixed_moving_equivalence", worst <= 1e-12, "max entry difference = " + sci(worst)});
    }

    {
        double worst = 0.0;
        for (const char* id : {"fixed-1d", "moving-simple-1d", "moving-curvi-2d"}) {
            const CaseDefinition def = builtin_case(id);
            const LevelSetup s = setup_level(def, 2, def.geometry.dim() == 3 ? 1 : 3, 0.1);
            const AssembledSystem sys = assemble(s.space, def.geometry, s.mesh, def.solution, s.params, def.variant);
            const DofMap dofs(s.space);
            const LinearSystem red = apply_dirichlet(sys, dofs, def.solution, s.space, def.geometry);
            const Eigen::VectorXd xd = solve_direct(red.matrix, red.rhs).x;
            GmresOptions opts;
            opts.tol = 1e-13;
            const Eigen::VectorXd xg = solve_gmres(red.matrix, red.rhs, opts).x;
            worst = std::max(worst, (xd - xg).norm() / xd.norm());
        }
        out.push_back({"direct_gmres_agreement", worst <= 1e-8, "max relative difference = " + sci(worst)});
    }
    return out;
}

}  // namespace stiga
