#include "stiga/assembly.hpp"

#include "element_values.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace stiga {

namespace detail {

void tabulate(const DiscreteSpace& space, const GeometryMap& geom, const QuadratureRule& rule, int face_dir,
              int max_deriv, std::size_t element_id, ElementValues& out)
{
    const int dim = space.dim();
    const int d = dim - 1;
    const Eigen::Index nq = rule.size();
    const auto n = Eigen::Index(space.active_count());
    out.val.resize(nq, n);
    out.dt.resize(nq, n);
    for (int k = 0; k < d; ++k) {
        out.dx[std::size_t(k)].resize(nq, n);
        if (max_deriv >= 2) out.dxt[std::size_t(k)].resize(nq, n);
    }
    out.weights.resize(nq);
    out.points.resize(dim, nq);

    for (Eigen::Index q = 0; q < nq; ++q) {
        const auto node = rule.nodes.col(q);
        const std::span<const double> xi(node.data(), std::size_t(dim));
        space.evaluate(xi, max_deriv, out.scratch);
        if (q == 0) {
            out.dofs = out.scratch.indices;
        }
        const GeometryJet jet = geom.evaluate(xi, max_deriv >= 2 ? 2 : 1);
        if (!(jet.det > 0.0)) {
            std::ostringstream os;
            os << "singular geometry: det J = " << jet.det << " in element " << element_id;
            throw SingularGeometryError(os.str());
        }
        const SmallMatrix inv = jet.jacobian.inverse();
        const Eigen::MatrixXd grads = inv.transpose() * out.scratch.gradients;

        out.points.col(q) = jet.x;
        out.weights[q] = rule.weights[q] * (face_dir < 0 ? jet.det : face_measure_factor(jet.jacobian, face_dir));
        out.val.row(q) = out.scratch.values.transpose();
        out.dt.row(q) = grads.row(d);
        for (int k = 0; k < d; ++k) out.dx[std::size_t(k)].row(q) = grads.row(k);

        if (max_deriv >= 2) {
            bool curved = false;
            for (int m = 0; m < dim; ++m) curved = curved || !jet.hessian[std::size_t(m)].isZero(0.0);
            for (Eigen::Index a = 0; a < n; ++a) {
                SmallMatrix reduced = out.scratch.hessian(std::size_t(a));
                if (curved) {
                    for (int m = 0; m < dim; ++m) reduced -= grads(m, a) * jet.hessian[std::size_t(m)];
                }
                const Point right = reduced * inv.col(d);
                for (int k = 0; k < d; ++k) out.dxt[std::size_t(k)](q, a) = inv.col(k).dot(right);
            }
        }
    }
}

}  // namespace detail

namespace {

using detail::ElementValues;

void scatter(SparseMatrix& A, std::span<const std::size_t> dofs, const Eigen::MatrixXd& local)
{
    const auto cols = A.columns();
    const auto offsets = A.offsets();
    auto values = A.values();
    for (std::size_t a = 0; a < dofs.size(); ++a) {
        const std::size_t r = dofs[a];
        std::size_t k = offsets[r];
        for (std::size_t b = 0; b < dofs.size(); ++b) {
            while (cols[k] < dofs[b]) ++k;
            values[k] += local(Eigen::Index(a), Eigen::Index(b));
        }
    }
}

std::vector<int> resolve_orders(const DiscreteSpace& space, std::span<const int> orders)
{
    if (orders.empty()) return default_orders(space);
    if (int(orders.size()) == 1) return std::vector<int>(std::size_t(space.dim()), orders[0]);
    if (int(orders.size()) != space.dim()) throw std::invalid_argument("quadrature orders: wrong count");
    return {orders.begin(), orders.end()};
}

Eigen::MatrixXd weighted(const Eigen::VectorXd& w, const Eigen::MatrixXd& m) { return w.asDiagonal() * m; }

struct Workspace {
    ElementValues vol;
    ElementValues face;
    std::vector<Eigen::MatrixXd> mats;
    Eigen::VectorXd load;
};

/// Element loop shared by all bilinear forms. The kernel fills `mats`
/// (and `load` when requested) from the volume values and, for elements on
/// the terminal face, the face values.
template <class Kernel>
void run_assembly(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh,
                  const SchemeParams& params, int max_deriv, bool with_face, std::vector<SparseMatrix>& mats,
                  Eigen::VectorXd* load, Kernel&& kernel)
{
    if (geom.dim() != space.dim()) throw std::invalid_argument("assembly: geometry/space dimension mismatch");
    const auto orders = resolve_orders(space, params.quad_orders);
    const int d = space.dim() - 1;
    const int threads = std::max(1, params.threads);
    std::vector<Workspace> work(static_cast<std::size_t>(threads));
    for (auto& w : work) w.mats.resize(mats.size());
    if (load) load->setZero(Eigen::Index(space.size()));

    detail::for_each_element(mesh.elements, space.degree(0) + 1, threads, [&](std::size_t e, int worker) {
        Workspace& ws = work[std::size_t(worker)];
        const Element& el = mesh.elements[e];
        const auto rule = element_rule(el.intervals(), orders);
        detail::tabulate(space, geom, rule, -1, max_deriv, e, ws.vol);
        const bool on_top = with_face && el.spans[std::size_t(d)].second == 1.0;
        if (on_top) {
            const auto frule = face_rule(d, 1.0, el.intervals(), orders);
            detail::tabulate(space, geom, frule, d, 1, e, ws.face);
        }
        kernel(ws.vol, on_top ? &ws.face : nullptr, ws.mats, load ? &ws.load : nullptr);
        for (std::size_t m = 0; m < mats.size(); ++m) scatter(mats[m], ws.vol.dofs, ws.mats[m]);
        if (load) {
            for (std::size_t a = 0; a < ws.vol.dofs.size(); ++a) (*load)[Eigen::Index(ws.vol.dofs[a])] += ws.load[Eigen::Index(a)];
        }
    });
}

Eigen::VectorXd source_values(const ElementValues& v, const ManufacturedCase& mcase)
{
    Eigen::VectorXd f(v.points.cols());
    for (Eigen::Index q = 0; q < f.size(); ++q) f[q] = mcase.f(v.points.col(q));
    return f.cwiseProduct(v.weights);
}

void check_case(const DiscreteSpace& space, const ManufacturedCase& mcase)
{
    if (mcase.spatial_dim != space.spatial_dim()) {
        throw std::invalid_argument("assembly: case '" + mcase.name + "' has spatial dimension " +
                                    std::to_string(mcase.spatial_dim) + ", space has " +
                                    std::to_string(space.spatial_dim()));
    }
    if (!mcase.f) throw std::invalid_argument("assembly: case '" + mcase.name + "' has no source term");
}

}  // namespace

SparseMatrix tensor_pattern(const DiscreteSpace& space)
{
    const int dim = space.dim();
    const std::size_t n = space.size();
    std::vector<std::size_t> offsets{0}, cols;
    offsets.reserve(n + 1);
    std::size_t band = 1;
    for (int a = 0; a < dim; ++a) band *= std::size_t(2 * space.degree(a) + 1);
    cols.reserve(n * band);
    for (std::size_t r = 0; r < n; ++r) {
        const auto mi = space.multi_index(r);
        MultiIndex lo{}, hi{}, cur{};
        for (int a = 0; a < dim; ++a) {
            const auto sa = std::size_t(a);
            lo[sa] = std::max(0, mi[sa] - space.degree(a));
            hi[sa] = std::min(space.num_basis(a) - 1, mi[sa] + space.degree(a));
            cur[sa] = lo[sa];
        }
        // Iterate with direction 0 fastest so flat indices come out sorted.
        while (true) {
            cols.push_back(space.flat_index(cur));
            int a = 0;
            for (; a < dim; ++a) {
                const auto sa = std::size_t(a);
                if (++cur[sa] <= hi[sa]) break;
                cur[sa] = lo[sa];
            }
            if (a == dim) break;
        }
        offsets.push_back(cols.size());
    }
    std::vector<double> vals(cols.size(), 0.0);
    return SparseMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

AssembledSystem assemble_fixed(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh,
                               const ManufacturedCase& mcase, const SchemeParams& params)
{
    check_case(space, mcase);
    const double th = params.theta * params.h;
    const int d = space.spatial_dim();
    std::vector<SparseMatrix> mats{tensor_pattern(space)};
    AssembledSystem out;
    run_assembly(space, geom, mesh, params, 2, false, mats, &out.load,
                 [&](const ElementValues& v, const ElementValues*, std::vector<Eigen::MatrixXd>& local,
                     Eigen::VectorXd* load) {
                     const Eigen::MatrixXd wdt = weighted(v.weights, v.dt);
                     Eigen::MatrixXd K = v.val.transpose() * wdt + th * v.dt.transpose() * wdt;
                     for (int k = 0; k < d; ++k) {
                         const Eigen::MatrixXd wdx = weighted(v.weights, v.dx[std::size_t(k)]);
                         K.noalias() += v.dx[std::size_t(k)].transpose() * wdx;
                         K.noalias() += th * v.dxt[std::size_t(k)].transpose() * wdx;
                     }
                     local[0] = std::move(K);
                     *load = (v.val + th * v.dt).transpose() * source_values(v, mcase);
                 });
    out.matrix = std::move(mats[0]);
    return out;
}

std::optional<double> theta_threshold(const SchemeParams& params)
{
    if (!params.inverse_constant) return std::nullopt;
    return 1.0 / (2.0 * *params.inverse_constant * params.quasi_uniformity);
}

AssembledSystem assemble_moving(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh,
                                const ManufacturedCase& mcase, const SchemeParams& params)
{
    check_case(space, mcase);
    const double th = params.theta * params.h;
    const int d = space.spatial_dim();
    std::vector<SparseMatrix> mats{tensor_pattern(space)};
    AssembledSystem out;
    if (const auto limit = theta_threshold(params); limit && !(params.theta < *limit)) {
        std::ostringstream os;
        os << "theta = " << params.theta << " violates the moving-domain coercivity bound theta < " << *limit
           << " (C_inv = " << *params.inverse_constant << ", C_u = " << params.quasi_uniformity << ")";
        out.warnings.push_back(os.str());
    }
    run_assembly(space, geom, mesh, params, 2, true, mats, &out.load,
                 [&](const ElementValues& v, const ElementValues* face, std::vector<Eigen::MatrixXd>& local,
                     Eigen::VectorXd* load) {
                     const Eigen::MatrixXd wdt = weighted(v.weights, v.dt);
                     Eigen::MatrixXd K = v.val.transpose() * wdt + th * v.dt.transpose() * wdt;
                     for (int k = 0; k < d; ++k) {
                         const auto sk = std::size_t(k);
                         const Eigen::MatrixXd wdx = weighted(v.weights, v.dx[sk]);
                         K.noalias() += v.dx[sk].transpose() * wdx;
                         K.noalias() -= th * wdx.transpose() * v.dxt[sk];
                         if (face) {
                             K.noalias() += th * face->dx[sk].transpose() * weighted(face->weights, face->dx[sk]);
                         }
                     }
                     local[0] = std::move(K);
                     *load = (v.val + th * v.dt).transpose() * source_values(v, mcase);
                 });
    out.matrix = std::move(mats[0]);
    return out;
}

AssembledSystem assemble(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh,
                         const ManufacturedCase& mcase, const SchemeParams& params, FormVariant variant)
{
    return variant == FormVariant::fixed ? assemble_fixed(space, geom, mesh, mcase, params)
                                         : assemble_moving(space, geom, mesh, mcase, params);
}

NormMatrices assemble_norm_matrices(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh,
                                    const SchemeParams& params)
{
    const double th = params.theta * params.h;
    const int d = space.spatial_dim();
    std::vector<SparseMatrix> mats{tensor_pattern(space)};
    mats.push_back(mats[0]);
    run_assembly(space, geom, mesh, params, 1, true, mats, nullptr,
                 [&](const ElementValues& v, const ElementValues* face, std::vector<Eigen::MatrixXd>& local,
                     Eigen::VectorXd*) {
                     Eigen::MatrixXd N = th * v.dt.transpose() * weighted(v.weights, v.dt);
                     for (int k = 0; k < d; ++k) {
                         N.noalias() += v.dx[std::size_t(k)].transpose() * weighted(v.weights, v.dx[std::size_t(k)]);
                     }
                     Eigen::MatrixXd G = Eigen::MatrixXd::Zero(N.rows(), N.cols());
                     if (face) {
                         N.noalias() += 0.5 * face->val.transpose() * weighted(face->weights, face->val);
                         for (int k = 0; k < d; ++k) {
                             G.noalias() +=
                                 face->dx[std::size_t(k)].transpose() * weighted(face->weights, face->dx[std::size_t(k)]);
                         }
                     }
                     local[0] = std::move(N);
                     local[1] = std::move(G);
                 });
    NormMatrices out;
    out.energy_moving = mats[0].plus(mats[1], th);
    out.energy = std::move(mats[0]);
    out.terminal_gradient = std::move(mats[1]);
    return out;
}

Eigen::VectorXd boundary_l2_project(const DiscreteSpace& space, const GeometryMap& geom,
                                    const std::function<double(const Point&)>& g, const DofMap& dofs,
                                    std::span<const int> orders_in)
{
    const auto orders = resolve_orders(space, orders_in);
    const int dim = space.dim();
    const int d = dim - 1;
    SparseMatrix mass = tensor_pattern(space);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(Eigen::Index(space.size()));
    ElementValues fv;
    const auto elements = mesh_elements(space);
    for (std::size_t e = 0; e < elements.size(); ++e) {
        const Element& el = elements[e];
        // Lateral faces in every spatial direction, initial face in time.
        for (int a = 0; a <= d; ++a) {
            const auto [lo, hi] = el.spans[std::size_t(a)];
            for (const double side : {0.0, 1.0}) {
                if (a == d && side == 1.0) continue;
                if ((side == 0.0 && lo != 0.0) || (side == 1.0 && hi != 1.0)) continue;
                const auto rule = face_rule(a, side, el.intervals(), orders);
                detail::tabulate(space, geom, rule, a, 1, e, fv);
                Eigen::VectorXd gw(rule.size());
                for (Eigen::Index q = 0; q < gw.size(); ++q) gw[q] = g(fv.points.col(q)) * fv.weights[q];
                scatter(mass, fv.dofs, fv.val.transpose() * weighted(fv.weights, fv.val));
                const Eigen::VectorXd local = fv.val.transpose() * gw;
                for (std::size_t k = 0; k < fv.dofs.size(); ++k) rhs[Eigen::Index(fv.dofs[k])] += local[Eigen::Index(k)];
            }
        }
    }
    const auto dir = dofs.dirichlet_dofs();
    std::vector<long> col_map(space.size(), -1);
    for (std::size_t i = 0; i < dir.size(); ++i) col_map[dir[i]] = long(i);
    const SparseMatrix M = mass.extract(dir, col_map, dir.size());
    Eigen::VectorXd b{Eigen::Index(dir.size())};
    for (std::size_t i = 0; i < dir.size(); ++i) b[Eigen::Index(i)] = rhs[Eigen::Index(dir[i])];
    if (b.size() == 0) return b;
    try {
        return solve_direct(M, b).x;
    } catch (const SingularMatrixError& err) {
        throw std::logic_error(std::string("boundary projection: singular boundary mass matrix: ") + err.what());
    }
}

LinearSystem apply_dirichlet(const AssembledSystem& system, const DofMap& dofs, const Eigen::VectorXd& dirichlet_values)
{
    if (std::size_t(dirichlet_values.size()) != dofs.num_dirichlet()) {
        throw std::invalid_argument("apply_dirichlet: wrong number of Dirichlet values");
    }
    if (system.matrix.size() != dofs.size()) throw std::invalid_argument("apply_dirichlet: dof map mismatch");
    const auto free = dofs.free_dofs();
    std::vector<long> col_map(dofs.size(), -1);
    for (std::size_t i = 0; i < free.size(); ++i) col_map[free[i]] = long(i);

    LinearSystem out;
    out.matrix = system.matrix.extract(free, col_map, free.size());
    out.dirichlet_values = dirichlet_values;
    out.lifting = Eigen::VectorXd::Zero(Eigen::Index(free.size()));
    out.rhs.resize(Eigen::Index(free.size()));
    const auto offsets = system.matrix.offsets();
    const auto cols = system.matrix.columns();
    const auto vals = system.matrix.values();
    for (std::size_t i = 0; i < free.size(); ++i) {
        const std::size_t r = free[i];
        double lift = 0.0;
        for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
            const long p = dofs.dirichlet_position(cols[k]);
            if (p >= 0) lift += vals[k] * dirichlet_values[p];
        }
        out.lifting[Eigen::Index(i)] = lift;
        out.rhs[Eigen::Index(i)] = system.load[Eigen::Index(r)] - lift;
    }
    return out;
}

LinearSystem apply_dirichlet(const AssembledSystem& system, const DofMap& dofs, const ManufacturedCase& mcase,
                             const DiscreteSpace& space, const GeometryMap& geom, std::span<const int> orders)
{
    const Eigen::VectorXd g = mcase.homogeneous_boundary
                                  ? Eigen::VectorXd::Zero(Eigen::Index(dofs.num_dirichlet()))
                                  : boundary_l2_project(space, geom, mcase.u, dofs, orders);
    return apply_dirichlet(system, dofs, g);
}

Eigen::VectorXd expand_coefficients(const DofMap& dofs, const Eigen::VectorXd& free_values,
                                    const Eigen::VectorXd& dirichlet_values)
{
    if (std::size_t(free_values.size()) != dofs.num_free() ||
        std::size_t(dirichlet_values.size()) != dofs.num_dirichlet()) {
        throw std::invalid_argument("expand_coefficients: size mismatch");
    }
    Eigen::VectorXd full{Eigen::Index(dofs.size())};
    const auto free = dofs.free_dofs();
    const auto dir = dofs.dirichlet_dofs();
    for (std::size_t i = 0; i < free.size(); ++i) full[Eigen::Index(free[i])] = free_values[Eigen::Index(i)];
    for (std::size_t i = 0; i < dir.size(); ++i) full[Eigen::Index(dir[i])] = dirichlet_values[Eigen::Index(i)];
    return full;
}

}  // namespace stiga
