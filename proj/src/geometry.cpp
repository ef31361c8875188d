#include "stiga/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace stiga {

GeometryMap::GeometryMap(DiscreteSpace basis, Eigen::MatrixXd control_points)
    : basis_(std::move(basis)), control_points_(std::move(control_points))
{
    if (control_points_.rows() != basis_.dim()) {
        throw std::invalid_argument("geometry: control points must have dimension " +
                                    std::to_string(basis_.dim()));
    }
    if (std::size_t(control_points_.cols()) != basis_.size()) {
        throw std::invalid_argument("geometry: expected " + std::to_string(basis_.size()) +
                                    " control points, got " + std::to_string(control_points_.cols()));
    }
}

GeometryMap GeometryMap::unit_cube(int dim)
{
    std::vector<KnotVector> kvs(std::size_t(dim), KnotVector({0.0, 0.0, 1.0, 1.0}, 1));
    DiscreteSpace space(std::move(kvs));
    Eigen::MatrixXd cps(dim, Eigen::Index(space.size()));
    for (std::size_t i = 0; i < space.size(); ++i) {
        const auto mi = space.multi_index(i);
        for (int a = 0; a < dim; ++a) cps(a, Eigen::Index(i)) = mi[std::size_t(a)];
    }
    return GeometryMap(std::move(space), std::move(cps));
}

GeometryJet GeometryMap::evaluate(std::span<const double> xi, int max_deriv) const
{
    const int d = dim();
    const BasisPoint bp = basis_.evaluate(xi, max_deriv);
    GeometryJet jet;
    jet.x = Point::Zero(d);
    jet.jacobian = SmallMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) jet.hessian[std::size_t(k)] = SmallMatrix::Zero(d, d);
    for (std::size_t a = 0; a < bp.size(); ++a) {
        const auto col = Eigen::Index(a);
        const auto cp = control_points_.col(Eigen::Index(bp.indices[a]));
        jet.x += bp.values[col] * cp;
        if (max_deriv >= 1) jet.jacobian += cp * bp.gradients.col(col).transpose();
        if (max_deriv >= 2) {
            const SmallMatrix H = bp.hessian(a);
            for (int k = 0; k < d; ++k) jet.hessian[std::size_t(k)] += cp[k] * H;
        }
    }
    if (max_deriv >= 1) jet.det = jet.jacobian.determinant();
    return jet;
}

Point GeometryMap::map_point(std::span<const double> xi) const { return evaluate(xi, 0).x; }

SmallMatrix GeometryMap::jacobian(std::span<const double> xi, double* det) const
{
    const GeometryJet jet = evaluate(xi, 1);
    if (!(jet.det > 0.0)) {
        std::ostringstream os;
        os << "singular geometry: det J = " << jet.det << " at xi = (";
        for (std::size_t a = 0; a < xi.size(); ++a) os << (a ? ", " : "") << xi[a];
        os << ")";
        throw SingularGeometryError(os.str());
    }
    if (det) *det = jet.det;
    return jet.jacobian;
}

std::array<SmallMatrix, kMaxDim> GeometryMap::hessian(std::span<const double> xi) const
{
    return evaluate(xi, 2).hessian;
}

PhysicalDerivatives pullback_derivatives(const GeometryJet& jet, double value, const Point& param_gradient,
                                         const SmallMatrix& param_hessian)
{
    const int d = int(jet.jacobian.rows());
    const Eigen::PartialPivLU<SmallMatrix> lu(jet.jacobian);
    if (!(std::abs(jet.det) > 0.0)) throw SingularGeometryError("pullback: singular Jacobian");
    const SmallMatrix inv = lu.inverse();
    PhysicalDerivatives out;
    out.value = value;
    out.gradient = inv.transpose() * param_gradient;
    SmallMatrix reduced = param_hessian;
    for (int k = 0; k < d; ++k) reduced -= out.gradient[k] * jet.hessian[std::size_t(k)];
    out.hessian = inv.transpose() * reduced * inv;
    out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();
    return out;
}

Point Element::center() const
{
    Point c(dim);
    for (int a = 0; a < dim; ++a) c[a] = 0.5 * (spans[std::size_t(a)].first + spans[std::size_t(a)].second);
    return c;
}

std::vector<Element> mesh_elements(const DiscreteSpace& space)
{
    const int d = space.dim();
    std::array<std::vector<double>, kMaxDim> bps;
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) {
        bps[std::size_t(a)] = space.knots(a).breakpoints();
        total *= bps[std::size_t(a)].size() - 1;
    }
    std::vector<Element> out;
    out.reserve(total);
    MultiIndex idx{};
    for (std::size_t e = 0; e < total; ++e) {
        Element el;
        el.dim = d;
        el.index = idx;
        for (int a = 0; a < d; ++a) {
            const auto& b = bps[std::size_t(a)];
            const auto i = std::size_t(idx[std::size_t(a)]);
            el.spans[std::size_t(a)] = {b[i], b[i + 1]};
        }
        out.push_back(el);
        for (int a = 0; a < d; ++a) {
            if (std::size_t(++idx[std::size_t(a)]) < bps[std::size_t(a)].size() - 1) break;
            idx[std::size_t(a)] = 0;
        }
    }
    return out;
}

std::vector<int> default_orders(const DiscreteSpace& space, int extra)
{
    std::vector<int> orders(static_cast<std::size_t>(space.dim()));
    for (int a = 0; a < space.dim(); ++a) orders[std::size_t(a)] = space.degree(a) + 1 + extra;
    return orders;
}

PhysicalMesh mesh_metrics(const GeometryMap& geom, const DiscreteSpace& solution_space, int order)
{
    if (geom.dim() != solution_space.dim()) throw std::invalid_argument("mesh_metrics: dimension mismatch");
    std::vector<int> orders = default_orders(solution_space);
    if (order > 0) std::fill(orders.begin(), orders.end(), order);

    PhysicalMesh mesh;
    mesh.elements = mesh_elements(solution_space);
    mesh.hat_h.reserve(mesh.elements.size());
    mesh.h_K.reserve(mesh.elements.size());
    double min_hk = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const Element& el = mesh.elements[e];
        double diam2 = 0.0;
        for (const auto& [lo, hi] : el.intervals()) diam2 += (hi - lo) * (hi - lo);
        const auto rule = element_rule(el.intervals(), orders);
        double max_norm = 0.0;
        for (Eigen::Index q = 0; q < rule.size(); ++q) {
            const auto node = rule.nodes.col(q);
            double det = 0.0;
            SmallMatrix J;
            try {
                J = geom.jacobian({node.data(), std::size_t(node.size())}, &det);
            } catch (const SingularGeometryError& err) {
                throw SingularGeometryError(std::string(err.what()) + " in element " + std::to_string(e));
            }
            const Eigen::SelfAdjointEigenSolver<SmallMatrix> eig(J.transpose() * J, Eigen::EigenvaluesOnly);
            max_norm = std::max(max_norm, std::sqrt(eig.eigenvalues().maxCoeff()));
        }
        const double hat = std::sqrt(diam2);
        mesh.hat_h.push_back(hat);
        mesh.h_K.push_back(max_norm * hat);
        mesh.h = std::max(mesh.h, max_norm * hat);
        min_hk = std::min(min_hk, max_norm * hat);
    }
    mesh.quasi_uniformity = mesh.h / min_hk;
    return mesh;
}

double face_measure_factor(const SmallMatrix& jacobian, int fixed_dir)
{
    const int d = int(jacobian.rows());
    SmallMatrix restricted(d, d - 1);
    for (int a = 0, c = 0; a < d; ++a) {
        if (a == fixed_dir) continue;
        restricted.col(c++) = jacobian.col(a);
    }
    const SmallMatrix gram = restricted.transpose() * restricted;
    return std::sqrt(gram.determinant());
}

}  // namespace stiga
