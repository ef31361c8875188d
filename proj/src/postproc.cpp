#include "stiga/postproc.hpp"

#include "element_values.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace stiga {

DiscreteField::DiscreteField(DiscreteSpace s, GeometryMap g, Eigen::VectorXd c)
    : space(std::move(s)), geometry(std::move(g)), coefficients(std::move(c))
{
    if (std::size_t(coefficients.size()) != space.size()) {
        throw std::invalid_argument("discrete field: coefficient count does not match the space");
    }
    if (geometry.dim() != space.dim()) throw std::invalid_argument("discrete field: dimension mismatch");
}

FieldValue eval_field(const DiscreteField& field, std::span<const double> xi)
{
    const BasisPoint bp = field.space.evaluate(xi, 1);
    const GeometryJet jet = field.geometry.evaluate(xi, 1);
    if (!(jet.det > 0.0)) throw SingularGeometryError("eval_field: singular geometry");
    const Eigen::MatrixXd grads = jet.jacobian.inverse().transpose() * bp.gradients;
    Eigen::VectorXd local{Eigen::Index(bp.size())};
    for (std::size_t a = 0; a < bp.size(); ++a) local[Eigen::Index(a)] = field.coefficients[Eigen::Index(bp.indices[a])];
    const int d = field.space.spatial_dim();
    FieldValue out;
    out.value = bp.values.dot(local);
    const Eigen::VectorXd g = grads * local;
    out.grad_x = g.head(d);
    out.dt = g[d];
    return out;
}

namespace {

std::vector<int> error_orders(const DiscreteSpace& space, int order)
{
    if (order > 0) return std::vector<int>(std::size_t(space.dim()), order);
    return default_orders(space, 1);
}

Eigen::VectorXd local_coefficients(const DiscreteField& field, std::span<const std::size_t> dofs)
{
    Eigen::VectorXd c{Eigen::Index(dofs.size())};
    for (std::size_t a = 0; a < dofs.size(); ++a) c[Eigen::Index(a)] = field.coefficients[Eigen::Index(dofs[a])];
    return c;
}

double sum_in_order(const std::vector<double>& parts)
{
    double s = 0.0;
    for (double p : parts) s += p;
    return s;
}

}  // namespace

double error_l2(const DiscreteField& field, const ManufacturedCase& mcase, int order)
{
    const auto orders = error_orders(field.space, order);
    const auto elements = mesh_elements(field.space);
    std::vector<double> parts(elements.size(), 0.0);
    detail::ElementValues v;
    for (std::size_t e = 0; e < elements.size(); ++e) {
        const auto rule = element_rule(elements[e].intervals(), orders);
        detail::tabulate(field.space, field.geometry, rule, -1, 0, e, v);
        const Eigen::VectorXd uh = v.val * local_coefficients(field, v.dofs);
        double s = 0.0;
        for (Eigen::Index q = 0; q < uh.size(); ++q) {
            const double err = mcase.u(v.points.col(q)) - uh[q];
            s += v.weights[q] * err * err;
        }
        parts[e] = s;
    }
    return std::sqrt(sum_in_order(parts));
}

double error_energy(const DiscreteField& field, const ManufacturedCase& mcase, const SchemeParams& params,
                    FormVariant variant, int order)
{
    const auto orders = error_orders(field.space, order);
    const auto elements = mesh_elements(field.space);
    const int d = field.space.spatial_dim();
    const double th = params.theta * params.h;
    std::vector<double> parts(elements.size(), 0.0);
    detail::ElementValues v;
    for (std::size_t e = 0; e < elements.size(); ++e) {
        const Element& el = elements[e];
        const auto rule = element_rule(el.intervals(), orders);
        detail::tabulate(field.space, field.geometry, rule, -1, 1, e, v);
        Eigen::VectorXd c = local_coefficients(field, v.dofs);
        const Eigen::VectorXd dt = v.dt * c;
        double s = 0.0;
        for (Eigen::Index q = 0; q < dt.size(); ++q) {
            const Point x = v.points.col(q);
            const Point gx = mcase.grad_x(x);
            double grad2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = gx[k] - v.dx[std::size_t(k)].row(q).dot(c);
                grad2 += diff * diff;
            }
            const double et = mcase.u_t(x) - dt[q];
            s += v.weights[q] * (grad2 + th * et * et);
        }
        if (el.spans[std::size_t(d)].second == 1.0) {
            const auto frule = face_rule(d, 1.0, el.intervals(), orders);
            detail::tabulate(field.space, field.geometry, frule, d, 1, e, v);
            c = local_coefficients(field, v.dofs);
            const Eigen::VectorXd uh = v.val * c;
            for (Eigen::Index q = 0; q < uh.size(); ++q) {
                const Point x = v.points.col(q);
                const double ev = mcase.u(x) - uh[q];
                double term = 0.5 * ev * ev;
                if (variant == FormVariant::moving) {
                    const Point gx = mcase.grad_x(x);
                    double grad2 = 0.0;
                    for (int k = 0; k < d; ++k) {
                        const double diff = gx[k] - v.dx[std::size_t(k)].row(q).dot(c);
                        grad2 += diff * diff;
                    }
                    term += th * grad2;
                }
                s += v.weights[q] * term;
            }
        }
        parts[e] = s;
    }
    return std::sqrt(sum_in_order(parts));
}

std::vector<double> rates(std::span<const double> errors)
{
    std::vector<double> out(errors.size(), 0.0);
    for (std::size_t k = 1; k < errors.size(); ++k) {
        out[k] = (errors[k - 1] > 0.0 && errors[k] > 0.0) ? std::log2(errors[k - 1] / errors[k]) : kUndefinedRate;
    }
    return out;
}

void ConvergenceReport::update_rates()
{
    std::vector<double> l2, en;
    for (const auto& lv : levels) {
        l2.push_back(lv.error_l2);
        en.push_back(lv.error_energy);
    }
    const auto r2 = rates(l2);
    const auto re = rates(en);
    for (std::size_t k = 0; k < levels.size(); ++k) {
        levels[k].rate_l2 = r2[k];
        levels[k].rate_energy = re[k];
    }
}

double estimate_inverse_constant(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh)
{
    if (mesh.elements.size() != mesh.h_K.size()) throw std::invalid_argument("inverse constant: malformed mesh");
    const auto orders = default_orders(space);
    const int dim = space.dim();
    detail::ElementValues v;
    double best = 0.0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        const auto rule = element_rule(mesh.elements[e].intervals(), orders);
        detail::tabulate(space, geom, rule, -1, 1, e, v);
        const Eigen::MatrixXd wv = v.weights.asDiagonal() * v.val;
        const Eigen::MatrixXd M = v.val.transpose() * wv;
        Eigen::MatrixXd A = v.dt.transpose() * (v.weights.asDiagonal() * v.dt);
        for (int k = 0; k < dim - 1; ++k) {
            A.noalias() += v.dx[std::size_t(k)].transpose() * (v.weights.asDiagonal() * v.dx[std::size_t(k)]);
        }
        const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, M, Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success) {
            throw std::logic_error("inverse constant: element mass matrix is singular in element " + std::to_string(e));
        }
        best = std::max(best, mesh.h_K[e] * std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff())));
    }
    return best;
}

}  // namespace stiga
