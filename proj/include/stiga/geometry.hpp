#pragma once

#include "stiga/quadrature.hpp"
#include "stiga/tensor_space.hpp"
#include "stiga/types.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace stiga {

/// Thrown when the geometry Jacobian is not positive.
class SingularGeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Value, Jacobian and second derivatives of the geometry map at a point.
struct GeometryJet {
    Point x;
    SmallMatrix jacobian;                      // column a holds dPhi/dxi_a
    double det = 0.0;
    std::array<SmallMatrix, kMaxDim> hessian;  // hessian[k](a,b) = d2 Phi_k / dxi_a dxi_b
};

/// Spline map Phi from the parameter cube onto the space-time cylinder.
/// The last physical coordinate is time.
class GeometryMap {
public:
    /// `control_points` holds one column per basis function of `basis`.
    GeometryMap(DiscreteSpace basis, Eigen::MatrixXd control_points);

    /// Identity map of the unit cube [0,1]^dim.
    static GeometryMap unit_cube(int dim);

    int dim() const { return basis_.dim(); }
    const DiscreteSpace& basis() const { return basis_; }
    const Eigen::MatrixXd& control_points() const { return control_points_; }

    Point map_point(std::span<const double> xi) const;

    /// Jet up to `max_deriv` (0, 1 or 2). Does not check the determinant.
    GeometryJet evaluate(std::span<const double> xi, int max_deriv) const;

    /// Jacobian with determinant; throws SingularGeometryError if det <= 0.
    SmallMatrix jacobian(std::span<const double> xi, double* det = nullptr) const;

    std::array<SmallMatrix, kMaxDim> hessian(std::span<const double> xi) const;

private:
    DiscreteSpace basis_;
    Eigen::MatrixXd control_points_;
};

/// Physical derivatives of one basis function.
struct PhysicalDerivatives {
    double value = 0.0;
    Point gradient;       // (grad_x, d_t)
    SmallMatrix hessian;  // symmetric, last row/column is time
};

/// Chain rule from parameter to physical derivatives:
/// J^T g = g_hat and J^T H J = H_hat - sum_k g_k d2Phi_k.
PhysicalDerivatives pullback_derivatives(const GeometryJet& jet, double value, const Point& param_gradient,
                                         const SmallMatrix& param_hessian);

/// One parameter cell of the solution space.
struct Element {
    MultiIndex index{};
    std::array<Interval, kMaxDim> spans{};
    int dim = 0;

    std::span<const Interval> intervals() const { return {spans.data(), std::size_t(dim)}; }
    Point center() const;
};

/// Cells of `space` in lexicographic order (direction 0 fastest).
std::vector<Element> mesh_elements(const DiscreteSpace& space);

struct PhysicalMesh {
    std::vector<Element> elements;
    std::vector<double> hat_h;  // parameter diameter of each cell
    std::vector<double> h_K;    // max ||grad Phi|| over the cell nodes times hat_h
    double h = 0.0;
    double quasi_uniformity = 1.0;  // C_u = h / min h_K
};

/// Cells of `solution_space` with mesh sizes; ||grad Phi||_inf is sampled at the
/// `order`-point Gauss nodes of each cell (0 selects p + 1).
PhysicalMesh mesh_metrics(const GeometryMap& geom, const DiscreteSpace& solution_space, int order = 0);

/// Default assembly quadrature order per direction: p + 1.
std::vector<int> default_orders(const DiscreteSpace& space, int extra = 0);

/// Surface measure factor of the face with direction `fixed_dir` pinned:
/// sqrt(det(Jr^T Jr)) for the Jacobian restricted to the remaining columns.
double face_measure_factor(const SmallMatrix& jacobian, int fixed_dir);

}  // namespace stiga
