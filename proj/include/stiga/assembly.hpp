#pragma once

#include "stiga/geometry.hpp"
#include "stiga/linsolve.hpp"
#include "stiga/tensor_space.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stiga {

enum class FormVariant { fixed, moving };

/// Stabilization parameter and mesh size entering the time-upwind test
/// function v + theta h d_t v.
struct SchemeParams {
    double theta = 0.1;
    double h = 0.0;
    /// Gauss points per direction; empty selects p + 1.
    std::vector<int> quad_orders;
    /// Estimates used for the moving-domain threshold theta < 1 / (2 C_inv C_u).
    std::optional<double> inverse_constant;
    double quasi_uniformity = 1.0;
    int threads = 1;
};

/// Closed-form solution of d_t u - Laplace_x u = f used for error measurement.
/// Points are physical (x_1, ..., x_d, t).
struct ManufacturedCase {
    std::string name;
    int spatial_dim = 1;
    std::function<double(const Point&)> u;
    std::function<Point(const Point&)> grad_x;
    std::function<double(const Point&)> u_t;
    std::function<double(const Point&)> f;
    /// u vanishes on the lateral boundary and the initial face.
    bool homogeneous_boundary = true;
};

/// Full-space matrix and load vector before Dirichlet reduction.
struct AssembledSystem {
    SparseMatrix matrix;
    Eigen::VectorXd load;
    std::vector<std::string> warnings;
};

/// Reduced system on free dofs: matrix * u_free = rhs, where rhs already
/// contains -lifting.
struct LinearSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    Eigen::VectorXd lifting;           // K_fd g_d, one entry per free dof
    Eigen::VectorXd dirichlet_values;  // one entry per Dirichlet dof
};

/// Full-space matrices of the discrete energy norms.
struct NormMatrices {
    SparseMatrix energy;             // ||.||_h^2
    SparseMatrix energy_moving;      // ||.||_{h,m}^2
    SparseMatrix terminal_gradient;  // ||grad_x .||^2 on the terminal face
};

/// Sparsity pattern coupling every pair of functions with overlapping support.
SparseMatrix tensor_pattern(const DiscreteSpace& space);

/// a_h(u, v) with the mixed term grad_x u . grad_x d_t v; row = test function.
AssembledSystem assemble_fixed(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh,
                               const ManufacturedCase& mcase, const SchemeParams& params);

/// b_h(u, v) with the mixed term -d_t grad_x u . grad_x v plus the terminal
/// face term theta h int grad_x u . grad_x v.
AssembledSystem assemble_moving(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh,
                                const ManufacturedCase& mcase, const SchemeParams& params);

AssembledSystem assemble(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh,
                         const ManufacturedCase& mcase, const SchemeParams& params, FormVariant variant);

NormMatrices assemble_norm_matrices(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh,
                                    const SchemeParams& params);

/// Moving-domain stability threshold 1 / (2 C_inv C_u); empty when no estimate is set.
std::optional<double> theta_threshold(const SchemeParams& params);

/// L2 projection of g onto the Dirichlet functions over the lateral boundary
/// and the initial face jointly. One value per Dirichlet dof.
Eigen::VectorXd boundary_l2_project(const DiscreteSpace& space, const GeometryMap& geom,
                                    const std::function<double(const Point&)>& g, const DofMap& dofs,
                                    std::span<const int> orders = {});

/// Removes Dirichlet rows and columns, moving their contribution to the rhs.
LinearSystem apply_dirichlet(const AssembledSystem& system, const DofMap& dofs,
                             const Eigen::VectorXd& dirichlet_values);

/// Projects the boundary data of `mcase` (zero when homogeneous) and reduces.
LinearSystem apply_dirichlet(const AssembledSystem& system, const DofMap& dofs, const ManufacturedCase& mcase,
                             const DiscreteSpace& space, const GeometryMap& geom,
                             std::span<const int> orders = {});

/// Full coefficient vector from free and Dirichlet parts.
Eigen::VectorXd expand_coefficients(const DofMap& dofs, const Eigen::VectorXd& free_values,
                                    const Eigen::VectorXd& dirichlet_values);

}  // namespace stiga
