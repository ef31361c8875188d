#pragma once

#include "stiga/assembly.hpp"

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace stiga {

/// A spline function u_h = sum_i c_i phi_i on the mapped cylinder.
struct DiscreteField {
    DiscreteSpace space;
    GeometryMap geometry;
    Eigen::VectorXd coefficients;

    DiscreteField(DiscreteSpace s, GeometryMap g, Eigen::VectorXd c);
};

struct FieldValue {
    double value = 0.0;
    Point grad_x;
    double dt = 0.0;
};

/// Value and physical derivatives at the image of the parameter point xi.
FieldValue eval_field(const DiscreteField& field, std::span<const double> xi);

/// ||u - u_h||_{L2(Q)}; `order` Gauss points per direction (0 selects p + 2).
double error_l2(const DiscreteField& field, const ManufacturedCase& mcase, int order = 0);

/// ||u - u_h||_h (fixed) or ||u - u_h||_{h,m} (moving).
double error_energy(const DiscreteField& field, const ManufacturedCase& mcase, const SchemeParams& params,
                    FormVariant variant, int order = 0);

/// Sentinel for rates that cannot be formed from non-positive errors.
inline constexpr double kUndefinedRate = std::numeric_limits<double>::quiet_NaN();

/// rate_k = log2(e_{k-1} / e_k), rate_0 = 0.
std::vector<double> rates(std::span<const double> errors);

/// max_K h_K * sqrt(lambda_max) of the element eigenproblem
/// (grad v, grad w)_K = lambda (v, w)_K over the local basis.
double estimate_inverse_constant(const DiscreteSpace& space, const GeometryMap& geom, const PhysicalMesh& mesh);

struct LevelRecord {
    int level = 0;
    std::size_t dofs = 0;
    double h = 0.0;
    double error_l2 = 0.0;
    double rate_l2 = 0.0;
    double error_energy = 0.0;
    double rate_energy = 0.0;
    SolveReport solve;
};

struct ConvergenceReport {
    std::string case_id;
    int degree = 0;
    FormVariant variant = FormVariant::fixed;
    std::vector<LevelRecord> levels;
    std::vector<std::string> warnings;

    /// Recomputes both rate columns from the error columns.
    void update_rates();
};

}  // namespace stiga
