#pragma once

#include "stiga/splines.hpp"
#include "stiga/types.hpp"

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

namespace stiga {

/// Active basis functions of a tensor-product space at one parameter point.
///
/// Column a of `gradients` is the parameter gradient of function
/// `indices[a]`; column a of `hessians` is its (dim x dim) Hessian stored
/// column-major.
struct BasisPoint {
    int dim = 0;
    std::vector<std::size_t> indices;
    Eigen::VectorXd values;
    Eigen::MatrixXd gradients;
    Eigen::MatrixXd hessians;

    std::size_t size() const { return indices.size(); }
    SmallMatrix hessian(std::size_t a) const
    {
        return Eigen::Map<const Eigen::MatrixXd>(hessians.col(Eigen::Index(a)).data(), dim, dim);
    }
};

/// Tensor-product B-spline or NURBS space on the parameter cube.
///
/// Directions 0..d-1 are spatial, direction d is time. Flat dof indices are
/// lexicographic with direction 0 running fastest.
class DiscreteSpace {
public:
    explicit DiscreteSpace(std::vector<KnotVector> knot_vectors,
                           std::optional<std::vector<double>> weights = std::nullopt);

    int dim() const { return int(knots_.size()); }
    int spatial_dim() const { return dim() - 1; }
    const KnotVector& knots(int dir) const { return knots_[std::size_t(dir)]; }
    int num_basis(int dir) const { return knots_[std::size_t(dir)].num_basis(); }
    int degree(int dir) const { return knots_[std::size_t(dir)].degree(); }
    std::size_t size() const { return size_; }

    bool is_rational() const { return weights_.has_value(); }
    std::span<const double> weights() const
    {
        return weights_ ? std::span<const double>(*weights_) : std::span<const double>{};
    }

    std::size_t flat_index(const MultiIndex& mi) const;
    MultiIndex multi_index(std::size_t flat) const;

    /// Number of active functions per point, the product of (p_a + 1).
    std::size_t active_count() const;

    /// Rational (or polynomial) basis values and parameter derivatives up to
    /// `max_deriv` at `xi`. Reuses the storage of `out`.
    void evaluate(std::span<const double> xi, int max_deriv, BasisPoint& out) const;
    BasisPoint evaluate(std::span<const double> xi, int max_deriv) const;

    /// Applies refine_uniform in every direction. Only defined for
    /// non-rational spaces.
    DiscreteSpace refined() const;

private:
    std::vector<KnotVector> knots_;
    std::optional<std::vector<double>> weights_;
    std::size_t size_ = 0;
};

/// eval_multivariate as a free function.
inline BasisPoint eval_multivariate(const DiscreteSpace& space, std::span<const double> xi, int max_deriv)
{
    return space.evaluate(xi, max_deriv);
}

/// Classification of dofs into Dirichlet (lateral boundary or initial face)
/// and free ones. The terminal time face is free.
class DofMap {
public:
    explicit DofMap(const DiscreteSpace& space);

    std::size_t size() const { return is_dirichlet_.size(); }
    std::size_t num_free() const { return free_.size(); }
    std::size_t num_dirichlet() const { return dirichlet_.size(); }
    bool is_dirichlet(std::size_t flat) const { return is_dirichlet_[flat]; }

    /// Flat indices of free / Dirichlet dofs in increasing order.
    std::span<const std::size_t> free_dofs() const { return free_; }
    std::span<const std::size_t> dirichlet_dofs() const { return dirichlet_; }

    /// Position within free_dofs() / dirichlet_dofs(), or -1.
    long free_position(std::size_t flat) const { return free_pos_[flat]; }
    long dirichlet_position(std::size_t flat) const { return dir_pos_[flat]; }

private:
    std::vector<bool> is_dirichlet_;
    std::vector<std::size_t> free_;
    std::vector<std::size_t> dirichlet_;
    std::vector<long> free_pos_;
    std::vector<long> dir_pos_;
};

inline DofMap classify_dirichlet(const DiscreteSpace& space) { return DofMap(space); }

}  // namespace stiga
