#pragma once

#include <Eigen/Core>
#include <span>
#include <utility>
#include <vector>

namespace stiga {

/// Quadrature nodes (one column per node) and positive weights.
struct QuadratureRule {
    Eigen::MatrixXd nodes;
    Eigen::VectorXd weights;

    Eigen::Index size() const { return weights.size(); }
    int dim() const { return int(nodes.rows()); }
};

using Interval = std::pair<double, double>;

/// n-point Gauss-Legendre rule on [0,1], 1 <= n <= 16.
QuadratureRule gauss_1d(int n);

/// Tensor Gauss rule on the cell spans[0] x ... x spans[d]; weights include the cell measure.
QuadratureRule element_rule(std::span<const Interval> spans, std::span<const int> orders);

/// Tensor Gauss rule over the cell face whose coordinate `fixed_dir` is pinned to
/// `fixed_value`. Nodes carry all coordinates; weights are parameter measures of
/// the free directions only. The physical surface factor is applied by the caller.
QuadratureRule face_rule(int fixed_dir, double fixed_value, std::span<const Interval> spans,
                         std::span<const int> orders);

}  // namespace stiga
