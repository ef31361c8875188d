#pragma once

#include <Eigen/Core>
#include <array>

namespace stiga {

/// Space-time dimension d + 1 is at most 4 (d <= 3).
inline constexpr int kMaxDim = 4;

using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using MultiIndex = std::array<int, kMaxDim>;

}  // namespace stiga
