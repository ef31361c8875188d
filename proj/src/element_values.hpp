#pragma once

// Per-element tabulation of physical basis derivatives at quadrature nodes,
// shared by assembly and error evaluation.

#include "stiga/geometry.hpp"
#include "stiga/quadrature.hpp"
#include "stiga/tensor_space.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace stiga::detail {

/// Rows are quadrature nodes, columns are the element's active functions.
struct ElementValues {
    std::vector<std::size_t> dofs;
    Eigen::MatrixXd val;
    Eigen::MatrixXd dt;
    std::array<Eigen::MatrixXd, kMaxDim - 1> dx;
    std::array<Eigen::MatrixXd, kMaxDim - 1> dxt;  // d_t d_{x_k}
    Eigen::VectorXd weights;                       // rule weight times |det J| or surface factor
    Eigen::MatrixXd points;                        // physical nodes, one column each
    BasisPoint scratch;
};

/// `face_dir` < 0 tabulates a volume rule; otherwise the rule lives on the
/// face with that direction pinned. `max_deriv` = 2 also fills dxt.
void tabulate(const DiscreteSpace& space, const GeometryMap& geom, const QuadratureRule& rule, int face_dir,
              int max_deriv, std::size_t element_id, ElementValues& out);

/// Runs fn(element_id, worker) over all mesh elements. Elements are grouped
/// into slabs of equal index along direction 0 and the slabs are colored
/// modulo `colors`, so two elements processed concurrently never share a dof
/// when colors > p_0. The per-dof accumulation order does not depend on the
/// thread count.
template <class Fn>
void for_each_element(std::span<const Element> elements, int colors, int threads, Fn&& fn)
{
    int num_slabs = 0;
    for (const auto& el : elements) num_slabs = std::max(num_slabs, el.index[0] + 1);
    std::vector<std::vector<std::size_t>> slabs(static_cast<std::size_t>(num_slabs));
    for (std::size_t e = 0; e < elements.size(); ++e) slabs[std::size_t(elements[e].index[0])].push_back(e);

    threads = std::max(1, threads);
    for (int c = 0; c < colors; ++c) {
        std::vector<std::size_t> mine;
        for (int s = c; s < num_slabs; s += colors) mine.push_back(std::size_t(s));
        if (threads == 1 || mine.size() < 2) {
            for (std::size_t s : mine) {
                for (std::size_t e : slabs[s]) fn(e, 0);
            }
            continue;
        }
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        const int used = std::min<int>(threads, int(mine.size()));
        for (int t = 0; t < used; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t k = std::size_t(t); k < mine.size(); k += std::size_t(used)) {
                        for (std::size_t e : slabs[mine[k]]) fn(e, t);
                    }
                } catch (...) {
                    const std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        if (error) std::rethrow_exception(error);
    }
}

}  // namespace stiga::detail
