#include "stiga/tensor_space.hpp"

#include <stdexcept>

namespace stiga {

DiscreteSpace::DiscreteSpace(std::vector<KnotVector> knot_vectors,
                             std::optional<std::vector<double>> weights)
    : knots_(std::move(knot_vectors)), weights_(std::move(weights))
{
    if (knots_.size() < 2 || knots_.size() > std::size_t(kMaxDim)) {
        throw std::invalid_argument("discrete space: need between 2 and 4 directions");
    }
    size_ = 1;
    for (const auto& kv : knots_) size_ *= std::size_t(kv.num_basis());
    if (weights_) {
        if (weights_->size() != size_) {
            throw std::invalid_argument("discrete space: " + std::to_string(weights_->size()) +
                                        " weights for " + std::to_string(size_) + " basis functions");
        }
        for (double w : *weights_) {
            if (!(w > 0.0)) throw std::invalid_argument("discrete space: weights must be positive");
        }
    }
}

std::size_t DiscreteSpace::flat_index(const MultiIndex& mi) const
{
    std::size_t flat = 0;
    for (int a = dim() - 1; a >= 0; --a) {
        flat = flat * std::size_t(num_basis(a)) + std::size_t(mi[std::size_t(a)]);
    }
    return flat;
}

MultiIndex DiscreteSpace::multi_index(std::size_t flat) const
{
    MultiIndex mi{};
    for (int a = 0; a < dim(); ++a) {
        const auto n = std::size_t(num_basis(a));
        mi[std::size_t(a)] = int(flat % n);
        flat /= n;
    }
    return mi;
}

std::size_t DiscreteSpace::active_count() const
{
    std::size_t n = 1;
    for (const auto& kv : knots_) n *= std::size_t(kv.degree() + 1);
    return n;
}

BasisPoint DiscreteSpace::evaluate(std::span<const double> xi, int max_deriv) const
{
    BasisPoint out;
    evaluate(xi, max_deriv, out);
    return out;
}

void DiscreteSpace::evaluate(std::span<const double> xi, int max_deriv, BasisPoint& out) const
{
    const int d = dim();
    if (int(xi.size()) != d) throw std::invalid_argument("evaluate: point dimension mismatch");
    std::array<BasisEvalRow, kMaxDim> rows;
    for (int a = 0; a < d; ++a) rows[std::size_t(a)] = eval_basis(knots_[std::size_t(a)], xi[std::size_t(a)], max_deriv);

    const std::size_t n = active_count();
    out.dim = d;
    out.indices.resize(n);
    out.values.resize(Eigen::Index(n));
    out.gradients.setZero(d, Eigen::Index(n));
    out.hessians.setZero(d * d, Eigen::Index(n));

    MultiIndex local{};
    for (std::size_t a = 0; a < n; ++a) {
        MultiIndex mi{};
        for (int k = 0; k < d; ++k) mi[std::size_t(k)] = rows[std::size_t(k)].first_index() + local[std::size_t(k)];
        out.indices[a] = flat_index(mi);

        const auto col = Eigen::Index(a);
        double v = 1.0;
        for (int k = 0; k < d; ++k) v *= rows[std::size_t(k)].ders[0][std::size_t(local[std::size_t(k)])];
        out.values[col] = v;
        if (max_deriv >= 1) {
            for (int g = 0; g < d; ++g) {
                double prod = 1.0;
                for (int k = 0; k < d; ++k) {
                    prod *= rows[std::size_t(k)].ders[k == g ? 1 : 0][std::size_t(local[std::size_t(k)])];
                }
                out.gradients(g, col) = prod;
            }
        }
        if (max_deriv >= 2) {
            for (int g = 0; g < d; ++g) {
                for (int h = g; h < d; ++h) {
                    double prod = 1.0;
                    for (int k = 0; k < d; ++k) {
                        const int order = (k == g) + (k == h);
                        prod *= rows[std::size_t(k)].ders[std::size_t(order)][std::size_t(local[std::size_t(k)])];
                    }
                    out.hessians(g + d * h, col) = prod;
                    out.hessians(h + d * g, col) = prod;
                }
            }
        }
        for (int k = 0; k < d; ++k) {
            if (++local[std::size_t(k)] <= rows[std::size_t(k)].degree) break;
            local[std::size_t(k)] = 0;
        }
    }

    if (!weights_) return;

    // Quotient rule through the weighting function W = sum_i w_i B_i.
    const auto& w = *weights_;
    for (std::size_t a = 0; a < n; ++a) {
        const double wi = w[out.indices[a]];
        out.values[Eigen::Index(a)] *= wi;
        out.gradients.col(Eigen::Index(a)) *= wi;
        out.hessians.col(Eigen::Index(a)) *= wi;
    }
    const double W = out.values.sum();
    const Eigen::VectorXd dW = out.gradients.rowwise().sum();
    const Eigen::VectorXd d2W = out.hessians.rowwise().sum();
    for (std::size_t a = 0; a < n; ++a) {
        const auto col = Eigen::Index(a);
        const double R = out.values[col] / W;
        Eigen::VectorXd dR = (out.gradients.col(col) - R * dW) / W;
        if (max_deriv >= 2) {
            for (int g = 0; g < d; ++g) {
                for (int h = 0; h < d; ++h) {
                    const auto idx = g + d * h;
                    out.hessians(idx, col) =
                        (out.hessians(idx, col) - dR[g] * dW[h] - dR[h] * dW[g] - R * d2W[idx]) / W;
                }
            }
        }
        out.values[col] = R;
        if (max_deriv >= 1) out.gradients.col(col) = dR;
    }
}

DiscreteSpace DiscreteSpace::refined() const
{
    if (weights_) throw std::logic_error("refined: rational spaces are not refined");
    std::vector<KnotVector> kvs;
    kvs.reserve(knots_.size());
    for (const auto& kv : knots_) kvs.push_back(refine_uniform(kv));
    return DiscreteSpace(std::move(kvs));
}

DofMap::DofMap(const DiscreteSpace& space)
{
    const int d = space.spatial_dim();
    for (int a = 0; a < space.dim(); ++a) {
        if (space.num_basis(a) < 2) {
            throw std::invalid_argument("dof map: every direction needs at least two basis functions");
        }
    }
    const std::size_t n = space.size();
    is_dirichlet_.assign(n, false);
    free_pos_.assign(n, -1);
    dir_pos_.assign(n, -1);
    for (std::size_t flat = 0; flat < n; ++flat) {
        const auto mi = space.multi_index(flat);
        bool dirichlet = mi[std::size_t(d)] == 0;
        for (int a = 0; a < d; ++a) {
            dirichlet = dirichlet || mi[std::size_t(a)] == 0 || mi[std::size_t(a)] == space.num_basis(a) - 1;
        }
        is_dirichlet_[flat] = dirichlet;
        if (dirichlet) {
            dir_pos_[flat] = long(dirichlet_.size());
            dirichlet_.push_back(flat);
        } else {
            free_pos_[flat] = long(free_.size());
            free_.push_back(flat);
        }
    }
}

}  // namespace stiga
