#include "stiga/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stiga {

namespace {

// Newton iteration on the Legendre polynomial, Chebyshev-like initial guesses.
std::pair<std::vector<double>, std::vector<double>> legendre_rule(int n)
{
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[std::size_t(i)] = -z;
        x[std::size_t(n - 1 - i)] = z;
        w[std::size_t(i)] = wi;
        w[std::size_t(n - 1 - i)] = wi;
    }
    if (n % 2 == 1) x[std::size_t(n / 2)] = 0.0;
    return {x, w};
}

QuadratureRule tensor_rule(std::span<const Interval> spans, std::span<const int> orders, int fixed_dir,
                           double fixed_value)
{
    const int d = int(spans.size());
    if (int(orders.size()) != d) throw std::invalid_argument("quadrature: orders/spans size mismatch");
    std::array<QuadratureRule, 4> lines;
    Eigen::Index total = 1;
    for (int a = 0; a < d; ++a) {
        if (a == fixed_dir) continue;
        if (!(spans[std::size_t(a)].second > spans[std::size_t(a)].first)) {
            throw std::invalid_argument("quadrature: empty span");
        }
        lines[std::size_t(a)] = gauss_1d(orders[std::size_t(a)]);
        total *= lines[std::size_t(a)].size();
    }
    QuadratureRule rule;
    rule.nodes.resize(d, total);
    rule.weights.resize(total);
    std::array<Eigen::Index, 4> counter{};
    for (Eigen::Index q = 0; q < total; ++q) {
        double w = 1.0;
        for (int a = 0; a < d; ++a) {
            if (a == fixed_dir) {
                rule.nodes(a, q) = fixed_value;
                continue;
            }
            const auto [lo, hi] = spans[std::size_t(a)];
            const auto& line = lines[std::size_t(a)];
            rule.nodes(a, q) = lo + (hi - lo) * line.nodes(0, counter[std::size_t(a)]);
            w *= (hi - lo) * line.weights[counter[std::size_t(a)]];
        }
        rule.weights[q] = w;
        for (int a = 0; a < d; ++a) {
            if (a == fixed_dir) continue;
            if (++counter[std::size_t(a)] < lines[std::size_t(a)].size()) break;
            counter[std::size_t(a)] = 0;
        }
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_1d(int n)
{
    if (n < 1 || n > 16) throw std::invalid_argument("gauss_1d: order must lie in [1,16]");
    const auto [x, w] = legendre_rule(n);
    QuadratureRule rule;
    rule.nodes.resize(1, n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes(0, i) = 0.5 * (x[std::size_t(i)] + 1.0);
        rule.weights[i] = 0.5 * w[std::size_t(i)];
    }
    return rule;
}

QuadratureRule element_rule(std::span<const Interval> spans, std::span<const int> orders)
{
    return tensor_rule(spans, orders, -1, 0.0);
}

QuadratureRule face_rule(int fixed_dir, double fixed_value, std::span<const Interval> spans,
                         std::span<const int> orders)
{
    if (fixed_dir < 0 || fixed_dir >= int(spans.size())) {
        throw std::invalid_argument("face_rule: fixed direction out of range");
    }
    return tensor_rule(spans, orders, fixed_dir, fixed_value);
}

}  // namespace stiga
