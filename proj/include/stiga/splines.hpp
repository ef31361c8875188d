#pragma once

#include <array>
#include <span>
#include <vector>

namespace stiga {

/// Largest polynomial degree supported by the fixed-size evaluation buffers.
inline constexpr int kMaxDegree = 10;

/// Open knot vector on [0,1] together with its degree.
///
/// The first and last knots are repeated exactly `degree + 1` times and no
/// interior knot exceeds multiplicity `degree + 1`. Construction throws
/// std::invalid_argument when any of these conditions is violated.
class KnotVector {
public:
    KnotVector(std::vector<double> knots, int degree);

    /// Open knot vector with `num_elements` equal spans.
    static KnotVector open_uniform(int degree, int num_elements);

    int degree() const { return degree_; }
    int num_basis() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    std::span<const double> knots() const { return knots_; }
    double operator[](std::size_t i) const { return knots_[i]; }
    std::size_t size() const { return knots_.size(); }

    /// Distinct knot values (the breakpoints of the parameter mesh).
    std::vector<double> breakpoints() const;
    int num_elements() const { return static_cast<int>(breakpoints().size()) - 1; }

    friend bool operator==(const KnotVector&, const KnotVector&) = default;

private:
    std::vector<double> knots_;
    int degree_;
};

/// The p + 1 non-zero basis functions at a point and their derivatives.
///
/// Entry k belongs to basis function `span - degree + k`.
struct BasisEvalRow {
    int span = 0;
    int degree = 0;
    std::array<std::array<double, kMaxDegree + 1>, 3> ders{};

    std::span<const double> values() const { return {ders[0].data(), std::size_t(degree + 1)}; }
    std::span<const double> first_derivs() const { return {ders[1].data(), std::size_t(degree + 1)}; }
    std::span<const double> second_derivs() const { return {ders[2].data(), std::size_t(degree + 1)}; }
    int first_index() const { return span - degree; }
};

/// Zero-based index s with knots[s] <= xi < knots[s+1]. xi = 1 maps to the
/// last non-empty span. Throws std::domain_error outside [0,1].
int find_span(const KnotVector& kv, double xi);

/// Cox-de Boor evaluation of the active functions and up to `max_deriv`
/// (0, 1 or 2) derivatives. Derivative rows above the degree are zero.
BasisEvalRow eval_basis(const KnotVector& kv, double xi, int max_deriv);

/// Inserts the midpoint of every non-empty span once.
KnotVector refine_uniform(const KnotVector& kv);

}  // namespace stiga
