#include "stiga/splines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stiga {

KnotVector::KnotVector(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree)
{
    if (degree_ < 1 || degree_ > kMaxDegree) {
        throw std::invalid_argument("knot vector: degree must lie in [1, " +
                                    std::to_string(kMaxDegree) + "]");
    }
    const auto m = knots_.size();
    if (m < std::size_t(2 * (degree_ + 1))) {
        throw std::invalid_argument("knot vector: fewer than 2(p+1) knots");
    }
    if (!std::is_sorted(knots_.begin(), knots_.end())) {
        throw std::invalid_argument("knot vector: knots must be non-decreasing");
    }
    if (knots_.front() != 0.0 || knots_.back() != 1.0) {
        throw std::invalid_argument("knot vector: knots must start at 0 and end at 1");
    }
    const auto front = std::count(knots_.begin(), knots_.end(), 0.0);
    const auto back = std::count(knots_.begin(), knots_.end(), 1.0);
    if (front != degree_ + 1 || back != degree_ + 1) {
        throw std::invalid_argument("knot vector: end knots must have multiplicity p+1");
    }
    for (std::size_t i = 0; i < m;) {
        std::size_t j = i;
        while (j < m && knots_[j] == knots_[i]) ++j;
        if (int(j - i) > degree_ + 1) {
            std::ostringstream os;
            os << "knot vector: knot " << knots_[i] << " exceeds multiplicity p+1";
            throw std::invalid_argument(os.str());
        }
        i = j;
    }
}

KnotVector KnotVector::open_uniform(int degree, int num_elements)
{
    if (num_elements < 1) {
        throw std::invalid_argument("knot vector: need at least one element");
    }
    std::vector<double> knots(std::size_t(degree + 1), 0.0);
    for (int e = 1; e < num_elements; ++e) knots.push_back(double(e) / num_elements);
    knots.insert(knots.end(), std::size_t(degree + 1), 1.0);
    return KnotVector(std::move(knots), degree);
}

std::vector<double> KnotVector::breakpoints() const
{
    std::vector<double> out(knots_);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int find_span(const KnotVector& kv, double xi)
{
    if (!(xi >= 0.0 && xi <= 1.0)) {
        throw std::domain_error("find_span: parameter outside [0,1]");
    }
    const int n = kv.num_basis();
    const int p = kv.degree();
    const auto knots = kv.knots();
    if (xi >= knots[std::size_t(n)]) {
        // Closed right end: last span with knots[s] < knots[s+1].
        int s = n - 1;
        while (s > p && knots[std::size_t(s)] == knots[std::size_t(s + 1)]) --s;
        return s;
    }
    const auto it = std::upper_bound(knots.begin() + p, knots.begin() + n + 1, xi);
    return int(it - knots.begin()) - 1;
}

BasisEvalRow eval_basis(const KnotVector& kv, double xi, int max_deriv)
{
    const int p = kv.degree();
    const int s = find_span(kv, xi);
    const auto U = kv.knots();

    BasisEvalRow row;
    row.span = s;
    row.degree = p;

    // Triangular table of basis values (upper) and knot differences (lower).
    std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1> ndu{};
    std::array<double, kMaxDegree + 1> left{}, right{};
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = xi - U[std::size_t(s + 1 - j)];
        right[j] = U[std::size_t(s + j)] - xi;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[j][r] == 0.0 ? 0.0 : ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= p; ++j) row.ders[0][j] = ndu[j][p];

    const int nd = std::min(std::max(max_deriv, 0), std::min(p, 2));
    std::array<std::array<double, kMaxDegree + 1>, 2> a{};
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0].fill(0.0);
        a[1].fill(0.0);
        a[0][0] = 1.0;
        for (int k = 1; k <= nd; ++k) {
            double d = 0.0;
            const int rk = r - k;
            const int pk = p - k;
            if (r >= k) {
                const double den = ndu[pk + 1][rk];
                a[s2][0] = den == 0.0 ? 0.0 : a[s1][0] / den;
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                const double den = ndu[pk + 1][rk + j];
                a[s2][j] = den == 0.0 ? 0.0 : (a[s1][j] - a[s1][j - 1]) / den;
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                const double den = ndu[pk + 1][r];
                a[s2][k] = den == 0.0 ? 0.0 : -a[s1][k - 1] / den;
                d += a[s2][k] * ndu[r][pk];
            }
            row.ders[std::size_t(k)][std::size_t(r)] = d;
            std::swap(s1, s2);
        }
    }
    double factor = p;
    for (int k = 1; k <= nd; ++k) {
        for (int j = 0; j <= p; ++j) row.ders[std::size_t(k)][std::size_t(j)] *= factor;
        factor *= (p - k);
    }
    return row;
}

KnotVector refine_uniform(const KnotVector& kv)
{
    const auto U = kv.knots();
    std::vector<double> out;
    out.reserve(U.size() * 2);
    for (std::size_t i = 0; i + 1 < U.size(); ++i) {
        out.push_back(U[i]);
        if (U[i] < U[i + 1]) out.push_back(0.5 * (U[i] + U[i + 1]));
    }
    out.push_back(U.back());
    return KnotVector(std::move(out), kv.degree());
}

}  // namespace stiga
