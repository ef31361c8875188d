#include "stiga/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stiga {

namespace {

constexpr double pi = std::numbers::pi;

double spatial_product(const Point& x, int d, int skip = -1)
{
    double s = 1.0;
    for (int k = 0; k < d; ++k) {
        if (k != skip) s *= std::sin(pi * x[k]);
    }
    return s;
}

GeometryMap from_control_points(std::vector<KnotVector> kvs, std::initializer_list<std::initializer_list<double>> pts)
{
    DiscreteSpace basis(std::move(kvs));
    Eigen::MatrixXd cp(basis.dim(), Eigen::Index(pts.size()));
    Eigen::Index j = 0;
    for (const auto& p : pts) {
        Eigen::Index i = 0;
        for (double c : p) cp(i++, j) = c;
        ++j;
    }
    return GeometryMap(std::move(basis), std::move(cp));
}

KnotVector linear() { return KnotVector({0, 0, 1, 1}, 1); }
KnotVector quadratic() { return KnotVector({0, 0, 0, 1, 1, 1}, 2); }

}  // namespace

ManufacturedCase sine_product_case(int spatial_dim, bool homogeneous_boundary)
{
    if (spatial_dim < 1 || spatial_dim > kMaxDim - 1) {
        throw std::invalid_argument("sine product case: spatial dimension must lie in [1, 3]");
    }
    const int d = spatial_dim;
    ManufacturedCase c;
    c.name = "sine-product-" + std::to_string(d) + "d";
    c.spatial_dim = d;
    c.homogeneous_boundary = homogeneous_boundary;
    c.u = [d](const Point& x) { return spatial_product(x, d) * std::sin(pi * x[d]); };
    c.grad_x = [d](const Point& x) {
        Point g(d);
        for (int k = 0; k < d; ++k) g[k] = pi * std::cos(pi * x[k]) * spatial_product(x, d, k) * std::sin(pi * x[d]);
        return g;
    };
    c.u_t = [d](const Point& x) { return pi * spatial_product(x, d) * std::cos(pi * x[d]); };
    c.f = [d](const Point& x) {
        return pi * spatial_product(x, d) * (std::cos(pi * x[d]) + d * pi * std::sin(pi * x[d]));
    };
    return c;
}

std::vector<std::string> builtin_case_ids()
{
    return {"fixed-1d", "fixed-2d", "moving-simple-1d", "moving-curvi-1d", "moving-curvi-2d"};
}

CaseDefinition builtin_case(const std::string& id)
{
    if (id == "fixed-1d") {
        return {id, "unit interval, fixed in time", GeometryMap::unit_cube(2), sine_product_case(1, true),
                FormVariant::fixed};
    }
    if (id == "fixed-2d") {
        return {id, "unit square, fixed in time", GeometryMap::unit_cube(3), sine_product_case(2, true),
                FormVariant::fixed};
    }
    if (id == "moving-simple-1d") {
        auto g = from_control_points({linear(), linear()}, {{0, 0}, {1, 0}, {-0.5, 1}, {1.5, 1}});
        return {id, "interval (-t/2, 1+t/2)", std::move(g), sine_product_case(1, false), FormVariant::moving};
    }
    if (id == "moving-curvi-1d") {
        auto g = from_control_points({linear(), quadratic()},
                                     {{0, 0}, {1, 0}, {0.25, 0.5}, {0.75, 0.5}, {0, 1}, {1, 1}});
        return {id, "interval (t(1-t)/2, 1-t(1-t)/2)", std::move(g), sine_product_case(1, false),
                FormVariant::moving};
    }
    if (id == "moving-curvi-2d") {
        auto g = from_control_points({linear(), linear(), quadratic()},
                                     {{0, 0, 0},
                                      {1, 0, 0},
                                      {0, 1, 0},
                                      {1, 1, 0},
                                      {0.25, 0, 0.5},
                                      {0.75, 0, 0.5},
                                      {0.25, 1, 0.5},
                                      {0.75, 1, 0.5},
                                      {0, 0, 1},
                                      {1, 0, 1},
                                      {0, 1, 1},
                                      {1, 1, 1}});
        return {id, "(t(1-t)/2, 1-t(1-t)/2) x (0,1)", std::move(g), sine_product_case(2, false),
                FormVariant::moving};
    }
    throw std::invalid_argument("unknown case '" + id + "'");
}

GeometryMap build_geometry(const GeometrySpec& spec)
{
    const std::size_t dim = spec.knots.size();
    if (dim < 2 || dim > std::size_t(kMaxDim)) {
        throw std::invalid_argument("geometry: need between 2 and 4 knot vectors");
    }
    if (spec.degrees.size() != dim) {
        throw std::invalid_argument("geometry: " + std::to_string(spec.degrees.size()) + " degrees for " +
                                    std::to_string(dim) + " knot vectors");
    }
    std::vector<KnotVector> kvs;
    for (std::size_t a = 0; a < dim; ++a) kvs.emplace_back(spec.knots[a], spec.degrees[a]);

    std::optional<std::vector<double>> weights = spec.weights;
    if (weights && std::all_of(weights->begin(), weights->end(), [](double w) { return w == 1.0; })) {
        weights.reset();
    }
    DiscreteSpace basis(std::move(kvs), std::move(weights));
    if (spec.control_points.rows() != Eigen::Index(dim) ||
        std::size_t(spec.control_points.cols()) != basis.size()) {
        throw std::invalid_argument("geometry: expected " + std::to_string(basis.size()) + " control points of dimension " +
                                    std::to_string(dim));
    }
    return GeometryMap(std::move(basis), spec.control_points);
}

}  // namespace stiga
