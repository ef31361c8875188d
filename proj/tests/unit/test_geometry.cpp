#include "stiga/geometry.hpp"
#include "stiga/harness.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace stiga;

namespace {

GeometryMap bilinear(const std::vector<std::array<double, 2>>& pts)
{
    const KnotVector l({0, 0, 1, 1}, 1);
    Eigen::MatrixXd cp(2, 4);
    for (int j = 0; j < 4; ++j) cp.col(j) << pts[std::size_t(j)][0], pts[std::size_t(j)][1];
    return GeometryMap(DiscreteSpace({l, l}), cp);
}

// Newton inversion of a 2D map.
Eigen::Vector2d invert(const GeometryMap& g, const Eigen::Vector2d& x, Eigen::Vector2d xi)
{
    for (int it = 0; it < 50; ++it) {
        const double p[] = {xi[0], xi[1]};
        const Eigen::Vector2d r = g.map_point(p) - x;
        if (r.norm() < 1e-15) break;
        xi -= Eigen::Matrix2d(g.jacobian(p)).lu().solve(r);
    }
    return xi;
}

}  // namespace

TEST(Quadrature, GaussExamples)
{
    auto r = gauss_1d(1);
    EXPECT_DOUBLE_EQ(r.nodes(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(r.weights[0], 1.0);
    r = gauss_1d(2);
    EXPECT_NEAR(r.nodes(0, 0), 0.5 - 1 / (2 * std::sqrt(3.0)), 1e-15);
    EXPECT_NEAR(r.nodes(0, 1), 0.5 + 1 / (2 * std::sqrt(3.0)), 1e-15);
    EXPECT_NEAR(r.weights[0], 0.5, 1e-15);
    r = gauss_1d(3);
    double s = 0;
    for (int q = 0; q < 3; ++q) s += r.weights[q] * std::pow(r.nodes(0, q), 5);
    EXPECT_NEAR(s, 1.0 / 6.0, 1e-15);
    EXPECT_THROW(gauss_1d(0), std::invalid_argument);
    EXPECT_THROW(gauss_1d(17), std::invalid_argument);
}

TEST(Quadrature, ExactToDegree2nMinus1)
{
    for (int n = 1; n <= 16; ++n) {
        const auto r = gauss_1d(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0;
            for (Eigen::Index q = 0; q < r.size(); ++q) s += r.weights[q] * std::pow(r.nodes(0, q), k);
            EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "n=" << n << " k=" << k;
        }
    }
}

TEST(Quadrature, ElementRules)
{
    const Interval unit[] = {{0, 1}, {0, 1}};
    const int o22[] = {2, 2}, o11[] = {1, 1};
    auto r = element_rule(unit, o22);
    ASSERT_EQ(r.size(), 4);
    for (Eigen::Index q = 0; q < 4; ++q) EXPECT_NEAR(r.weights[q], 0.25, 1e-15);
    double s = 0;
    for (Eigen::Index q = 0; q < 4; ++q) s += r.weights[q] * std::pow(r.nodes(0, q) * r.nodes(1, q), 3);
    EXPECT_NEAR(s, 1.0 / 16.0, 1e-15);

    const Interval half[] = {{0, 0.5}, {0, 0.5}};
    r = element_rule(half, o11);
    ASSERT_EQ(r.size(), 1);
    EXPECT_DOUBLE_EQ(r.nodes(0, 0), 0.25);
    EXPECT_DOUBLE_EQ(r.nodes(1, 0), 0.25);
    EXPECT_DOUBLE_EQ(r.weights[0], 0.25);
}

TEST(Quadrature, FaceRule)
{
    const Interval unit[] = {{0, 1}, {0, 1}};
    const int o[] = {2, 2};
    const auto r = face_rule(1, 1.0, unit, o);
    ASSERT_EQ(r.size(), 2);
    EXPECT_NEAR(r.nodes(0, 0), 0.5 - 1 / (2 * std::sqrt(3.0)), 1e-15);
    EXPECT_NEAR(r.nodes(0, 1), 0.5 + 1 / (2 * std::sqrt(3.0)), 1e-15);
    EXPECT_EQ(r.nodes(1, 0), 1.0);
    EXPECT_NEAR(r.weights.sum(), 1.0, 1e-15);
}

TEST(Geometry, MapPointExamples)
{
    const auto id = GeometryMap::unit_cube(2);
    const double a[] = {0.3, 0.7};
    EXPECT_NEAR((id.map_point(a) - Eigen::Vector2d(0.3, 0.7)).norm(), 0.0, 1e-15);

    const auto simple = builtin_case("moving-simple-1d").geometry;
    const double c[] = {0.5, 0.5};
    EXPECT_NEAR((simple.map_point(c) - Eigen::Vector2d(0.5, 0.5)).norm(), 0.0, 1e-15);

    const auto curvi = builtin_case("moving-curvi-1d").geometry;
    const double e[] = {0.0, 0.5};
    EXPECT_NEAR((curvi.map_point(e) - Eigen::Vector2d(0.125, 0.5)).norm(), 0.0, 1e-15);
    for (double t : {0.1, 0.3, 0.9}) {
        const double l[] = {0.0, t}, r[] = {1.0, t};
        EXPECT_NEAR(curvi.map_point(l)[0], t * (1 - t) / 2, 1e-15);
        EXPECT_NEAR(curvi.map_point(r)[0], 1 - t * (1 - t) / 2, 1e-15);
    }
}

TEST(Geometry, JacobianExamples)
{
    double det = 0;
    const double c[] = {0.5, 0.5};
    const auto J0 = GeometryMap::unit_cube(2).jacobian(c, &det);
    EXPECT_NEAR((J0 - Eigen::Matrix2d::Identity()).norm(), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(det, 1.0);

    const auto J = builtin_case("moving-simple-1d").geometry.jacobian(c, &det);
    EXPECT_NEAR(J(0, 0), 1.5, 1e-15);
    EXPECT_NEAR(J(1, 1), 1.0, 1e-15);
    EXPECT_NEAR(J(0, 1), 0.0, 1e-15);
    EXPECT_NEAR(J(1, 0), 0.0, 1e-15);
    EXPECT_NEAR(det, 1.5, 1e-15);
}

TEST(Geometry, HessianExamples)
{
    const double c[] = {0.3, 0.6};
    for (const auto& H : GeometryMap::unit_cube(2).hessian(c)) {
        if (H.size()) EXPECT_EQ(H.norm(), 0.0);
    }
    const auto H = builtin_case("moving-simple-1d").geometry.hessian(c);
    EXPECT_NEAR(H[0](0, 1), 1.0, 1e-15);
    EXPECT_NEAR(H[0](1, 0), 1.0, 1e-15);
    EXPECT_NEAR(H[0](0, 0), 0.0, 1e-15);
    EXPECT_NEAR(H[0](1, 1), 0.0, 1e-15);
    EXPECT_NEAR(H[1].norm(), 0.0, 1e-15);
}

TEST(Geometry, DeterminantMatchesFiniteDifferences)
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    const double eps = 1e-6;
    for (const auto& id : builtin_case_ids()) {
        const auto g = builtin_case(id).geometry;
        const int d = g.dim();
        for (int k = 0; k < 200; ++k) {
            std::vector<double> xi(static_cast<std::size_t>(d));
            for (auto& c : xi) c = u(rng);
            Eigen::MatrixXd fd(d, d);
            for (int a = 0; a < d; ++a) {
                auto xp = xi, xm = xi;
                xp[std::size_t(a)] += eps;
                xm[std::size_t(a)] -= eps;
                fd.col(a) = (g.map_point(xp) - g.map_point(xm)) / (2 * eps);
            }
            double det = 0;
            g.jacobian(xi, &det);
            EXPECT_NEAR(det, fd.determinant(), 1e-6 * std::abs(det)) << id;
        }
    }
}

TEST(Geometry, SingularMapThrows)
{
    const auto g = bilinear({{0, 0}, {1, 0}, {1, 1}, {0, 1}});  // flipped top edge crosses itself
    const double c[] = {0.5, 0.5};
    EXPECT_THROW(g.jacobian(c), SingularGeometryError);
    const KnotVector l({0, 0, 1, 1}, 1);
    EXPECT_THROW(GeometryMap(DiscreteSpace({l, l}), Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST(Pullback, AffineScaling)
{
    const auto g = bilinear({{0, 0}, {2, 0}, {0, 1}, {2, 1}});
    const double c[] = {0.4, 0.3};
    const auto jet = g.evaluate(c, 2);
    Point grad(2);
    grad << 3.0, 5.0;
    SmallMatrix hess(2, 2);
    hess << 4.0, 1.0, 1.0, 2.0;
    const auto pd = pullback_derivatives(jet, 7.0, grad, hess);
    EXPECT_DOUBLE_EQ(pd.value, 7.0);
    EXPECT_NEAR(pd.gradient[0], 1.5, 1e-15);
    EXPECT_NEAR(pd.gradient[1], 5.0, 1e-15);
    EXPECT_NEAR(pd.hessian(0, 0), 1.0, 1e-15);
    EXPECT_NEAR(pd.hessian(0, 1), 0.5, 1e-15);
    EXPECT_NEAR(pd.hessian(1, 1), 2.0, 1e-15);
}

TEST(Pullback, MatchesFiniteDifferencesOnBilinearMap)
{
    const auto g = bilinear({{0, 0}, {1.2, 0.1}, {-0.3, 0.9}, {1.4, 1.3}});
    const KnotVector q({0, 0, 0, 0.5, 1, 1, 1}, 2);
    const DiscreteSpace s({q, q});
    const double xi[] = {0.37, 0.61};
    const auto bp = s.evaluate(xi, 2);
    const auto jet = g.evaluate(xi, 2);
    const Eigen::Vector2d x0 = g.map_point(xi);
    const double eps = 1e-5;

    // phi o Phi^{-1} at a physical point.
    auto phys = [&](std::size_t a, const Eigen::Vector2d& x) {
        const Eigen::Vector2d p = invert(g, x, Eigen::Vector2d(xi[0], xi[1]));
        const double pp[] = {p[0], p[1]};
        const auto b = s.evaluate(pp, 0);
        for (std::size_t c = 0; c < b.size(); ++c) {
            if (b.indices[c] == bp.indices[a]) return b.values[Eigen::Index(c)];
        }
        return 0.0;
    };
    for (std::size_t a = 0; a < bp.size(); ++a) {
        const auto pd = pullback_derivatives(jet, bp.values[Eigen::Index(a)], bp.gradients.col(Eigen::Index(a)),
                                             bp.hessian(a));
        const Eigen::Vector2d ex(eps, 0), et(0, eps);
        const double gx = (phys(a, x0 + ex) - phys(a, x0 - ex)) / (2 * eps);
        const double gt = (phys(a, x0 + et) - phys(a, x0 - et)) / (2 * eps);
        const double mixed = (phys(a, x0 + ex + et) - phys(a, x0 + ex - et) - phys(a, x0 - ex + et) +
                              phys(a, x0 - ex - et)) /
                             (4 * eps * eps);
        EXPECT_NEAR(pd.gradient[0], gx, 1e-5 * std::max(1.0, std::abs(gx)));
        EXPECT_NEAR(pd.gradient[1], gt, 1e-5 * std::max(1.0, std::abs(gt)));
        EXPECT_NEAR(pd.hessian(0, 1), mixed, 1e-4 * std::max(1.0, std::abs(mixed)));
        EXPECT_NEAR(pd.hessian(1, 0), pd.hessian(0, 1), 1e-12);
    }
}

TEST(MeshMetrics, IdentityAndHalving)
{
    const auto id = GeometryMap::unit_cube(2);
    const DiscreteSpace s({KnotVector::open_uniform(1, 2), KnotVector::open_uniform(1, 2)});
    const auto m = mesh_metrics(id, s);
    ASSERT_EQ(m.elements.size(), 4u);
    for (double hk : m.h_K) EXPECT_NEAR(hk, 0.5 * std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(m.quasi_uniformity, 1.0, 1e-14);

    const auto def = builtin_case("moving-simple-1d");
    double prev = 0;
    for (int level = 0; level < 4; ++level) {
        const auto mm = mesh_metrics(def.geometry, solution_space(def.geometry, 2, level));
        if (level == 0) EXPECT_GE(mm.h, 1.5 * std::sqrt(2.0));
        if (level > 0) EXPECT_NEAR(prev / mm.h, 2.0, 0.1);
        prev = mm.h;
    }
    const auto fixed = builtin_case("fixed-1d");
    prev = 0;
    for (int level = 0; level < 4; ++level) {
        const auto mm = mesh_metrics(fixed.geometry, solution_space(fixed.geometry, 1, level));
        if (level > 0) EXPECT_NEAR(prev / mm.h, 2.0, 1e-12);
        prev = mm.h;
    }
    const auto curvi = builtin_case("moving-curvi-1d");
    prev = 0;
    for (int level = 0; level < 5; ++level) {
        const auto mm = mesh_metrics(curvi.geometry, solution_space(curvi.geometry, 2, level));
        if (level > 0) {
            EXPECT_GE(prev / mm.h, 1.8);
            EXPECT_LE(prev / mm.h, 2.2);
        }
        prev = mm.h;
    }
}

TEST(MeshMetrics, PositiveDeterminantOnShippedCases)
{
    for (const auto& id : builtin_case_ids()) {
        const auto def = builtin_case(id);
        const auto space = solution_space(def.geometry, 2, 1);
        for (const auto& el : mesh_elements(space)) {
            const auto rule = element_rule(el.intervals(), default_orders(space));
            for (Eigen::Index q = 0; q < rule.size(); ++q) {
                double det = 0;
                def.geometry.jacobian(std::span<const double>(rule.nodes.col(q).data(), std::size_t(space.dim())), &det);
                EXPECT_GT(det, 0.0);
            }
        }
    }
}

TEST(FaceMeasure, TerminalFaceLength)
{
    for (const auto& [id, expected] : {std::pair{"fixed-1d", 1.0}, std::pair{"moving-simple-1d", 2.0},
                                       std::pair{"moving-curvi-1d", 1.0}, std::pair{"moving-curvi-2d", 1.0}}) {
        const auto g = builtin_case(id).geometry;
        const int d = g.dim();
        std::vector<Interval> spans(static_cast<std::size_t>(d), Interval{0.0, 1.0});
        const std::vector<int> orders(static_cast<std::size_t>(d), 4);
        const auto r = face_rule(d - 1, 1.0, spans, orders);
        double s = 0;
        for (Eigen::Index q = 0; q < r.size(); ++q) {
            const auto J = g.jacobian(std::span<const double>(r.nodes.col(q).data(), std::size_t(d)));
            s += r.weights[q] * face_measure_factor(J, d - 1);
        }
        EXPECT_NEAR(s, expected, 1e-13) << id;
    }
}
