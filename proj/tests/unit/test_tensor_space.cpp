#include "stiga/tensor_space.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace stiga;

namespace {

DiscreteSpace hats2() { return DiscreteSpace({KnotVector({0, 0, 1, 1}, 1), KnotVector({0, 0, 1, 1}, 1)}); }

std::vector<MultiIndex> as_one_based(const DiscreteSpace& s, std::span<const std::size_t> flats)
{
    std::vector<MultiIndex> out;
    for (auto f : flats) {
        auto mi = s.multi_index(f);
        for (auto& i : mi) ++i;
        mi[2] = mi[3] = 0;
        out.push_back(mi);
    }
    return out;
}

}  // namespace

TEST(DiscreteSpace, Dimensions)
{
    EXPECT_EQ(hats2().size(), 4u);
    const KnotVector q({0, 0, 0, 1, 1, 1}, 2);
    EXPECT_EQ(DiscreteSpace({q, q, q}).size(), 27u);
    EXPECT_THROW(DiscreteSpace({q}), std::invalid_argument);
    EXPECT_THROW(DiscreteSpace({q, q}, std::vector<double>(8, 1.0)), std::invalid_argument);
    EXPECT_THROW(DiscreteSpace({q, q}, std::vector<double>{1, 1, 1, 1, 0, 1, 1, 1, 1}), std::invalid_argument);
}

TEST(DiscreteSpace, FlatIndexRoundTrip)
{
    const DiscreteSpace s({KnotVector::open_uniform(1, 3), KnotVector::open_uniform(2, 2), KnotVector::open_uniform(1, 1)});
    for (std::size_t f = 0; f < s.size(); ++f) EXPECT_EQ(s.flat_index(s.multi_index(f)), f);
    EXPECT_EQ(s.flat_index({1, 0, 0, 0}), 1u);
    EXPECT_EQ(s.flat_index({0, 1, 0, 0}), 4u);
}

TEST(DiscreteSpace, HatProductValuesAndGradient)
{
    const double xi[] = {0.5, 0.5};
    const auto bp = hats2().evaluate(xi, 1);
    ASSERT_EQ(bp.size(), 4u);
    for (std::size_t a = 0; a < 4; ++a) EXPECT_DOUBLE_EQ(bp.values[Eigen::Index(a)], 0.25);
    EXPECT_EQ(bp.indices[0], 0u);
    EXPECT_DOUBLE_EQ(bp.gradients(0, 0), -0.5);
    EXPECT_DOUBLE_EQ(bp.gradients(1, 0), -0.5);
}

TEST(DiscreteSpace, TensorProductOfUnivariate)
{
    const KnotVector a({0, 0, 0, 0.4, 1, 1, 1}, 2), b({0, 0, 0, 0, 0.5, 1, 1, 1, 1}, 3);
    const DiscreteSpace s({a, b});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double xi[] = {u(rng), u(rng)};
        const auto bp = s.evaluate(xi, 2);
        const auto ra = eval_basis(a, xi[0], 2), rb = eval_basis(b, xi[1], 2);
        for (std::size_t c = 0; c < bp.size(); ++c) {
            const auto mi = s.multi_index(bp.indices[c]);
            const auto i = std::size_t(mi[0] - ra.first_index()), j = std::size_t(mi[1] - rb.first_index());
            const auto col = Eigen::Index(c);
            EXPECT_NEAR(bp.values[col], ra.ders[0][i] * rb.ders[0][j], 1e-14);
            EXPECT_NEAR(bp.gradients(0, col), ra.ders[1][i] * rb.ders[0][j], 1e-13);
            EXPECT_NEAR(bp.gradients(1, col), ra.ders[0][i] * rb.ders[1][j], 1e-13);
            EXPECT_NEAR(bp.hessian(c)(0, 1), ra.ders[1][i] * rb.ders[1][j], 1e-12);
            EXPECT_NEAR(bp.hessian(c)(1, 0), ra.ders[1][i] * rb.ders[1][j], 1e-12);
            EXPECT_NEAR(bp.hessian(c)(1, 1), ra.ders[0][i] * rb.ders[2][j], 1e-11);
        }
    }
}

TEST(DiscreteSpace, ConstantWeightsCancel)
{
    const KnotVector q({0, 0, 0, 0.5, 1, 1, 1}, 2);
    const DiscreteSpace plain({q, q});
    const DiscreteSpace rational({q, q}, std::vector<double>(plain.size(), 2.0));
    EXPECT_TRUE(rational.is_rational());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double xi[] = {u(rng), u(rng)};
        const auto p = plain.evaluate(xi, 2), r = rational.evaluate(xi, 2);
        EXPECT_LT((p.values - r.values).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((p.gradients - r.gradients).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((p.hessians - r.hessians).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(DiscreteSpace, RationalPartitionOfUnityAndFiniteDifferences)
{
    const KnotVector q({0, 0, 0, 1, 1, 1}, 2);
    std::vector<double> w{1, 0.7, 1, 1.3, 0.5, 2, 1, 0.9, 1.1};
    const DiscreteSpace s({q, q}, w);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const double eps = 1e-6;
    for (int k = 0; k < 50; ++k) {
        const double xi[] = {u(rng), u(rng)};
        const auto bp = s.evaluate(xi, 2);
        EXPECT_NEAR(bp.values.sum(), 1.0, 1e-14);
        EXPECT_NEAR(bp.gradients.rowwise().sum().norm(), 0.0, 1e-12);
        for (int dir = 0; dir < 2; ++dir) {
            double xp[] = {xi[0], xi[1]}, xm[] = {xi[0], xi[1]};
            xp[dir] += eps;
            xm[dir] -= eps;
            const auto bpp = s.evaluate(xp, 1), bpm = s.evaluate(xm, 1);
            const Eigen::VectorXd fd = (bpp.values - bpm.values) / (2 * eps);
            EXPECT_LT((fd - bp.gradients.row(dir).transpose()).cwiseAbs().maxCoeff(), 1e-7);
            for (int e = 0; e < 2; ++e) {
                const Eigen::VectorXd fd2 = (bpp.gradients.row(e) - bpm.gradients.row(e)).transpose() / (2 * eps);
                EXPECT_LT((fd2 - bp.hessians.row(e + 2 * dir).transpose()).cwiseAbs().maxCoeff(), 1e-6);
            }
        }
    }
}

TEST(DiscreteSpace, RefinedDoublesElements)
{
    const auto s = hats2().refined();
    EXPECT_EQ(s.size(), 9u);
    const DiscreteSpace r({KnotVector({0, 0, 1, 1}, 1), KnotVector({0, 0, 1, 1}, 1)}, std::vector<double>(4, 1.0));
    EXPECT_THROW((void)r.refined(), std::logic_error);
}

TEST(DofMap, ThreeByThreeExample)
{
    const KnotVector k({0, 0, 0.5, 1, 1}, 1);
    const DiscreteSpace s({k, k});
    const DofMap m = classify_dirichlet(s);
    const std::vector<MultiIndex> dir{{1, 1}, {2, 1}, {3, 1}, {1, 2}, {3, 2}, {1, 3}, {3, 3}};
    const std::vector<MultiIndex> fr{{2, 2}, {2, 3}};
    EXPECT_EQ(as_one_based(s, m.dirichlet_dofs()), dir);
    EXPECT_EQ(as_one_based(s, m.free_dofs()), fr);
    EXPECT_EQ(m.num_free() + m.num_dirichlet(), s.size());
    for (std::size_t f = 0; f < s.size(); ++f) {
        EXPECT_NE(m.free_position(f) < 0, m.dirichlet_position(f) < 0);
    }
}

TEST(DofMap, SmallCases)
{
    EXPECT_EQ(DofMap(hats2()).num_free(), 0u);
    const KnotVector q({0, 0, 0, 1, 1, 1}, 2);
    EXPECT_EQ(DofMap(DiscreteSpace({q, q, q})).num_free(), 2u);
    const DofMap m(DiscreteSpace({q, q, q}));
    for (auto f : m.free_dofs()) EXPECT_EQ(DiscreteSpace({q, q, q}).multi_index(f)[0], 1);
}
