#include "stiga/linsolve.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <random>

using namespace stiga;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& A)
{
    std::vector<Triplet> t;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            if (A(i, j) != 0.0) t.push_back({std::size_t(i), std::size_t(j), A(i, j)});
        }
    }
    return SparseMatrix::from_triplets(std::size_t(A.rows()), std::move(t));
}

// 1D Laplacian plus a skew convection part.
SparseMatrix convection_diffusion(int n)
{
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
        const auto I = std::size_t(i);
        t.push_back({I, I, 2.0});
        if (i > 0) t.push_back({I, I - 1, -1.3});
        if (i + 1 < n) t.push_back({I, I + 1, -0.7});
    }
    return SparseMatrix::from_triplets(std::size_t(n), std::move(t));
}

}  // namespace

TEST(SparseMatrix, TripletsSumDuplicates)
{
    const auto A = SparseMatrix::from_triplets(3, {{0, 0, 1.0}, {2, 1, 4.0}, {0, 0, 2.0}, {1, 2, 0.0}, {0, 2, -1.0}});
    EXPECT_TRUE(A.valid());
    EXPECT_EQ(A.nnz(), 4u);
    EXPECT_EQ(A.coeff(0, 0), 3.0);
    EXPECT_EQ(A.coeff(0, 2), -1.0);
    EXPECT_EQ(A.coeff(2, 1), 4.0);
    EXPECT_EQ(A.coeff(1, 1), 0.0);
    EXPECT_NE(A.find(1, 2), SparseMatrix::npos);
    EXPECT_EQ(A.find(1, 1), SparseMatrix::npos);
    EXPECT_THROW(SparseMatrix::from_triplets(2, {{2, 0, 1.0}}), std::invalid_argument);
}

TEST(SparseMatrix, MatvecAndQuadraticForm)
{
    Eigen::MatrixXd D(3, 3);
    D << 1, 2, 0, 0, 3, -1, 4, 0, 5;
    const auto A = from_dense(D);
    const Eigen::Vector3d x(1, -2, 0.5);
    EXPECT_LT((matvec(A, x) - D * x).norm(), 1e-15);
    EXPECT_NEAR(quadratic_form(A, x, x), x.dot(D * x), 1e-14);
    EXPECT_LT((A.to_dense() - D).norm(), 1e-15);
    EXPECT_LT((A.symmetric_part_dense() - 0.5 * (D + D.transpose())).norm(), 1e-15);
    EXPECT_LT((A.diagonal() - D.diagonal()).norm(), 1e-15);
    EXPECT_THROW(matvec(A, Eigen::VectorXd::Zero(2)), std::invalid_argument);
    EXPECT_LT((Eigen::MatrixXd(A.to_eigen()) - D).norm(), 1e-15);
}

TEST(SparseMatrix, Extract)
{
    Eigen::MatrixXd D(3, 3);
    D << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    const auto A = from_dense(D);
    const std::size_t rows[] = {0, 2};
    const long col_map[] = {0, -1, 1};
    const auto B = A.extract(rows, col_map, 2);
    EXPECT_EQ(B.coeff(0, 0), 1.0);
    EXPECT_EQ(B.coeff(0, 1), 3.0);
    EXPECT_EQ(B.coeff(1, 0), 7.0);
    EXPECT_EQ(B.coeff(1, 1), 9.0);
}

TEST(DirectSolver, TwoByTwo)
{
    Eigen::MatrixXd D(2, 2);
    D << 2, 1, 1, 3;
    const auto r = solve_direct(from_dense(D), Eigen::Vector2d(3, 5));
    EXPECT_NEAR(r.x[0], 0.8, 1e-14);
    EXPECT_NEAR(r.x[1], 1.4, 1e-14);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LT(r.report.residual, 1e-14);
}

TEST(DirectSolver, MatchesDenseOracle)
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    const int n = 40;
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = (std::abs(i - j) <= 3) ? g(rng) : 0.0;
    M += 10.0 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = g(rng);
    const auto r = solve_direct(from_dense(M), b);
    const Eigen::VectorXd ref = M.lu().solve(b);
    EXPECT_LT((r.x - ref).norm() / ref.norm(), 1e-12);
}

TEST(DirectSolver, SingularThrows)
{
    Eigen::MatrixXd D(2, 2);
    D << 1, 2, 2, 4;
    EXPECT_THROW(solve_direct(from_dense(D), Eigen::Vector2d(1, 1)), SingularMatrixError);
}

TEST(Gmres, DiagonalConvergesInOneIteration)
{
    const auto A = from_dense(Eigen::Vector3d(2, 5, 0.25).asDiagonal().toDenseMatrix());
    const auto r = solve_gmres(A, Eigen::Vector3d(1, 1, 1));
    EXPECT_TRUE(r.report.converged);
    EXPECT_EQ(r.report.iterations, 1);
    EXPECT_NEAR(r.x[2], 4.0, 1e-12);
}

TEST(Gmres, IdentityPlusRankOne)
{
    const int n = 30;
    Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(n, 0.1, 1.0);
    const Eigen::MatrixXd D = Eigen::MatrixXd::Identity(n, n) + u * u.transpose();
    GmresOptions opts;
    opts.precond = Preconditioner::none;
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
    const auto r = solve_gmres(from_dense(D), b, opts);
    EXPECT_TRUE(r.report.converged);
    EXPECT_LE(r.report.iterations, 2);
    EXPECT_LT((D * r.x - b).norm() / b.norm(), 1e-10);
}

TEST(Gmres, AgreesWithDirectOnNonsymmetricSystem)
{
    const auto A = convection_diffusion(200);
    const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(200, -1.0, 2.0);
    GmresOptions opts;
    opts.tol = 1e-12;
    opts.restart = 20;
    const auto g = solve_gmres(A, b, opts);
    const auto d = solve_direct(A, b);
    EXPECT_TRUE(g.report.converged);
    EXPECT_LT(relative_residual(A, g.x, b), 1e-12);
    EXPECT_LT((g.x - d.x).norm() / d.x.norm(), 1e-9);
    EXPECT_FALSE(g.report.restart_residuals.empty());
}

TEST(Gmres, ReportsNonConvergence)
{
    GmresOptions opts;
    opts.tol = 1e-14;
    opts.restart = 2;
    opts.max_iter = 4;
    const auto r = solve_gmres(convection_diffusion(200), Eigen::VectorXd::Ones(200), opts);
    EXPECT_FALSE(r.report.converged);
    EXPECT_LE(r.report.iterations, 4);
}

TEST(Gmres, ZeroRightHandSide)
{
    const auto r = solve_gmres(convection_diffusion(10), Eigen::VectorXd::Zero(10));
    EXPECT_TRUE(r.report.converged);
    EXPECT_EQ(r.x.norm(), 0.0);
}
