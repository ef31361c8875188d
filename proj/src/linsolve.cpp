#include "stiga/linsolve.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>

namespace stiga {

namespace {

double elapsed_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b)
{
    const double nb = b.norm();
    const double nr = (b - matvec(A, x)).norm();
    return nb > 0.0 ? nr / nb : nr;
}

SolveResult solve_direct(const SparseMatrix& A, const Eigen::VectorXd& b)
{
    if (std::size_t(b.size()) != A.size()) throw std::invalid_argument("solve_direct: dimension mismatch");
    const auto start = std::chrono::steady_clock::now();
    SolveResult out;
    out.report.method = "direct";
    if (A.size() == 0) {
        out.x = Eigen::VectorXd(0);
        out.report.converged = true;
        return out;
    }
    const Eigen::SparseMatrix<double> M = A.to_eigen();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success) {
        throw SingularMatrixError("solve_direct: factorization failed (matrix is singular)");
    }
    out.x = lu.solve(b);
    if (lu.info() != Eigen::Success || !out.x.allFinite()) {
        throw SingularMatrixError("solve_direct: solve failed (matrix is numerically singular)");
    }
    // One step of iterative refinement.
    const Eigen::VectorXd r = b - matvec(A, out.x);
    out.x += lu.solve(r);
    out.report.residual = relative_residual(A, out.x, b);
    out.report.converged = true;
    out.report.seconds = elapsed_since(start);
    return out;
}

SolveResult solve_gmres(const SparseMatrix& A, const Eigen::VectorXd& b, const GmresOptions& opts)
{
    const auto n = Eigen::Index(A.size());
    if (b.size() != n) throw std::invalid_argument("solve_gmres: dimension mismatch");
    if (opts.restart < 1 || opts.max_iter < 0 || !(opts.tol > 0.0)) {
        throw std::invalid_argument("solve_gmres: invalid options");
    }
    const auto start = std::chrono::steady_clock::now();
    SolveResult out;
    out.report.method = "gmres";
    out.x = Eigen::VectorXd::Zero(n);

    Eigen::VectorXd inv_diag = Eigen::VectorXd::Ones(n);
    if (opts.precond == Preconditioner::diagonal) {
        const Eigen::VectorXd d = A.diagonal();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d[i] == 0.0) throw std::invalid_argument("solve_gmres: zero diagonal entry with diagonal preconditioning");
            inv_diag[i] = 1.0 / d[i];
        }
    }

    const double nb = b.norm();
    if (nb == 0.0) {
        out.report.converged = true;
        return out;
    }
    const int m = opts.restart;
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd cs(m), sn(m), g(m + 1);

    Eigen::VectorXd r = b;
    double beta = r.norm();
    int total = 0;
    while (true) {
        if (beta <= opts.tol * nb) {
            out.report.converged = true;
            break;
        }
        if (total >= opts.max_iter) break;

        V.col(0) = r / beta;
        H.setZero();
        g.setZero();
        g[0] = beta;
        int k = 0;
        bool breakdown = false;
        for (; k < m && total < opts.max_iter; ++k, ++total) {
            Eigen::VectorXd w = matvec(A, inv_diag.cwiseProduct(V.col(k)));
            for (int j = 0; j <= k; ++j) {
                H(j, k) = w.dot(V.col(j));
                w -= H(j, k) * V.col(j);
            }
            H(k + 1, k) = w.norm();
            breakdown = H(k + 1, k) <= 1e-14 * H.col(k).head(k + 1).norm();
            if (!breakdown) V.col(k + 1) = w / H(k + 1, k);
            for (int j = 0; j < k; ++j) {
                const double t = cs[j] * H(j, k) + sn[j] * H(j + 1, k);
                H(j + 1, k) = -sn[j] * H(j, k) + cs[j] * H(j + 1, k);
                H(j, k) = t;
            }
            const double rho = std::hypot(H(k, k), H(k + 1, k));
            cs[k] = H(k, k) / rho;
            sn[k] = H(k + 1, k) / rho;
            H(k, k) = rho;
            H(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            if (breakdown || std::abs(g[k + 1]) <= opts.tol * nb) {
                ++k;
                ++total;
                break;
            }
        }
        if (k > 0) {
            const Eigen::VectorXd y =
                H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
            out.x += inv_diag.cwiseProduct(V.leftCols(k) * y);
        }
        r = b - matvec(A, out.x);
        beta = r.norm();
        out.report.restart_residuals.push_back(beta / nb);
        if (breakdown && beta > opts.tol * nb) break;
    }
    out.report.iterations = total;
    out.report.residual = relative_residual(A, out.x, b);
    out.report.converged = out.report.residual <= opts.tol;
    out.report.seconds = elapsed_since(start);
    return out;
}

}  // namespace stiga
