#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stiga {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Square compressed-row matrix with strictly increasing columns per row.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t n, std::vector<std::size_t> offsets, std::vector<std::size_t> columns,
                 std::vector<double> values);

    /// Sums duplicates; the result keeps explicit zeros that came from triplets.
    static SparseMatrix from_triplets(std::size_t n, std::vector<Triplet> triplets);
    static SparseMatrix identity(std::size_t n);

    std::size_t size() const { return n_; }
    std::size_t nnz() const { return values_.size(); }
    std::span<const std::size_t> offsets() const { return offsets_; }
    std::span<const std::size_t> columns() const { return columns_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    std::span<const std::size_t> row_columns(std::size_t r) const
    {
        return std::span<const std::size_t>(columns_).subspan(offsets_[r], offsets_[r + 1] - offsets_[r]);
    }

    /// Position of (r, c) in values(), or npos.
    std::size_t find(std::size_t r, std::size_t c) const;
    double coeff(std::size_t r, std::size_t c) const;
    static constexpr std::size_t npos = std::size_t(-1);

    Eigen::VectorXd diagonal() const;
    /// Submatrix with rows `keep_rows` and columns `keep_cols`; `col_map[c]` gives
    /// the new column of c or -1.
    SparseMatrix extract(std::span<const std::size_t> keep_rows, std::span<const long> col_map,
                         std::size_t new_cols) const;

    /// A + scale * B on identical patterns.
    SparseMatrix plus(const SparseMatrix& other, double scale) const;
    /// (A + A^T) / 2 as a dense matrix (test-size systems only).
    Eigen::MatrixXd symmetric_part_dense() const;
    Eigen::MatrixXd to_dense() const;
    Eigen::SparseMatrix<double> to_eigen() const;

    bool valid() const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::size_t> columns_;
    std::vector<double> values_;
};

/// y = A x. Throws std::invalid_argument on size mismatch.
Eigen::VectorXd matvec(const SparseMatrix& A, const Eigen::VectorXd& x);

/// x^T A y.
double quadratic_form(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct SolveReport {
    std::string method;
    int iterations = 0;
    double residual = 0.0;  // ||b - A x|| / ||b||
    double seconds = 0.0;
    bool converged = false;
    std::vector<double> restart_residuals;  // relative residual at the end of each GMRES cycle
};

struct SolveResult {
    Eigen::VectorXd x;
    SolveReport report;
};

/// Thrown when a factorization detects singularity.
class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b);

/// Sparse LU solve.
SolveResult solve_direct(const SparseMatrix& A, const Eigen::VectorXd& b);

enum class Preconditioner { none, diagonal };

struct GmresOptions {
    int restart = 50;
    double tol = 1e-10;
    int max_iter = 5000;
    Preconditioner precond = Preconditioner::diagonal;
};

/// Restarted right-preconditioned GMRES. Stops when ||b - A x|| <= tol ||b||.
SolveResult solve_gmres(const SparseMatrix& A, const Eigen::VectorXd& b, const GmresOptions& opts = {});

}  // namespace stiga
