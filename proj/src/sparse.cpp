#include "stiga/linsolve.hpp"

#include <algorithm>
#include <stdexcept>

namespace stiga {

SparseMatrix::SparseMatrix(std::size_t n, std::vector<std::size_t> offsets, std::vector<std::size_t> columns,
                           std::vector<double> values)
    : n_(n), offsets_(std::move(offsets)), columns_(std::move(columns)), values_(std::move(values))
{
    if (!valid()) throw std::invalid_argument("sparse matrix: inconsistent compressed-row layout");
}

bool SparseMatrix::valid() const
{
    if (offsets_.size() != n_ + 1 || offsets_.front() != 0 || offsets_.back() != columns_.size() ||
        columns_.size() != values_.size()) {
        return false;
    }
    for (std::size_t r = 0; r < n_; ++r) {
        if (offsets_[r] > offsets_[r + 1]) return false;
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            if (columns_[k] >= n_) return false;
            if (k > offsets_[r] && columns_[k] <= columns_[k - 1]) return false;
        }
    }
    return true;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::vector<Triplet> triplets)
{
    for (const auto& t : triplets) {
        if (t.row >= n || t.col >= n) throw std::invalid_argument("from_triplets: index out of range");
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> offsets(n + 1, 0), cols;
    std::vector<double> vals;
    for (std::size_t k = 0; k < triplets.size();) {
        std::size_t j = k;
        double sum = 0.0;
        while (j < triplets.size() && triplets[j].row == triplets[k].row && triplets[j].col == triplets[k].col) {
            sum += triplets[j].value;
            ++j;
        }
        cols.push_back(triplets[k].col);
        vals.push_back(sum);
        ++offsets[triplets[k].row + 1];
        k = j;
    }
    for (std::size_t r = 0; r < n; ++r) offsets[r + 1] += offsets[r];
    return SparseMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n)
{
    std::vector<std::size_t> offsets(n + 1), cols(n);
    for (std::size_t i = 0; i <= n; ++i) offsets[i] = i;
    for (std::size_t i = 0; i < n; ++i) cols[i] = i;
    return SparseMatrix(n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

std::size_t SparseMatrix::find(std::size_t r, std::size_t c) const
{
    const auto begin = columns_.begin() + std::ptrdiff_t(offsets_[r]);
    const auto end = columns_.begin() + std::ptrdiff_t(offsets_[r + 1]);
    const auto it = std::lower_bound(begin, end, c);
    return (it != end && *it == c) ? std::size_t(it - columns_.begin()) : npos;
}

double SparseMatrix::coeff(std::size_t r, std::size_t c) const
{
    const auto k = find(r, c);
    return k == npos ? 0.0 : values_[k];
}

Eigen::VectorXd SparseMatrix::diagonal() const
{
    Eigen::VectorXd d{Eigen::Index(n_)};
    for (std::size_t r = 0; r < n_; ++r) d[Eigen::Index(r)] = coeff(r, r);
    return d;
}

SparseMatrix SparseMatrix::extract(std::span<const std::size_t> keep_rows, std::span<const long> col_map,
                                   std::size_t new_cols) const
{
    if (keep_rows.size() != new_cols) throw std::invalid_argument("extract: result must be square");
    std::vector<std::size_t> offsets{0}, cols;
    std::vector<double> vals;
    offsets.reserve(keep_rows.size() + 1);
    for (std::size_t r : keep_rows) {
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            const long c = col_map[columns_[k]];
            if (c < 0) continue;
            cols.push_back(std::size_t(c));
            vals.push_back(values_[k]);
        }
        offsets.push_back(cols.size());
    }
    // col_map is monotone on the kept set, so columns stay sorted.
    return SparseMatrix(new_cols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::plus(const SparseMatrix& other, double scale) const
{
    if (other.offsets_ != offsets_ || other.columns_ != columns_) {
        throw std::invalid_argument("plus: sparsity patterns differ");
    }
    SparseMatrix out = *this;
    for (std::size_t k = 0; k < values_.size(); ++k) out.values_[k] += scale * other.values_[k];
    return out;
}

Eigen::MatrixXd SparseMatrix::to_dense() const
{
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(Eigen::Index(n_), Eigen::Index(n_));
    for (std::size_t r = 0; r < n_; ++r) {
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            D(Eigen::Index(r), Eigen::Index(columns_[k])) += values_[k];
        }
    }
    return D;
}

Eigen::MatrixXd SparseMatrix::symmetric_part_dense() const
{
    const Eigen::MatrixXd D = to_dense();
    return 0.5 * (D + D.transpose());
}

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const
{
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(values_.size());
    for (std::size_t r = 0; r < n_; ++r) {
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            t.emplace_back(int(r), int(columns_[k]), values_[k]);
        }
    }
    Eigen::SparseMatrix<double> out{Eigen::Index(n_), Eigen::Index(n_)};
    out.setFromTriplets(t.begin(), t.end());
    out.makeCompressed();
    return out;
}

Eigen::VectorXd matvec(const SparseMatrix& A, const Eigen::VectorXd& x)
{
    if (std::size_t(x.size()) != A.size()) throw std::invalid_argument("matvec: dimension mismatch");
    Eigen::VectorXd y(x.size());
    const auto off = A.offsets();
    const auto cols = A.columns();
    const auto vals = A.values();
    for (std::size_t r = 0; r < A.size(); ++r) {
        double s = 0.0;
        for (std::size_t k = off[r]; k < off[r + 1]; ++k) s += vals[k] * x[Eigen::Index(cols[k])];
        y[Eigen::Index(r)] = s;
    }
    return y;
}

double quadratic_form(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& y)
{
    return x.dot(matvec(A, y));
}

}  // namespace stiga
