#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "infsup_lab/errors.hpp"
#include "infsup_lab/linalg/dense.hpp"

namespace infsup_lab::linalg {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing within a row.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    std::size_t nnz() const noexcept { return values.size(); }

    /// Entry lookup by binary search; zero when not stored.
    double at(std::size_t i, std::size_t j) const
    {
        auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
        auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
        auto it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return 0.0;
        return values[static_cast<std::size_t>(it - col_idx.begin())];
    }

    Vector multiply(std::span<const double> x) const
    {
        if (x.size() != cols) throw DimensionMismatch("CsrMatrix::multiply: size mismatch");
        Vector y(rows, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            double s = 0.0;
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += values[k] * x[col_idx[k]];
            y[i] = s;
        }
        return y;
    }

    /// y = Aᵀ·x
    Vector multiply_transposed(std::span<const double> x) const
    {
        if (x.size() != rows) throw DimensionMismatch("CsrMatrix::multiply_transposed: size mismatch");
        Vector y(cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) y[col_idx[k]] += values[k] * x[i];
        return y;
    }

    DenseMatrix to_dense() const
    {
        DenseMatrix d(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) d(i, col_idx[k]) = values[k];
        return d;
    }

    std::vector<Triplet> triplets() const
    {
        std::vector<Triplet> t;
        t.reserve(nnz());
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) t.push_back({i, col_idx[k], values[k]});
        return t;
    }

    double quadratic_form(std::span<const double> x) const { return dot(x, multiply(x)); }
};

/// Builds a CSR matrix, summing duplicate (i,j) entries.
inline CsrMatrix csr_from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
{
    for (const auto& t : entries)
        if (t.row >= rows || t.col >= cols)
            throw IndexOutOfRange("csr_from_triplets: (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                                  ") outside " + std::to_string(rows) + "x" + std::to_string(cols));

    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    for (std::size_t k = 0; k < entries.size();) {
        const auto [i, j, v0] = entries[k];
        double v = v0;
        std::size_t l = k + 1;
        while (l < entries.size() && entries[l].row == i && entries[l].col == j) v += entries[l++].value;
        m.col_idx.push_back(j);
        m.values.push_back(v);
        ++m.row_ptr[i + 1];
        k = l;
    }
    for (std::size_t i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    return m;
}

inline CsrMatrix transpose(const CsrMatrix& a)
{
    std::vector<Triplet> t;
    t.reserve(a.nnz());
    for (const auto& e : a.triplets()) t.push_back({e.col, e.row, e.value});
    return csr_from_triplets(a.cols, a.rows, std::move(t));
}

/// alpha·a + beta·b
inline CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha = 1.0, double beta = 1.0)
{
    if (a.rows != b.rows || a.cols != b.cols) throw DimensionMismatch("add: shape mismatch");
    std::vector<Triplet> t;
    t.reserve(a.nnz() + b.nnz());
    for (auto e : a.triplets()) t.push_back({e.row, e.col, alpha * e.value});
    for (auto e : b.triplets()) t.push_back({e.row, e.col, beta * e.value});
    return csr_from_triplets(a.rows, a.cols, std::move(t));
}

inline CsrMatrix scaled(CsrMatrix a, double s)
{
    for (auto& v : a.values) v *= s;
    return a;
}

inline CsrMatrix empty_csr(std::size_t rows, std::size_t cols) { return csr_from_triplets(rows, cols, {}); }

inline CsrMatrix diagonal_csr(std::span<const double> d)
{
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
    return csr_from_triplets(d.size(), d.size(), std::move(t));
}

/// a·b for sparse operands.
inline CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b)
{
    if (a.cols != b.rows) throw DimensionMismatch("multiply: inner dimensions differ");
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const std::size_t r = a.col_idx[k];
            for (std::size_t l = b.row_ptr[r]; l < b.row_ptr[r + 1]; ++l)
                t.push_back({i, b.col_idx[l], a.values[k] * b.values[l]});
        }
    return csr_from_triplets(a.rows, b.cols, std::move(t));
}

inline double frobenius_norm(const CsrMatrix& a)
{
    double s = 0.0;
    for (double v : a.values) s += v * v;
    return std::sqrt(s);
}

/// ‖a − aᵀ‖_F / ‖a‖_F, zero for the zero matrix.
inline double symmetry_defect(const CsrMatrix& a)
{
    const double n = frobenius_norm(a);
    if (n == 0.0) return 0.0;
    return frobenius_norm(add(a, transpose(a), 1.0, -1.0)) / n;
}

/// Keeps the listed rows and columns, renumbered in the given order.
inline CsrMatrix extract(const CsrMatrix& a, std::span<const std::size_t> rows, std::span<const std::size_t> cols)
{
    std::vector<std::ptrdiff_t> col_map(a.cols, -1);
    for (std::size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = static_cast<std::ptrdiff_t>(j);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k)
            if (col_map[a.col_idx[k]] >= 0) t.push_back({i, static_cast<std::size_t>(col_map[a.col_idx[k]]), a.values[k]});
    }
    return csr_from_triplets(rows.size(), cols.size(), std::move(t));
}

} // namespace infsup_lab::linalg
