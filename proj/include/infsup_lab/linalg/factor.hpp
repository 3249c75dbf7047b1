#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "infsup_lab/errors.hpp"
#include "infsup_lab/linalg/dense.hpp"

namespace infsup_lab::linalg {

/// LU factorization with partial pivoting, P·A = L·U stored in place.
class LuFactorization {
public:
    explicit LuFactorization(DenseMatrix a) : lu_(std::move(a))
    {
        if (!lu_.square()) throw DimensionMismatch("lu: matrix is not square");
        if (!lu_.all_finite()) throw NonFiniteInput("lu: non-finite entry");
        const std::size_t n = lu_.rows();
        perm_.resize(n);
        for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

        // Pivot threshold relative to the largest initial column norm.
        double max_col = 0.0;
        {
            std::vector<double> col2(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                auto r = lu_.row(i);
                for (std::size_t j = 0; j < n; ++j) col2[j] += r[j] * r[j];
            }
            for (double c : col2) max_col = std::max(max_col, std::sqrt(c));
        }
        const double tiny = 1e-14 * max_col;

        for (std::size_t k = 0; k < n; ++k) {
            std::size_t piv = k;
            double best = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i)
                if (std::abs(lu_(i, k)) > best) {
                    best = std::abs(lu_(i, k));
                    piv = i;
                }
            if (best <= tiny || best == 0.0)
                throw SingularMatrix("lu: pivot " + std::to_string(best) + " below threshold at column " +
                                     std::to_string(k));
            if (piv != k) {
                auto rk = lu_.row(k);
                auto rp = lu_.row(piv);
                for (std::size_t j = 0; j < n; ++j) std::swap(rk[j], rp[j]);
                std::swap(perm_[k], perm_[piv]);
            }
            const double inv = 1.0 / lu_(k, k);
            auto rk = lu_.row(k);
            for (std::size_t i = k + 1; i < n; ++i) {
                auto ri = lu_.row(i);
                const double l = ri[k] * inv;
                ri[k] = l;
                if (l == 0.0) continue;
                for (std::size_t j = k + 1; j < n; ++j) ri[j] -= l * rk[j];
            }
        }
    }

    std::size_t size() const noexcept { return lu_.rows(); }

    Vector solve(std::span<const double> b) const
    {
        const std::size_t n = size();
        if (b.size() != n) throw DimensionMismatch("lu_solve: rhs length mismatch");
        Vector x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
        for (std::size_t i = 0; i < n; ++i) {
            auto r = lu_.row(i);
            double s = x[i];
            for (std::size_t j = 0; j < i; ++j) s -= r[j] * x[j];
            x[i] = s;
        }
        for (std::size_t i = n; i-- > 0;) {
            auto r = lu_.row(i);
            double s = x[i];
            for (std::size_t j = i + 1; j < n; ++j) s -= r[j] * x[j];
            x[i] = s / r[i];
        }
        return x;
    }

private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
};

inline Vector lu_solve(const DenseMatrix& a, std::span<const double> b)
{
    if (a.rows() != b.size()) throw DimensionMismatch("lu_solve: rhs length mismatch");
    return LuFactorization(a).solve(b);
}

/// Lower-triangular Cholesky factor L with L·Lᵀ = a.
inline DenseMatrix cholesky(const DenseMatrix& a)
{
    if (!a.square()) throw DimensionMismatch("cholesky: matrix is not square");
    if (!a.all_finite()) throw NonFiniteInput("cholesky: non-finite entry");
    if (!is_symmetric(a, 1e-12)) throw NotSymmetric("cholesky: matrix is not symmetric");
    const std::size_t n = a.rows();
    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        auto lj = l.row(j);
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
        if (!(d > 0.0))
            throw NotPositiveDefinite("cholesky: non-positive pivot at row " + std::to_string(j));
        const double ljj = std::sqrt(d);
        lj[j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            auto li = l.row(i);
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            li[j] = s / ljj;
        }
    }
    return l;
}

/// Solves L·X = B in place for lower-triangular L; B is overwritten column-block-wise.
inline void forward_substitute(const DenseMatrix& l, DenseMatrix& b)
{
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        auto bi = b.row(i);
        auto li = l.row(i);
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = li[k];
            if (lik == 0.0) continue;
            auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) bi[j] -= lik * bk[j];
        }
        const double inv = 1.0 / li[i];
        for (auto& v : bi) v *= inv;
    }
}

/// Solves Lᵀ·X = B in place for lower-triangular L.
inline void backward_substitute_transposed(const DenseMatrix& l, DenseMatrix& b)
{
    const std::size_t n = l.rows();
    for (std::size_t i = n; i-- > 0;) {
        auto bi = b.row(i);
        const double inv = 1.0 / l(i, i);
        for (auto& v : bi) v *= inv;
        // eliminate x_i from rows k < i: row k gets -L(i,k)·x_i
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = l(i, k);
            if (lik == 0.0) continue;
            auto bk = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) bk[j] -= lik * bi[j];
        }
    }
}

} // namespace infsup_lab::linalg
