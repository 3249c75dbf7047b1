#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "infsup_lab/errors.hpp"
#include "infsup_lab/linalg/dense.hpp"

namespace infsup_lab::linalg {

/// B = U·Σᵀ·Vᵀ with Σ the diagonal extension of sigma.
struct SvdResult {
    DenseMatrix u;              // m×m (full) or m×p (thin)
    std::vector<double> sigma;  // p = min(m,n) values, non-increasing
    DenseMatrix v;              // n×n (full) or n×p (thin)
    double rank_tol = 0.0;      // relative to sigma[0]
    std::size_t numerical_rank = 0;

    /// Index of the smallest singular value above the rank tolerance, i.e. numerical_rank - 1.
    std::size_t smallest_positive_index() const { return numerical_rank == 0 ? 0 : numerical_rank - 1; }
};

struct SvdOptions {
    bool full = true;
    /// When negative, 1e-10·max(m,n) is used.
    double rank_tol = -1.0;
};

namespace detail {

// Extends the orthonormal rows of `basis` (each of length dim) to `target` orthonormal rows.
inline void complete_orthonormal_rows(std::vector<std::vector<double>>& basis, std::size_t dim, std::size_t target)
{
    std::vector<double> residual(dim, 1.0);
    for (const auto& q : basis)
        for (std::size_t i = 0; i < dim; ++i) residual[i] -= q[i] * q[i];

    while (basis.size() < target) {
        const auto pick = static_cast<std::size_t>(
            std::max_element(residual.begin(), residual.end()) - residual.begin());
        std::vector<double> w(dim, 0.0);
        w[pick] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) {
                const double c = dot(q, w);
                for (std::size_t i = 0; i < dim; ++i) w[i] -= c * q[i];
            }
        const double nw = norm2(w);
        for (auto& x : w) x /= nw;
        for (std::size_t i = 0; i < dim; ++i) residual[i] -= w[i] * w[i];
        residual[pick] = -1.0;
        basis.push_back(std::move(w));
    }
}

} // namespace detail

/// One-sided (Hestenes) Jacobi SVD.
///
/// Columns of the operand (or of its transpose when it is wide) are rotated
/// pairwise until every pair is orthogonal to within the convergence tolerance;
/// singular values are the final column norms.
inline SvdResult svd(const DenseMatrix& a, SvdOptions opts = {})
{
    if (!a.all_finite()) throw NonFiniteInput("svd: non-finite entry");
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    const bool transposed = m < n;
    const std::size_t len = transposed ? n : m;  // column length of the working matrix
    const std::size_t p = transposed ? m : n;    // number of working columns

    // cols[j] holds column j of the working matrix W (W = a or aᵀ).
    std::vector<std::vector<double>> cols(p, std::vector<double>(len));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (transposed) cols[i][j] = a(i, j);
            else cols[j][i] = a(i, j);
        }
    std::vector<std::vector<double>> rot(p, std::vector<double>(p, 0.0));
    for (std::size_t j = 0; j < p; ++j) rot[j][j] = 1.0;

    const double tol = std::max(1e-14, 4.0 * std::numeric_limits<double>::epsilon() * std::sqrt(double(len)));
    std::vector<double> norms(p);
    for (std::size_t j = 0; j < p; ++j) norms[j] = dot(cols[j], cols[j]);

    for (int sweep = 0; sweep < 80; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j) {
                const double alpha = norms[i];
                const double beta = norms[j];
                if (alpha == 0.0 || beta == 0.0) continue;
                const double gamma = dot(cols[i], cols[j]);
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                auto& ci = cols[i];
                auto& cj = cols[j];
                for (std::size_t k = 0; k < len; ++k) {
                    const double x = ci[k];
                    const double y = cj[k];
                    ci[k] = c * x - s * y;
                    cj[k] = s * x + c * y;
                }
                auto& ri = rot[i];
                auto& rj = rot[j];
                for (std::size_t k = 0; k < p; ++k) {
                    const double x = ri[k];
                    const double y = rj[k];
                    ri[k] = c * x - s * y;
                    rj[k] = s * x + c * y;
                }
                norms[i] = dot(ci, ci);
                norms[j] = dot(cj, cj);
            }
        if (!rotated) break;
    }

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> sig(p);
    for (std::size_t j = 0; j < p; ++j) sig[j] = std::sqrt(norms[j]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sig[x] > sig[y]; });

    SvdResult r;
    r.sigma.resize(p);
    for (std::size_t k = 0; k < p; ++k) r.sigma[k] = sig[order[k]];
    r.rank_tol = opts.rank_tol >= 0.0 ? opts.rank_tol : 1e-10 * double(std::max(m, n));
    const double cutoff = r.rank_tol * (r.sigma.empty() ? 0.0 : r.sigma[0]);
    r.numerical_rank = static_cast<std::size_t>(
        std::count_if(r.sigma.begin(), r.sigma.end(), [&](double s) { return s > cutoff && s > 0.0; }));

    // Left vectors of W: normalized rotated columns; right vectors: accumulated rotations.
    std::vector<std::vector<double>> left;
    left.reserve(len);
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    for (std::size_t k = 0; k < p; ++k) {
        const std::size_t j = order[k];
        if (sig[j] <= tiny) break;
        std::vector<double> w = cols[j];
        for (auto& x : w) x /= sig[j];
        left.push_back(std::move(w));
    }
    // exactly-zero singular directions still need unit vectors orthogonal to the rest
    detail::complete_orthonormal_rows(left, len, opts.full ? len : p);
    std::vector<std::vector<double>> right;
    right.reserve(p);
    for (std::size_t k = 0; k < p; ++k) right.push_back(rot[order[k]]);

    const std::size_t left_cols = opts.full ? len : p;
    DenseMatrix lw(len, left_cols);
    for (std::size_t k = 0; k < left_cols; ++k)
        for (std::size_t i = 0; i < len; ++i) lw(i, k) = left[k][i];
    DenseMatrix rw(p, p);
    for (std::size_t k = 0; k < p; ++k)
        for (std::size_t i = 0; i < p; ++i) rw(i, k) = right[k][i];

    if (transposed) {
        r.u = std::move(rw);
        r.v = std::move(lw);
    } else {
        r.u = std::move(lw);
        r.v = std::move(rw);
    }
    return r;
}

/// Rebuilds U·Σᵀ·Vᵀ (works for full and thin results).
inline DenseMatrix reconstruct(const SvdResult& s, std::size_t m, std::size_t n)
{
    DenseMatrix out(m, n);
    for (std::size_t k = 0; k < s.sigma.size(); ++k) {
        const double sk = s.sigma[k];
        if (sk == 0.0) continue;
        for (std::size_t i = 0; i < m; ++i) {
            const double uik = s.u(i, k) * sk;
            if (uik == 0.0) continue;
            auto oi = out.row(i);
            for (std::size_t j = 0; j < n; ++j) oi[j] += uik * s.v(j, k);
        }
    }
    return out;
}

struct SymEigResult {
    std::vector<double> values;  // descending
    DenseMatrix vectors;         // column k pairs with values[k]
};

/// Cyclic Jacobi eigensolver for symmetric matrices.
inline SymEigResult sym_eig(const DenseMatrix& input)
{
    if (!input.square()) throw DimensionMismatch("sym_eig: matrix is not square");
    if (!input.all_finite()) throw NonFiniteInput("sym_eig: non-finite entry");
    if (!is_symmetric(input, 1e-12)) throw NotSymmetric("sym_eig: matrix is not symmetric");
    const std::size_t n = input.rows();
    DenseMatrix a = input;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
    DenseMatrix q = DenseMatrix::identity(n);
    const double fro = frobenius_norm(a);

    for (int sweep = 0; sweep < 100 && fro > 0.0; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(2.0 * off) <= 1e-15 * fro) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t r = p + 1; r < n; ++r) {
                const double apr = a(p, r);
                if (std::abs(apr) <= 1e-300) continue;
                const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akr = a(k, r);
                    a(k, p) = c * akp - s * akr;
                    a(k, r) = s * akp + c * akr;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double ark = a(r, k);
                    a(p, k) = c * apk - s * ark;
                    a(r, k) = s * apk + c * ark;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double qkp = q(k, p);
                    const double qkr = q(k, r);
                    q(k, p) = c * qkp - s * qkr;
                    q(k, r) = s * qkp + c * qkr;
                }
            }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
    SymEigResult r;
    r.values.resize(n);
    r.vectors = DenseMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        r.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) r.vectors(i, k) = q(i, order[k]);
    }
    return r;
}

} // namespace infsup_lab::linalg
