#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "infsup_lab/errors.hpp"
#include "infsup_lab/linalg/csr.hpp"
#include "infsup_lab/linalg/dense.hpp"
#include "infsup_lab/linalg/factor.hpp"

namespace infsup_lab::linalg {

/// Systems up to this many unknowns go through the dense LU; larger ones through sparse LU.
inline constexpr std::size_t kDenseSolveLimit = 1200;

inline Vector sparse_lu_solve(const CsrMatrix& a, std::span<const double> b)
{
    if (a.rows != a.cols) throw DimensionMismatch("sparse_lu_solve: matrix is not square");
    if (b.size() != a.rows) throw DimensionMismatch("sparse_lu_solve: rhs length mismatch");
    using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor>;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(a.nnz());
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
            t.emplace_back(static_cast<int>(i), static_cast<int>(a.col_idx[k]), a.values[k]);
    SpMat m(static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.cols));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();

    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(m);
    lu.factorize(m);
    if (lu.info() != Eigen::Success) throw SingularMatrix("sparse_lu_solve: " + lu.lastErrorMessage());
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw SingularMatrix("sparse_lu_solve: solve failed");
    return Vector(x.data(), x.data() + x.size());
}

/// Solves a·x = b, dense LU for small systems and sparse LU above kDenseSolveLimit.
inline Vector solve(const CsrMatrix& a, std::span<const double> b, std::size_t dense_limit = kDenseSolveLimit)
{
    if (a.rows <= dense_limit) return lu_solve(a.to_dense(), b);
    return sparse_lu_solve(a, b);
}

/// ‖a·x − b‖ / (‖a‖_F·‖x‖ + ‖b‖)
inline double relative_residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b)
{
    auto r = a.multiply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    const double denom = frobenius_norm(a) * norm2(x) + norm2(b);
    return denom == 0.0 ? 0.0 : norm2(r) / denom;
}

} // namespace infsup_lab::linalg
