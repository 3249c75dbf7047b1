#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "infsup_lab/assembly.hpp"
#include "infsup_lab/errors.hpp"
#include "infsup_lab/fespace.hpp"
#include "infsup_lab/linalg/factor.hpp"
#include "infsup_lab/linalg/svd.hpp"
#include "infsup_lab/mesh.hpp"

namespace infsup_lab::infsup {

using linalg::DenseMatrix;

enum class NormMode { Euclidean, Weighted };

constexpr std::string_view mode_name(NormMode m) noexcept { return m == NormMode::Euclidean ? "euclidean" : "weighted"; }

inline NormMode parse_mode(std::string_view s)
{
    if (s == "euclidean") return NormMode::Euclidean;
    if (s == "weighted") return NormMode::Weighted;
    throw UnsupportedCombination("unknown norm mode '" + std::string(s) + "'");
}

enum class Pair { TaylorHood, Mini, P1P1, P1P0, P2P0 };

constexpr std::string_view pair_name(Pair p) noexcept
{
    switch (p) {
    case Pair::TaylorHood: return "th";
    case Pair::Mini: return "mini";
    case Pair::P1P1: return "p1p1";
    case Pair::P1P0: return "p1p0";
    case Pair::P2P0: return "p2p0";
    }
    return "?";
}

inline Pair parse_pair(std::string_view s)
{
    for (auto p : {Pair::TaylorHood, Pair::Mini, Pair::P1P1, Pair::P1P0, Pair::P2P0})
        if (pair_name(p) == s) return p;
    throw UnsupportedCombination("unknown element pair '" + std::string(s) + "'");
}

constexpr ElementKind velocity_kind(Pair p) noexcept
{
    switch (p) {
    case Pair::TaylorHood:
    case Pair::P2P0: return ElementKind::P2;
    case Pair::Mini: return ElementKind::P1Bubble;
    default: return ElementKind::P1;
    }
}

constexpr ElementKind pressure_kind(Pair p) noexcept
{
    return p == Pair::P1P0 || p == Pair::P2P0 ? ElementKind::P0 : ElementKind::P1;
}

struct InfSupReport {
    double beta = 0.0;
    NormMode mode = NormMode::Euclidean;
    std::vector<double> sigma;
    std::size_t numerical_rank = 0;
    std::size_t kernel_dim_pressure = 0;
    std::vector<double> worst_pressure_mode;
    /// Pressure-space basis of the numerical kernel, one column per kernel direction.
    DenseMatrix kernel_basis;
    /// Angle between the constant pressure and the kernel (M-inner product when weighted).
    double constant_kernel_angle = 0.0;
    std::string pair;
    double h = 0.0;
    double rank_tol = 0.0;
};

namespace detail {

// Angle between c and span(basis columns), all measured in the inner product given by gram (identity when empty).
inline double angle_to_span(const DenseMatrix& basis, const std::vector<double>& c, const DenseMatrix* gram)
{
    const std::size_t n = c.size();
    const auto apply = [&](const std::vector<double>& x) { return gram ? linalg::matvec(*gram, x) : x; };
    const auto gc = apply(c);
    const double cc = linalg::dot(c, gc);
    if (cc == 0.0 || basis.cols() == 0) return std::acos(0.0);
    // basis columns are orthonormal in the chosen inner product
    std::vector<double> res = c;
    for (std::size_t k = 0; k < basis.cols(); ++k) {
        double ck = 0.0;
        for (std::size_t i = 0; i < n; ++i) ck += basis(i, k) * gc[i];
        for (std::size_t i = 0; i < n; ++i) res[i] -= ck * basis(i, k);
    }
    // sine from the residual norm keeps precision for tiny angles
    const double sine = std::sqrt(std::max(0.0, linalg::dot(res, apply(res))) / cc);
    return std::asin(std::min(1.0, sine));
}

inline InfSupReport from_svd(const linalg::SvdResult& s, std::size_t n_p)
{
    InfSupReport r;
    r.sigma = s.sigma;
    r.numerical_rank = s.numerical_rank;
    r.rank_tol = s.rank_tol;
    r.beta = s.numerical_rank == 0 ? 0.0 : s.sigma[s.numerical_rank - 1];
    r.kernel_dim_pressure = n_p - s.numerical_rank;
    r.worst_pressure_mode.assign(n_p, 0.0);
    if (s.numerical_rank > 0)
        for (std::size_t i = 0; i < n_p; ++i) r.worst_pressure_mode[i] = s.u(i, s.numerical_rank - 1);
    r.kernel_basis = DenseMatrix(n_p, r.kernel_dim_pressure);
    for (std::size_t k = 0; k < r.kernel_dim_pressure; ++k)
        for (std::size_t i = 0; i < n_p; ++i) r.kernel_basis(i, k) = s.u(i, s.numerical_rank + k);
    return r;
}

inline linalg::SvdOptions options_for(const DenseMatrix& b, double rank_tol)
{
    // the pressure-side factor must be square to expose the kernel
    return {b.rows() > b.cols(), rank_tol};
}

} // namespace detail

/// β = σ_r of B (pressure rows, free velocity columns) in Euclidean norms.
inline InfSupReport infsup_euclidean(const DenseMatrix& b, double rank_tol = -1.0)
{
    const auto s = linalg::svd(b, detail::options_for(b, rank_tol));
    auto r = detail::from_svd(s, b.rows());
    r.mode = NormMode::Euclidean;
    r.constant_kernel_angle = detail::angle_to_span(r.kernel_basis, std::vector<double>(b.rows(), 1.0), nullptr);
    return r;
}

/// β = σ_r of R⁻¹·B·L⁻ᵀ with X = L·Lᵀ (velocity norm) and M = R·Rᵀ (pressure norm).
inline InfSupReport infsup_weighted(const DenseMatrix& b, const DenseMatrix& x_norm, const DenseMatrix& m_norm,
                                    double rank_tol = -1.0)
{
    if (x_norm.rows() != b.cols() || m_norm.rows() != b.rows())
        throw DimensionMismatch("infsup_weighted: norm matrices do not match B");
    const auto l = linalg::cholesky(x_norm);
    const auto rr = linalg::cholesky(m_norm);
    DenseMatrix w = b.transposed();  // n_v × n_p
    linalg::forward_substitute(l, w);  // L⁻¹·Bᵀ
    w = w.transposed();                // B·L⁻ᵀ
    linalg::forward_substitute(rr, w); // R⁻¹·B·L⁻ᵀ
    const auto s = linalg::svd(w, detail::options_for(w, rank_tol));
    auto r = detail::from_svd(s, b.rows());
    r.mode = NormMode::Weighted;

    // back to pressure coordinates: q = R⁻ᵀ·u
    DenseMatrix modes(b.rows(), 1 + r.kernel_dim_pressure);
    for (std::size_t i = 0; i < b.rows(); ++i) {
        modes(i, 0) = r.worst_pressure_mode[i];
        for (std::size_t k = 0; k < r.kernel_dim_pressure; ++k) modes(i, 1 + k) = r.kernel_basis(i, k);
    }
    linalg::backward_substitute_transposed(rr, modes);
    for (std::size_t i = 0; i < b.rows(); ++i) {
        r.worst_pressure_mode[i] = modes(i, 0);
        for (std::size_t k = 0; k < r.kernel_dim_pressure; ++k) r.kernel_basis(i, k) = modes(i, 1 + k);
    }
    r.constant_kernel_angle = detail::angle_to_span(r.kernel_basis, std::vector<double>(b.rows(), 1.0), &m_norm);
    return r;
}

/// Dense operators of a velocity/pressure pair with the velocity restricted to free dofs.
struct PairOperators {
    DenseMatrix b;       // n_p × n_free
    DenseMatrix x_norm;  // vector stiffness on free dofs
    DenseMatrix m_norm;  // pressure mass
    std::vector<std::size_t> free_dofs;
};

inline PairOperators pair_operators(Pair pair, const Mesh& mesh)
{
    const FeSpace vs(mesh, velocity_kind(pair), 2);
    const FeSpace ps(mesh, pressure_kind(pair), 1);
    PairOperators op;
    op.free_dofs = vs.free_dofs();
    std::vector<std::size_t> all_p(ps.n_dofs());
    for (std::size_t i = 0; i < all_p.size(); ++i) all_p[i] = i;
    op.b = linalg::extract(divergence(vs, ps), all_p, op.free_dofs).to_dense();
    op.x_norm = linalg::extract(stiffness(vs), op.free_dofs, op.free_dofs).to_dense();
    op.m_norm = mass(ps).to_dense();
    return op;
}

inline InfSupReport compute(Pair pair, std::size_t n, NormMode mode, double rank_tol = -1.0)
{
    const auto mesh = unit_square_mesh(n);
    const auto op = pair_operators(pair, mesh);
    auto r = mode == NormMode::Euclidean ? infsup_euclidean(op.b, rank_tol)
                                         : infsup_weighted(op.b, op.x_norm, op.m_norm, rank_tol);
    r.pair = std::string(pair_name(pair));
    r.h = mesh.h;
    return r;
}

/// Fraction of interior edges across which the pressure changes sign.
/// P0: values of the two adjacent cells; P1: values at the edge endpoints.
/// Values below 1e-10·max|p| carry no sign, and edges touching them are skipped.
inline double alternation_score(const Mesh& mesh, ElementKind pressure, const std::vector<double>& p)
{
    double peak = 0.0;
    for (double x : p) peak = std::max(peak, std::abs(x));
    const double zero = 1e-10 * peak;
    std::size_t changes = 0, count = 0;
    for (const auto& e : mesh.edges) {
        if (e.on_boundary()) continue;
        const double a = pressure == ElementKind::P0 ? p[e.tri0] : p[e.a];
        const double b = pressure == ElementKind::P0 ? p[e.tri1] : p[e.b];
        if (std::abs(a) <= zero || std::abs(b) <= zero) continue;
        ++count;
        if (a * b < 0.0) ++changes;
    }
    return count == 0 ? 0.0 : double(changes) / double(count);
}

/// Pressure field achieving β, ready for export.
struct PressureMode {
    std::vector<double> values;
    bool cell_data = false;  // P0 pressures are attached to cells
    double alternation = 0.0;
};

inline PressureMode spurious_mode(const InfSupReport& report, const Mesh& mesh)
{
    const auto kind = pressure_kind(parse_pair(report.pair));
    PressureMode m;
    m.values = report.worst_pressure_mode;
    m.cell_data = kind == ElementKind::P0;
    m.alternation = alternation_score(mesh, kind, m.values);
    return m;
}

} // namespace infsup_lab::infsup
