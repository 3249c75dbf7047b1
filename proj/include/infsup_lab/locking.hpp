#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "infsup_lab/assembly.hpp"
#include "infsup_lab/errors.hpp"
#include "infsup_lab/fespace.hpp"
#include "infsup_lab/linalg/factor.hpp"
#include "infsup_lab/linalg/solve.hpp"
#include "infsup_lab/mesh.hpp"

namespace infsup_lab::locking {

using linalg::DenseMatrix;

enum class Method { Plain, Corrected, Multiplier };

constexpr std::string_view method_name(Method m) noexcept
{
    switch (m) {
    case Method::Plain: return "plain";
    case Method::Corrected: return "corrected";
    case Method::Multiplier: return "multiplier";
    }
    return "?";
}

inline Method parse_method(std::string_view s)
{
    for (auto m : {Method::Plain, Method::Corrected, Method::Multiplier})
        if (method_name(m) == s) return m;
    throw UnsupportedCombination("unknown locking method '" + std::string(s) + "'");
}

/// Space of the multiplier γ in the Multiplier method.
enum class MultiplierSpace { DiscontinuousP1, ContinuousP1, ZeroTraceP1 };

constexpr std::string_view space_name(MultiplierSpace s) noexcept
{
    switch (s) {
    case MultiplierSpace::DiscontinuousP1: return "p1-disc";
    case MultiplierSpace::ContinuousP1: return "p1";
    case MultiplierSpace::ZeroTraceP1: return "p1-zero";
    }
    return "?";
}

inline MultiplierSpace parse_space(std::string_view s)
{
    for (auto m : {MultiplierSpace::DiscontinuousP1, MultiplierSpace::ContinuousP1, MultiplierSpace::ZeroTraceP1})
        if (space_name(m) == s) return m;
    throw UnsupportedCombination("unknown multiplier space '" + std::string(s) + "'");
}

/// Mass matrix of the projection w = Π∇p in the Corrected method.
enum class ProjectionMass { Lumped, Consistent };

constexpr std::string_view mass_name(ProjectionMass m) noexcept
{
    return m == ProjectionMass::Lumped ? "lumped" : "consistent";
}

inline ProjectionMass parse_mass(std::string_view s)
{
    if (s == "lumped") return ProjectionMass::Lumped;
    if (s == "consistent") return ProjectionMass::Consistent;
    throw UnsupportedCombination("unknown projection mass '" + std::string(s) + "'");
}

inline const double kUnitSquarePoincare = 1.0 / (std::numbers::pi * std::numbers::sqrt2);

struct LockingConfig {
    double lambda = 1e2;
    double poincare_const = kUnitSquarePoincare;
    std::size_t n = 8;
    Method method = Method::Plain;
    VectorFunction f = [](const Point&) { return Point{1.0, 1.0}; };
    ScalarFunction g = [](const Point&) { return 0.0; };
    MultiplierSpace multiplier_space = MultiplierSpace::DiscontinuousP1;
    ProjectionMass projection_mass = ProjectionMass::Lumped;
    /// Adds (u − ∇p, v − ∇q) to a(·,·) and uses the penalty λ − 1 (Multiplier only).
    bool tilde_a = false;
};

struct LockingReport {
    double u_h1_norm = 0.0;
    double p_h1_norm = 0.0;
    double lambda = 0.0;
    Method method = Method::Plain;
    bool solve_ok = false;
    std::string message;
};

/// Operators on the zero-trace P1 spaces, restricted to free dofs.
struct LockingOperators {
    const Mesh* mesh = nullptr;
    std::vector<std::size_t> u_free;  // in the P1 vector space
    std::vector<std::size_t> p_free;  // in the P1 scalar space
    CsrMatrix k;   // vector stiffness
    CsrMatrix m;   // vector consistent mass
    Vector m_lumped;
    CsrMatrix gc;  // (φ_v, ∇ψ_p), u rows × p columns
    CsrMatrix s;   // (∇p, ∇q)
    Vector f;
    Vector g;
    std::size_t n_u() const noexcept { return u_free.size(); }
    std::size_t n_p() const noexcept { return p_free.size(); }
};

inline LockingOperators locking_operators(const Mesh& mesh, const VectorFunction& f, const ScalarFunction& g)
{
    const FeSpace vs(mesh, ElementKind::P1, 2);
    const FeSpace ps(mesh, ElementKind::P1, 1);
    LockingOperators op;
    op.mesh = &mesh;
    op.u_free = vs.free_dofs();
    op.p_free = ps.free_dofs();
    const auto& uf = op.u_free;
    const auto& pf = op.p_free;
    op.k = linalg::extract(stiffness(vs), uf, uf);
    op.m = linalg::extract(mass(vs), uf, uf);
    const auto ml = lumped_mass(vs);
    for (auto i : uf) op.m_lumped.push_back(ml[i]);
    op.gc = linalg::extract(grad_coupling(ps, vs), uf, pf);
    op.s = linalg::extract(stiffness(ps), pf, pf);
    const auto fl = load_vector(vs, f);
    const auto gl = load_vector(ps, g);
    for (auto i : uf) op.f.push_back(fl[i]);
    for (auto i : pf) op.g.push_back(gl[i]);
    return op;
}

/// Linear system of a locking method; unknowns ordered (u, p, extra) over free dofs.
struct LockingSystem {
    CsrMatrix matrix;
    Vector rhs;
    std::size_t n_u = 0, n_p = 0, n_extra = 0;
};

namespace detail {

inline void push_block(std::vector<Triplet>& t, const CsrMatrix& a, std::size_t r0, std::size_t c0, double s,
                       bool transpose = false)
{
    for (auto e : a.triplets()) {
        if (transpose) t.push_back({r0 + e.col, c0 + e.row, s * e.value});
        else t.push_back({r0 + e.row, c0 + e.col, s * e.value});
    }
}

inline Vector concat(const Vector& a, const Vector& b, std::size_t extra = 0)
{
    Vector out(a);
    out.insert(out.end(), b.begin(), b.end());
    out.resize(out.size() + extra, 0.0);
    return out;
}

} // namespace detail

/// Φ((u,p),(v,q)) = (∇u,∇v) + λ(u − ∇p, v − ∇q) against (f,v) + (g,q).
inline LockingSystem build_plain(const LockingOperators& op, double lambda)
{
    const std::size_t nu = op.n_u(), np = op.n_p();
    std::vector<Triplet> t;
    detail::push_block(t, op.k, 0, 0, 1.0);
    detail::push_block(t, op.m, 0, 0, lambda);
    detail::push_block(t, op.gc, 0, nu, -lambda);
    detail::push_block(t, op.gc, nu, 0, -lambda, true);
    detail::push_block(t, op.s, nu, nu, lambda);
    return {linalg::csr_from_triplets(nu + np, nu + np, std::move(t)), detail::concat(op.f, op.g), nu, np, 0};
}

/// Coefficients of the corrected form: c·λ/(λ+c) on the gradient term, λ²/(λ+c) on the projection term.
struct CorrectionCoefficients {
    double gradient;
    double projection;
};

inline CorrectionCoefficients correction_coefficients(double lambda, double c)
{
    return {c * lambda / (lambda + c), lambda * lambda / (lambda + c)};
}

/// Three-field corrected system in (u, p, w), w = Π∇p on the zero-trace P1 vector space.
/// The w equation is scaled by λ²/(λ+c) so the matrix is symmetric.
inline LockingSystem build_corrected(const LockingOperators& op, double lambda, double c,
                                     ProjectionMass pm = ProjectionMass::Lumped)
{
    const std::size_t nu = op.n_u(), np = op.n_p(), nw = op.n_u();
    const auto cc = correction_coefficients(lambda, c);
    std::vector<Triplet> t;
    detail::push_block(t, op.k, 0, 0, 1.0);
    detail::push_block(t, op.m, 0, 0, lambda);
    detail::push_block(t, op.gc, 0, nu, -lambda);
    detail::push_block(t, op.gc, nu, 0, -lambda, true);
    detail::push_block(t, op.s, nu, nu, cc.gradient);
    detail::push_block(t, op.gc, nu, nu + np, cc.projection, true);
    detail::push_block(t, op.gc, nu + np, nu, cc.projection);
    if (pm == ProjectionMass::Lumped)
        for (std::size_t i = 0; i < nw; ++i) t.push_back({nu + np + i, nu + np + i, -cc.projection * op.m_lumped[i]});
    else detail::push_block(t, op.m, nu + np, nu + np, -cc.projection);
    const std::size_t n = nu + np + nw;
    return {linalg::csr_from_triplets(n, n, std::move(t)), detail::concat(op.f, op.g, nw), nu, np, nw};
}

/// Gᵀ·M⁻¹·G for the chosen projection mass.
inline CsrMatrix projection_form(const LockingOperators& op, ProjectionMass pm)
{
    if (pm == ProjectionMass::Lumped) {
        CsrMatrix scaled = op.gc;
        for (std::size_t i = 0; i < scaled.rows; ++i)
            for (std::size_t k = scaled.row_ptr[i]; k < scaled.row_ptr[i + 1]; ++k) scaled.values[k] /= op.m_lumped[i];
        return linalg::multiply(linalg::transpose(op.gc), scaled);
    }
    const linalg::LuFactorization lu(op.m.to_dense());
    const auto g = op.gc.to_dense();
    std::vector<Triplet> t;
    for (std::size_t j = 0; j < g.cols(); ++j) {
        const auto y = lu.solve(g.column(j));
        const auto col = op.gc.multiply_transposed(y);
        for (std::size_t i = 0; i < col.size(); ++i)
            if (col[i] != 0.0) t.push_back({i, j, col[i]});
    }
    return linalg::csr_from_triplets(g.cols(), g.cols(), std::move(t));
}

/// Corrected system with w eliminated.
inline LockingSystem build_corrected_eliminated(const LockingOperators& op, double lambda, double c,
                                                ProjectionMass pm = ProjectionMass::Lumped)
{
    const std::size_t nu = op.n_u(), np = op.n_p();
    const auto cc = correction_coefficients(lambda, c);
    const auto gmg = projection_form(op, pm);
    std::vector<Triplet> t;
    detail::push_block(t, op.k, 0, 0, 1.0);
    detail::push_block(t, op.m, 0, 0, lambda);
    detail::push_block(t, op.gc, 0, nu, -lambda);
    detail::push_block(t, op.gc, nu, 0, -lambda, true);
    detail::push_block(t, op.s, nu, nu, cc.gradient);
    detail::push_block(t, gmg, nu, nu, cc.projection);
    return {linalg::csr_from_triplets(nu + np, nu + np, std::move(t)), detail::concat(op.f, op.g), nu, np, 0};
}

/// Couplings of the multiplier space: mass M_γ and the blocks of (δ, u − ∇p).
struct MultiplierOperators {
    CsrMatrix m_gamma;  // n_γ × n_γ
    CsrMatrix b_u;      // n_γ × n_u (free u dofs)
    CsrMatrix b_p;      // n_γ × n_p (free p dofs), carries the minus sign
};

inline MultiplierOperators multiplier_operators(const LockingOperators& op, MultiplierSpace space)
{
    const Mesh& mesh = *op.mesh;
    const FeSpace vs(mesh, ElementKind::P1, 2);
    const FeSpace ps(mesh, ElementKind::P1, 1);
    MultiplierOperators mo;
    if (space == MultiplierSpace::DiscontinuousP1) {
        // dof of (component c, triangle t, local vertex i): c·3·n_t + 3·t + i
        const std::size_t nt = mesh.n_triangles();
        const std::size_t ng = 6 * nt;
        std::vector<std::size_t> u_pos(vs.n_dofs(), Edge::npos), p_pos(ps.n_dofs(), Edge::npos);
        for (std::size_t i = 0; i < op.u_free.size(); ++i) u_pos[op.u_free[i]] = i;
        for (std::size_t i = 0; i < op.p_free.size(); ++i) p_pos[op.p_free[i]] = i;
        std::vector<Triplet> tm, tu, tp;
        for (std::size_t k = 0; k < nt; ++k) {
            const auto geo = mesh.geometry(k);
            for (std::size_t c = 0; c < 2; ++c)
                for (std::size_t i = 0; i < 3; ++i) {
                    const std::size_t row = c * 3 * nt + 3 * k + i;
                    for (std::size_t j = 0; j < 3; ++j) {
                        const double mij = geo.area / 12.0 * (i == j ? 2.0 : 1.0);
                        tm.push_back({row, c * 3 * nt + 3 * k + j, mij});
                        const std::size_t ud = u_pos[vs.dof(k, j, c)];
                        if (ud != Edge::npos) tu.push_back({row, ud, mij});
                        const std::size_t pd = p_pos[ps.dof(k, j)];
                        if (pd != Edge::npos) tp.push_back({row, pd, -geo.area / 3.0 * geo.grad_lambda[j][c]});
                    }
                }
        }
        mo.m_gamma = linalg::csr_from_triplets(ng, ng, std::move(tm));
        mo.b_u = linalg::csr_from_triplets(ng, op.n_u(), std::move(tu));
        mo.b_p = linalg::csr_from_triplets(ng, op.n_p(), std::move(tp));
        return mo;
    }
    std::vector<std::size_t> rows;
    if (space == MultiplierSpace::ZeroTraceP1) rows = op.u_free;
    else
        for (std::size_t i = 0; i < vs.n_dofs(); ++i) rows.push_back(i);
    mo.m_gamma = linalg::extract(mass(vs), rows, rows);
    mo.b_u = linalg::extract(mass(vs), rows, op.u_free);
    mo.b_p = linalg::scaled(linalg::extract(grad_coupling(ps, vs), rows, op.p_free), -1.0);
    return mo;
}

/// [[A_X, Bᵀ], [B, −(1/λ)·M_γ]] with A_X the (u,p) stiffness and B the (δ, u − ∇p) coupling.
inline SaddleSystem build_multiplier(const LockingOperators& op, const MultiplierOperators& mo, double lambda,
                                     bool tilde_a = false)
{
    const std::size_t nu = op.n_u(), np = op.n_p();
    const double penalty = tilde_a ? lambda - 1.0 : lambda;
    if (!(penalty > 0.0)) throw UnsupportedCombination("build_multiplier: penalty must be positive");
    std::vector<Triplet> ta;
    detail::push_block(ta, op.k, 0, 0, 1.0);
    if (tilde_a) {
        detail::push_block(ta, op.m, 0, 0, 1.0);
        detail::push_block(ta, op.gc, 0, nu, -1.0);
        detail::push_block(ta, op.gc, nu, 0, -1.0, true);
        detail::push_block(ta, op.s, nu, nu, 1.0);
    }
    std::vector<Triplet> tb;
    detail::push_block(tb, mo.b_u, 0, 0, 1.0);
    detail::push_block(tb, mo.b_p, 0, nu, 1.0);
    SaddleSystem s;
    s.a = linalg::csr_from_triplets(nu + np, nu + np, std::move(ta));
    s.b = linalg::csr_from_triplets(mo.m_gamma.rows, nu + np, std::move(tb));
    s.c = linalg::scaled(mo.m_gamma, 1.0 / penalty);
    s.f = detail::concat(op.f, op.g);
    s.g.assign(mo.m_gamma.rows, 0.0);
    return s;
}

/// A_X + λ·Bᵀ·M_γ⁻¹·B, the (u,p) matrix left after eliminating γ.
inline DenseMatrix multiplier_eliminated(const SaddleSystem& s)
{
    const auto mg = s.c.to_dense();  // (1/λ)·M_γ
    const linalg::LuFactorization lu(mg);
    const auto b = s.b.to_dense();
    DenseMatrix out = s.a.to_dense();
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const auto y = lu.solve(b.column(j));
        for (std::size_t i = 0; i < b.cols(); ++i) {
            double v = 0.0;
            for (std::size_t r = 0; r < b.rows(); ++r) v += b(r, i) * y[r];
            out(i, j) += v;
        }
    }
    return out;
}

struct LockingSolution {
    Vector u;  // free u dofs
    Vector p;  // free p dofs
    Vector extra;  // w (Corrected) or γ (Multiplier)
    double residual_norm = 0.0;
};

inline LockingSolution solve_system(const CsrMatrix& matrix, const Vector& rhs, std::size_t nu, std::size_t np)
{
    const auto x = linalg::solve(matrix, rhs);
    LockingSolution sol;
    sol.residual_norm = linalg::relative_residual(matrix, x, rhs);
    sol.u.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(nu));
    sol.p.assign(x.begin() + static_cast<std::ptrdiff_t>(nu), x.begin() + static_cast<std::ptrdiff_t>(nu + np));
    sol.extra.assign(x.begin() + static_cast<std::ptrdiff_t>(nu + np), x.end());
    return sol;
}

inline LockingSolution solve(const LockingOperators& op, const LockingConfig& cfg)
{
    if (!(cfg.lambda >= 0.0) || !(cfg.poincare_const > 0.0))
        throw UnsupportedCombination("locking: lambda must be non-negative and c_omega positive");
    switch (cfg.method) {
    case Method::Plain: {
        const auto s = build_plain(op, cfg.lambda);
        return solve_system(s.matrix, s.rhs, s.n_u, s.n_p);
    }
    case Method::Corrected: {
        const auto s = build_corrected(op, cfg.lambda, cfg.poincare_const, cfg.projection_mass);
        return solve_system(s.matrix, s.rhs, s.n_u, s.n_p);
    }
    case Method::Multiplier: {
        const auto mo = multiplier_operators(op, cfg.multiplier_space);
        const auto s = build_multiplier(op, mo, cfg.lambda, cfg.tilde_a);
        return solve_system(block_matrix(s), block_rhs(s), op.n_u(), op.n_p());
    }
    }
    throw UnsupportedCombination("locking: unknown method");
}

inline LockingReport report(const LockingOperators& op, const LockingConfig& cfg)
{
    LockingReport r;
    r.lambda = cfg.lambda;
    r.method = cfg.method;
    try {
        const auto sol = solve(op, cfg);
        r.u_h1_norm = std::sqrt(std::max(0.0, op.k.quadratic_form(sol.u)));
        r.p_h1_norm = std::sqrt(std::max(0.0, op.s.quadratic_form(sol.p)));
        r.solve_ok = std::isfinite(r.u_h1_norm) && std::isfinite(r.p_h1_norm);
        if (!r.solve_ok) r.message = "non-finite solution";
    } catch (const Error& e) {
        r.solve_ok = false;
        r.message = e.what();
    }
    return r;
}

/// One report per λ on a fixed mesh and loads.
inline std::vector<LockingReport> lambda_sweep(LockingConfig cfg, const std::vector<double>& lambdas)
{
    const auto mesh = unit_square_mesh(cfg.n);
    const auto op = locking_operators(mesh, cfg.f, cfg.g);
    std::vector<LockingReport> out;
    out.reserve(lambdas.size());
    for (double l : lambdas) {
        cfg.lambda = l;
        out.push_back(report(op, cfg));
    }
    return out;
}

/// Expands a free-dof vector of the P1 vector (components = 2) or scalar space to all dofs.
inline Vector expand(const std::vector<std::size_t>& free, std::size_t n_all, const Vector& x)
{
    Vector out(n_all, 0.0);
    for (std::size_t i = 0; i < free.size(); ++i) out[free[i]] = x[i];
    return out;
}

} // namespace infsup_lab::locking
