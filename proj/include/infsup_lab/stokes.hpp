#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infsup_lab/assembly.hpp"
#include "infsup_lab/errors.hpp"
#include "infsup_lab/fespace.hpp"
#include "infsup_lab/linalg/solve.hpp"
#include "infsup_lab/mesh.hpp"
#include "infsup_lab/verify.hpp"

namespace infsup_lab::stokes {

enum class MethodKind { P1P1Plain, P1P1Loss, BrezziPitkaranta, GalerkinLS, DouglasWang, TaylorHood, Mini, P2P0 };

struct Method {
    MethodKind kind = MethodKind::TaylorHood;
    double eps = 0.05;  // BrezziPitkaranta, GalerkinLS, DouglasWang only
};

inline constexpr double kDefaultEps = 0.05;

constexpr std::string_view method_name(MethodKind k) noexcept
{
    switch (k) {
    case MethodKind::P1P1Plain: return "p1p1-plain";
    case MethodKind::P1P1Loss: return "p1p1-loss";
    case MethodKind::BrezziPitkaranta: return "bp";
    case MethodKind::GalerkinLS: return "gls";
    case MethodKind::DouglasWang: return "dw";
    case MethodKind::TaylorHood: return "th";
    case MethodKind::Mini: return "mini";
    case MethodKind::P2P0: return "p2p0";
    }
    return "?";
}

inline MethodKind parse_method(std::string_view s)
{
    for (auto k : {MethodKind::P1P1Plain, MethodKind::P1P1Loss, MethodKind::BrezziPitkaranta, MethodKind::GalerkinLS,
                   MethodKind::DouglasWang, MethodKind::TaylorHood, MethodKind::Mini, MethodKind::P2P0})
        if (method_name(k) == s) return k;
    throw UnsupportedCombination("unknown Stokes method '" + std::string(s) + "'");
}

constexpr bool is_symmetric_method(MethodKind k) noexcept { return k != MethodKind::DouglasWang; }
constexpr bool has_stabilization(MethodKind k) noexcept
{
    return k == MethodKind::P1P1Loss || k == MethodKind::BrezziPitkaranta || k == MethodKind::GalerkinLS ||
           k == MethodKind::DouglasWang;
}

constexpr ElementKind velocity_kind(MethodKind k) noexcept
{
    switch (k) {
    case MethodKind::TaylorHood:
    case MethodKind::P2P0: return ElementKind::P2;
    case MethodKind::Mini: return ElementKind::P1Bubble;
    default: return ElementKind::P1;
    }
}

constexpr ElementKind pressure_kind(MethodKind k) noexcept
{
    return k == MethodKind::P2P0 ? ElementKind::P0 : ElementKind::P1;
}

/// Operators of the projection field z = Π∇p (P1P1Loss only).
struct LossOperators {
    CsrMatrix g;          // n_z × n_p, (φ_z, ∇ψ_p)
    Vector lumped;        // lumped mass of the z-space
    CsrMatrix s0;         // Σ h_K² (∇p, ∇q)_K
};

/// An assembled Stokes discretization. The mesh must outlive it.
struct StokesSystem {
    Method method;
    FeSpace velocity;
    FeSpace pressure;
    SaddleSystem system;
    std::optional<LossOperators> loss;
};

struct StokesSolution {
    Vector u;
    Vector p;
    std::optional<Vector> z;
    double residual_norm = 0.0;
};

namespace detail {

inline std::vector<double> element_weights(const Mesh& mesh, double power)
{
    std::vector<double> w(mesh.n_triangles());
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::pow(mesh.h_k[k], power);
    return w;
}

inline LossOperators loss_operators(const FeSpace& velocity, const FeSpace& pressure)
{
    return {grad_coupling(pressure, velocity), lumped_mass(velocity), pressure_grad_stab(pressure)};
}

} // namespace detail

/// Assembles the block system of a method, with zero velocity on ∂Ω and the mean constraint appended.
inline StokesSystem build(Method method, const Mesh& mesh, const VectorFunction& f)
{
    if (has_stabilization(method.kind) && method.kind != MethodKind::P1P1Loss && !(method.eps > 0.0))
        throw UnsupportedCombination("stokes::build: eps must be positive");
    FeSpace vs(mesh, velocity_kind(method.kind), 2);
    FeSpace ps(mesh, pressure_kind(method.kind), 1);

    SaddleSystem s;
    s.a = stiffness(vs);
    s.b = divergence(vs, ps);
    s.f = load_vector(vs, f);
    s.g.assign(ps.n_dofs(), 0.0);
    s.mean_vector = mean_vector(ps);
    s.c = linalg::empty_csr(ps.n_dofs(), ps.n_dofs());

    std::optional<LossOperators> loss;
    switch (method.kind) {
    case MethodKind::P1P1Loss: {
        loss = detail::loss_operators(vs, ps);
        const double h2 = mesh.h * mesh.h;
        // Gᵀ M_L⁻¹ G
        const auto gt = linalg::transpose(loss->g);
        CsrMatrix scaled_g = loss->g;
        for (std::size_t i = 0; i < scaled_g.rows; ++i)
            for (std::size_t k = scaled_g.row_ptr[i]; k < scaled_g.row_ptr[i + 1]; ++k)
                scaled_g.values[k] /= loss->lumped[i];
        const auto gmg = linalg::multiply(gt, scaled_g);
        s.c = linalg::add(loss->s0, gmg, 1.0, -h2);
        break;
    }
    case MethodKind::BrezziPitkaranta: s.c = linalg::scaled(pressure_grad_stab(ps), method.eps); break;
    case MethodKind::GalerkinLS:
    case MethodKind::DouglasWang: {
        const double power = method.kind == MethodKind::GalerkinLS ? 2.0 : 1.0;
        auto w = detail::element_weights(mesh, power);
        for (auto& x : w) x *= method.eps;
        s.c = weighted_gradient_form(ps, w);
        s.g = weighted_gradient_load(ps, f, w);
        for (auto& x : s.g) x = -x;
        if (method.kind == MethodKind::DouglasWang) s.constraint_row_sign = -1.0;
        break;
    }
    default: break;
    }

    const auto& bd = vs.boundary_dofs();
    const Vector zeros(bd.size(), 0.0);
    s = apply_dirichlet(std::move(s), bd, zeros);
    return {method, std::move(vs), std::move(ps), std::move(s), std::move(loss)};
}

/// Subtracts the weighted mean so that mᵀp = 0.
inline void normalize_mean(Vector& p, const Vector& m)
{
    double total = 0.0, mp = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        total += m[i];
        mp += m[i] * p[i];
    }
    const double c = mp / total;
    for (auto& x : p) x -= c;
}

inline StokesSolution solve(const StokesSystem& st, std::size_t dense_limit = linalg::kDenseSolveLimit)
{
    const auto& s = st.system;
    const auto k = block_matrix(s);
    const auto rhs = block_rhs(s);
    const auto x = linalg::solve(k, rhs, dense_limit);
    StokesSolution sol;
    sol.residual_norm = linalg::relative_residual(k, x, rhs);
    sol.u.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(s.n_u()));
    sol.p.assign(x.begin() + static_cast<std::ptrdiff_t>(s.n_u()),
                 x.begin() + static_cast<std::ptrdiff_t>(s.n_u() + s.n_p()));
    if (s.mean_vector) normalize_mean(sol.p, *s.mean_vector);
    if (st.loss) {
        auto z = st.loss->g.multiply(sol.p);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] /= st.loss->lumped[i];
        sol.z = std::move(z);
    }
    return sol;
}

/// Explicit three-field loss system in the unknowns (u, p, z, mean multiplier).
/// The z equation is scaled by h² so the matrix stays symmetric.
struct LossExplicitSystem {
    CsrMatrix matrix;
    Vector rhs;
    std::size_t n_u = 0, n_p = 0, n_z = 0;
};

inline LossExplicitSystem build_loss_explicit(const StokesSystem& st)
{
    if (st.method.kind != MethodKind::P1P1Loss || !st.loss)
        throw UnsupportedCombination("build_loss_explicit: needs a P1P1Loss system");
    const auto& s = st.system;
    const auto& lo = *st.loss;
    const std::size_t nu = s.n_u(), np = s.n_p(), nz = lo.g.rows;
    const double h2 = st.velocity.mesh().h * st.velocity.mesh().h;
    std::vector<Triplet> t;
    for (auto e : s.a.triplets()) t.push_back(e);
    for (auto e : s.b.triplets()) {
        t.push_back({e.col, nu + e.row, e.value});
        t.push_back({nu + e.row, e.col, e.value});
    }
    for (auto e : lo.s0.triplets()) t.push_back({nu + e.row, nu + e.col, -e.value});
    for (auto e : lo.g.triplets()) {
        t.push_back({nu + e.col, nu + np + e.row, h2 * e.value});
        t.push_back({nu + np + e.row, nu + e.col, h2 * e.value});
    }
    for (std::size_t i = 0; i < nz; ++i) t.push_back({nu + np + i, nu + np + i, -h2 * lo.lumped[i]});
    const std::size_t n = nu + np + nz + 1;
    for (std::size_t q = 0; q < np; ++q) {
        t.push_back({nu + q, n - 1, (*s.mean_vector)[q]});
        t.push_back({n - 1, nu + q, (*s.mean_vector)[q]});
    }
    LossExplicitSystem out;
    out.matrix = linalg::csr_from_triplets(n, n, std::move(t));
    out.rhs.assign(n, 0.0);
    std::copy(s.f.begin(), s.f.end(), out.rhs.begin());
    std::copy(s.g.begin(), s.g.end(), out.rhs.begin() + static_cast<std::ptrdiff_t>(nu));
    out.n_u = nu;
    out.n_p = np;
    out.n_z = nz;
    return out;
}

inline StokesSolution solve_loss_explicit(const StokesSystem& st, std::size_t dense_limit = linalg::kDenseSolveLimit)
{
    const auto ex = build_loss_explicit(st);
    const auto x = linalg::solve(ex.matrix, ex.rhs, dense_limit);
    StokesSolution sol;
    sol.residual_norm = linalg::relative_residual(ex.matrix, x, ex.rhs);
    const auto at = [&](std::size_t off, std::size_t len) {
        return Vector(x.begin() + static_cast<std::ptrdiff_t>(off), x.begin() + static_cast<std::ptrdiff_t>(off + len));
    };
    sol.u = at(0, ex.n_u);
    sol.p = at(ex.n_u, ex.n_p);
    sol.z = at(ex.n_u + ex.n_p, ex.n_z);
    normalize_mean(sol.p, *st.system.mean_vector);
    return sol;
}

/// Exact fields of a Stokes test problem.
struct ExactSolution {
    VectorFunction u;
    std::function<std::array<Point, 2>(const Point&)> grad_u;  // rows: ∇u₁, ∇u₂
    ScalarFunction p;
    VectorFunction f;
};

/// u = curl of sin²(πx)sin²(πy)/π, p = sin(2πx)sin(2πy), f = −Δu + ∇p.
inline ExactSolution manufactured_problem()
{
    using std::numbers::pi;
    ExactSolution e;
    e.u = [](const Point& x) -> Point {
        const double sx = std::sin(pi * x[0]), sy = std::sin(pi * x[1]);
        return {sx * sx * std::sin(2 * pi * x[1]), -std::sin(2 * pi * x[0]) * sy * sy};
    };
    e.grad_u = [](const Point& x) -> std::array<Point, 2> {
        const double sx = std::sin(pi * x[0]), sy = std::sin(pi * x[1]);
        const double s2x = std::sin(2 * pi * x[0]), s2y = std::sin(2 * pi * x[1]);
        const double c2x = std::cos(2 * pi * x[0]), c2y = std::cos(2 * pi * x[1]);
        return {Point{pi * s2x * s2y, 2 * pi * sx * sx * c2y}, Point{-2 * pi * c2x * sy * sy, -pi * s2x * s2y}};
    };
    e.p = [](const Point& x) { return std::sin(2 * pi * x[0]) * std::sin(2 * pi * x[1]); };
    e.f = [](const Point& x) -> Point {
        const double s2x = std::sin(2 * pi * x[0]), s2y = std::sin(2 * pi * x[1]);
        const double c2x = std::cos(2 * pi * x[0]), c2y = std::cos(2 * pi * x[1]);
        return {-2 * pi * pi * s2y * (2 * c2x - 1) + 2 * pi * c2x * s2y,
                2 * pi * pi * s2x * (2 * c2y - 1) + 2 * pi * s2x * c2y};
    };
    return e;
}

struct ErrorTriple {
    double err_u_l2 = 0.0;
    double err_u_h1 = 0.0;  // H¹ seminorm
    double err_p_l2 = 0.0;
};

/// Errors by degree-6 quadrature. The exact pressure is shifted to zero mean;
/// for a P0 pressure it is replaced by its cellwise average.
inline ErrorTriple errors(const FeSpace& velocity, const FeSpace& pressure, const Vector& u, const Vector& p,
                          const ExactSolution& exact)
{
    const auto& mesh = velocity.mesh();
    const auto rule = quadrature(6);
    double p_mean = 0.0;
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        const auto v = mesh.vertices(k);
        for (std::size_t q = 0; q < rule.points.size(); ++q)
            p_mean += rule.weights[q] * g.area * exact.p(to_physical(v, rule.points[q]));
    }
    const bool p0 = pressure.kind() == ElementKind::P0;
    ErrorTriple e;
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        const auto v = mesh.vertices(k);
        double cell_avg = 0.0;
        if (p0) {
            for (std::size_t q = 0; q < rule.points.size(); ++q)
                cell_avg += rule.weights[q] * exact.p(to_physical(v, rule.points[q]));
        }
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto& l = rule.points[q];
            const auto x = to_physical(v, l);
            const double w = rule.weights[q] * g.area;
            const auto ue = exact.u(x);
            const auto ge = exact.grad_u(x);
            for (std::size_t c = 0; c < 2; ++c) {
                const double du = velocity.evaluate(u, k, l, c) - ue[c];
                const auto gh = velocity.evaluate_gradient(u, k, l, g, c);
                e.err_u_l2 += w * du * du;
                e.err_u_h1 += w * ((gh[0] - ge[c][0]) * (gh[0] - ge[c][0]) + (gh[1] - ge[c][1]) * (gh[1] - ge[c][1]));
            }
            const double pe = (p0 ? cell_avg : exact.p(x)) - p_mean;
            const double dp = pressure.evaluate(p, k, l) - pe;
            e.err_p_l2 += w * dp * dp;
        }
    }
    e.err_u_l2 = std::sqrt(e.err_u_l2);
    e.err_u_h1 = std::sqrt(e.err_u_h1);
    e.err_p_l2 = std::sqrt(e.err_p_l2);
    return e;
}

inline ErrorTriple errors(const StokesSystem& st, const StokesSolution& sol, const ExactSolution& exact)
{
    return errors(st.velocity, st.pressure, sol.u, sol.p, exact);
}

/// Mean jump of the pressure across interior edges divided by its RMS value.
/// P0: values of the two adjacent cells; P1: values at the two edge endpoints.
inline double oscillation_indicator(const FeSpace& pressure, const Vector& p)
{
    const auto& mesh = pressure.mesh();
    double rms = 0.0;
    for (double x : p) rms += x * x;
    rms = std::sqrt(rms / double(p.size()));
    if (rms == 0.0) return 0.0;
    double jump = 0.0;
    std::size_t count = 0;
    for (const auto& e : mesh.edges) {
        if (e.on_boundary()) continue;
        if (pressure.kind() == ElementKind::P0) jump += std::abs(p[e.tri0] - p[e.tri1]);
        else jump += std::abs(p[e.a] - p[e.b]);
        ++count;
    }
    return count == 0 ? 0.0 : jump / double(count) / rms;
}

/// ‖∂p/∂n‖ in L²(Γ) for a P1 pressure (constant per boundary edge).
inline double boundary_normal_gradient(const FeSpace& pressure, const Vector& p)
{
    if (pressure.kind() != ElementKind::P1) throw UnsupportedCombination("boundary_normal_gradient: needs P1 pressure");
    const auto& mesh = pressure.mesh();
    double acc = 0.0;
    for (const auto& be : mesh.boundary_edges) {
        const auto g = mesh.geometry(be.triangle);
        const auto grad = pressure.evaluate_gradient(p, be.triangle, {1.0 / 3, 1.0 / 3, 1.0 / 3}, g);
        const auto n = Mesh::outward_normal(mesh.nodes[be.a], mesh.nodes[be.b]);
        const double dn = grad[0] * n[0] + grad[1] * n[1];
        acc += distance(mesh.nodes[be.a], mesh.nodes[be.b]) * dn * dn;
    }
    return std::sqrt(acc);
}

/// ‖Bu − Cp‖ / (‖B‖‖u‖ + ‖C‖‖p‖), second block row residual with zero g.
inline double mass_balance_defect(const StokesSystem& st, const StokesSolution& sol)
{
    const auto& s = st.system;
    auto r = s.b.multiply(sol.u);
    const auto cp = s.c.multiply(sol.p);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= cp[i] + s.g[i];
    const double scale = linalg::frobenius_norm(s.b) * linalg::norm2(sol.u) +
                         linalg::frobenius_norm(s.c) * linalg::norm2(sol.p) + linalg::norm2(s.g);
    return scale == 0.0 ? 0.0 : linalg::norm2(r) / scale;
}

/// One level of the manufactured-solution study: h and the three errors.
inline verify::Level mms_level(Method method, std::size_t n)
{
    const auto mesh = unit_square_mesh(n);
    const auto exact = manufactured_problem();
    const auto st = build(method, mesh, exact.f);
    const auto sol = solve(st);
    const auto e = errors(st, sol, exact);
    verify::Level l;
    l.n = n;
    l.h = mesh.h;
    l.errors = {{"err_u_l2", e.err_u_l2}, {"err_u_h1", e.err_u_h1}, {"err_p_l2", e.err_p_l2}};
    for (const auto& [k, v] : l.errors)
        if (!std::isfinite(v)) throw NonFiniteInput("mms_level: non-finite " + k);
    return l;
}

} // namespace infsup_lab::stokes
