#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "infsup_lab/assembly.hpp"
#include "infsup_lab/errors.hpp"
#include "infsup_lab/fespace.hpp"
#include "infsup_lab/linalg/factor.hpp"
#include "infsup_lab/linalg/solve.hpp"
#include "infsup_lab/linalg/svd.hpp"
#include "infsup_lab/mesh.hpp"
#include "infsup_lab/verify.hpp"

namespace infsup_lab::weakbc {

using linalg::DenseMatrix;

enum class MethodKind { Multiplier, BarbosaHughes, Nitsche };

struct Method {
    MethodKind kind = MethodKind::Nitsche;
    double alpha = 0.0;  // BarbosaHughes
    double gamma = 0.0;  // Nitsche
};

constexpr std::string_view method_name(MethodKind k) noexcept
{
    switch (k) {
    case MethodKind::Multiplier: return "multiplier";
    case MethodKind::BarbosaHughes: return "bh";
    case MethodKind::Nitsche: return "nitsche";
    }
    return "?";
}

inline MethodKind parse_method(std::string_view s)
{
    for (auto k : {MethodKind::Multiplier, MethodKind::BarbosaHughes, MethodKind::Nitsche})
        if (method_name(k) == s) return k;
    throw UnsupportedCombination("unknown weak-bc method '" + std::string(s) + "'");
}

/// Multiplier space on the boundary edges.
enum class TraceSpace { P0, P1, P1Disc };

constexpr std::string_view trace_name(TraceSpace t) noexcept
{
    switch (t) {
    case TraceSpace::P0: return "p0";
    case TraceSpace::P1: return "p1";
    case TraceSpace::P1Disc: return "p1-disc";
    }
    return "?";
}

inline TraceSpace parse_trace(std::string_view s)
{
    for (auto t : {TraceSpace::P0, TraceSpace::P1, TraceSpace::P1Disc})
        if (trace_name(t) == s) return t;
    throw UnsupportedCombination("unknown trace space '" + std::string(s) + "'");
}

/// √ of the largest generalized eigenvalue of (weight·h·N_nn, K + 1e-12·M) on scalar P1.
///
/// N_nn lives on the nodes of boundary triangles (set B); the interior dofs are
/// minimized out of the denominator by the Schur complement S, and the constant
/// direction (zero numerator) is lifted by a rank-one shift of S.
inline double inverse_constant(const Mesh& mesh, double weight = 1.0)
{
    const FeSpace ps(mesh, ElementKind::P1, 1);
    const auto bo = boundary_operators(ps);
    const auto x = linalg::add(stiffness(ps), mass(ps), 1.0, 1e-12);
    std::vector<char> on_b(mesh.n_nodes(), 0);
    for (const auto& be : mesh.boundary_edges)
        for (auto v : mesh.triangles[be.triangle]) on_b[v] = 1;
    std::vector<std::size_t> bs, is;
    for (std::size_t i = 0; i < mesh.n_nodes(); ++i) (on_b[i] ? bs : is).push_back(i);

    auto s = linalg::extract(x, bs, bs).to_dense();
    if (!is.empty()) {
        const auto lii = linalg::cholesky(linalg::extract(x, is, is).to_dense());
        const auto xib = linalg::extract(x, is, bs).to_dense();
        auto y = xib;
        linalg::forward_substitute(lii, y);  // L⁻¹·X_IB, so X_BI·X_II⁻¹·X_IB = yᵀy
        s -= linalg::matmul_tn(y, y);
    }
    double shift = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i) shift = std::max(shift, s(i, i));
    shift /= double(bs.size());
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) += shift;

    const auto l = linalg::cholesky(s);
    auto w = linalg::extract(bo.normal_normal, bs, bs).to_dense();
    w *= weight * mesh.h;
    linalg::forward_substitute(l, w);
    w = w.transposed();
    linalg::forward_substitute(l, w);
    for (std::size_t i = 0; i < w.rows(); ++i)
        for (std::size_t j = i + 1; j < w.cols(); ++j) w(i, j) = w(j, i) = 0.5 * (w(i, j) + w(j, i));
    const auto eig = linalg::sym_eig(w);
    return std::sqrt(std::max(0.0, eig.values.front()));
}

/// How the default γ and α scale with the inverse constant.
enum class Scaling { Squared, Linear };

constexpr std::string_view scaling_name(Scaling s) noexcept { return s == Scaling::Squared ? "squared" : "linear"; }

inline Scaling parse_scaling(std::string_view s)
{
    if (s == "squared") return Scaling::Squared;
    if (s == "linear") return Scaling::Linear;
    throw UnsupportedCombination("unknown parameter scaling '" + std::string(s) + "'");
}

/// γ = 4·C_i² (Squared) or 4·C_i (Linear).
inline double default_gamma(double c_i, Scaling s = Scaling::Squared)
{
    return 4.0 * (s == Scaling::Squared ? c_i * c_i : c_i);
}

/// α = 0.5/C_i² (Squared) or 0.5/C_i (Linear).
inline double default_alpha(double c_i, Scaling s = Scaling::Squared)
{
    return 0.5 / (s == Scaling::Squared ? c_i * c_i : c_i);
}

/// Three-point Gauss rule on [0,1].
inline constexpr std::array<double, 3> kGauss3Points{0.1127016653792583, 0.5, 0.8872983346207417};
inline constexpr std::array<double, 3> kGauss3Weights{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

/// Dof layout of a trace space; basis functions on an edge are given in the edge parameter s ∈ [0,1] from a to b.
struct TraceLayout {
    TraceSpace space;
    std::size_t n_dofs = 0;
    std::vector<std::vector<std::size_t>> edge_dofs;  // per boundary edge
    std::vector<Point> dof_coords;
    /// Pairs of adjacent multiplier dofs along the boundary.
    std::vector<std::pair<std::size_t, std::size_t>> neighbours;
};

inline TraceLayout trace_layout(const Mesh& mesh, TraceSpace space)
{
    TraceLayout t;
    t.space = space;
    const auto& be = mesh.boundary_edges;
    t.edge_dofs.resize(be.size());
    const auto mid = [&](std::size_t e) -> Point {
        return {0.5 * (mesh.nodes[be[e].a][0] + mesh.nodes[be[e].b][0]),
                0.5 * (mesh.nodes[be[e].a][1] + mesh.nodes[be[e].b][1])};
    };
    switch (space) {
    case TraceSpace::P0:
        for (std::size_t e = 0; e < be.size(); ++e) {
            t.edge_dofs[e] = {e};
            t.dof_coords.push_back(mid(e));
        }
        t.n_dofs = be.size();
        for (std::size_t e = 0; e < be.size(); ++e)
            for (std::size_t f = e + 1; f < be.size(); ++f)
                if (be[e].a == be[f].b || be[e].b == be[f].a) t.neighbours.emplace_back(e, f);
        break;
    case TraceSpace::P1Disc:
        for (std::size_t e = 0; e < be.size(); ++e) {
            t.edge_dofs[e] = {2 * e, 2 * e + 1};
            t.dof_coords.push_back(mesh.nodes[be[e].a]);
            t.dof_coords.push_back(mesh.nodes[be[e].b]);
        }
        t.n_dofs = 2 * be.size();
        break;
    case TraceSpace::P1: {
        std::vector<std::size_t> index(mesh.n_nodes(), Edge::npos);
        for (std::size_t i = 0; i < mesh.n_nodes(); ++i)
            if (mesh.is_boundary_node(i)) {
                index[i] = t.n_dofs++;
                t.dof_coords.push_back(mesh.nodes[i]);
            }
        for (std::size_t e = 0; e < be.size(); ++e) t.edge_dofs[e] = {index[be[e].a], index[be[e].b]};
        break;
    }
    }
    if (space != TraceSpace::P0)
        for (const auto& d : t.edge_dofs) t.neighbours.emplace_back(d[0], d[1]);
    return t;
}

inline std::vector<double> trace_basis(TraceSpace space, double s)
{
    if (space == TraceSpace::P0) return {1.0};
    return {1.0 - s, s};
}

/// Boundary blocks of the multiplier methods, all edge-wise exact.
struct TraceOperators {
    TraceLayout layout;
    CsrMatrix t;         // n_λ × n_u, ⟨μ, φ⟩
    CsrMatrix d;         // n_λ × n_u, ⟨μ, ∂φ/∂n⟩ weighted by h_E
    CsrMatrix n_nn;      // n_u × n_u, ⟨∂φ/∂n, ∂φ/∂n⟩ weighted by h_E
    CsrMatrix m_lambda;  // n_λ × n_λ, ⟨μ, μ⟩ weighted by h_E
    CsrMatrix m_plain;   // n_λ × n_λ, ⟨μ, μ⟩
};

inline TraceOperators trace_operators(const FeSpace& vs, TraceSpace space)
{
    const auto& mesh = vs.mesh();
    TraceOperators op;
    op.layout = trace_layout(mesh, space);
    std::vector<Triplet> tt, td, tn, tm, tp;
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        const auto& be = mesh.boundary_edges[e];
        const auto& tri = mesh.triangles[be.triangle];
        const auto geo = mesh.geometry(be.triangle);
        const double len = distance(mesh.nodes[be.a], mesh.nodes[be.b]);
        const double h_e = len;
        const auto nrm = Mesh::outward_normal(mesh.nodes[be.a], mesh.nodes[be.b]);
        std::array<double, 3> dn{};
        for (std::size_t i = 0; i < 3; ++i) dn[i] = geo.grad_lambda[i][0] * nrm[0] + geo.grad_lambda[i][1] * nrm[1];
        const auto& ld = op.layout.edge_dofs[e];
        for (std::size_t q = 0; q < kGauss3Points.size(); ++q) {
            const double s = kGauss3Points[q];
            const double w = kGauss3Weights[q] * len;
            const auto mu = trace_basis(space, s);
            std::array<double, 3> phi{};
            for (std::size_t i = 0; i < 3; ++i) phi[i] = tri[i] == be.a ? 1.0 - s : (tri[i] == be.b ? s : 0.0);
            for (std::size_t k = 0; k < mu.size(); ++k) {
                for (std::size_t j = 0; j < 3; ++j) {
                    tt.push_back({ld[k], tri[j], w * mu[k] * phi[j]});
                    td.push_back({ld[k], tri[j], h_e * w * mu[k] * dn[j]});
                }
                for (std::size_t l = 0; l < mu.size(); ++l) {
                    tm.push_back({ld[k], ld[l], h_e * w * mu[k] * mu[l]});
                    tp.push_back({ld[k], ld[l], w * mu[k] * mu[l]});
                }
            }
        }
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) tn.push_back({tri[i], tri[j], h_e * len * dn[i] * dn[j]});
    }
    const std::size_t nl = op.layout.n_dofs, nu = vs.n_dofs();
    op.t = linalg::csr_from_triplets(nl, nu, std::move(tt));
    op.d = linalg::csr_from_triplets(nl, nu, std::move(td));
    op.n_nn = linalg::csr_from_triplets(nu, nu, std::move(tn));
    op.m_lambda = linalg::csr_from_triplets(nl, nl, std::move(tm));
    op.m_plain = linalg::csr_from_triplets(nl, nl, std::move(tp));
    return op;
}

/// Boundary loads from analytic data d at the edge quadrature points.
struct BoundaryLoads {
    Vector d_mu;       // ⟨d, μ⟩ per multiplier dof
    Vector d_flux;     // ⟨d, ∂φ/∂n⟩ per u dof
    Vector d_penalty;  // Σ_E (1/h_E)⟨d, φ⟩_E per u dof
};

inline BoundaryLoads boundary_loads(const FeSpace& vs, const TraceLayout* layout, const ScalarFunction& d)
{
    const auto& mesh = vs.mesh();
    BoundaryLoads bl;
    bl.d_flux.assign(vs.n_dofs(), 0.0);
    bl.d_penalty.assign(vs.n_dofs(), 0.0);
    if (layout) {
        bl.d_mu.assign(layout->n_dofs, 0.0);
    }
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        const auto& be = mesh.boundary_edges[e];
        const auto& tri = mesh.triangles[be.triangle];
        const auto geo = mesh.geometry(be.triangle);
        const auto& pa = mesh.nodes[be.a];
        const auto& pb = mesh.nodes[be.b];
        const double len = distance(pa, pb);
        const auto nrm = Mesh::outward_normal(pa, pb);
        for (std::size_t q = 0; q < kGauss3Points.size(); ++q) {
            const double s = kGauss3Points[q];
            const double w = kGauss3Weights[q] * len;
            const double dv = d({(1.0 - s) * pa[0] + s * pb[0], (1.0 - s) * pa[1] + s * pb[1]});
            for (std::size_t i = 0; i < 3; ++i) {
                const double phi = tri[i] == be.a ? 1.0 - s : (tri[i] == be.b ? s : 0.0);
                const double dn = geo.grad_lambda[i][0] * nrm[0] + geo.grad_lambda[i][1] * nrm[1];
                bl.d_flux[tri[i]] += w * dv * dn;
                bl.d_penalty[tri[i]] += w * dv * phi / len;
            }
            if (layout) {
                const auto mu = trace_basis(layout->space, s);
                for (std::size_t k = 0; k < mu.size(); ++k) {
                    bl.d_mu[layout->edge_dofs[e][k]] += w * dv * mu[k];
                }
            }
        }
    }
    return bl;
}

/// Linear system in (u, λ); n_lambda = 0 for Nitsche.
struct WeakBcSystem {
    Method method;
    TraceSpace trace = TraceSpace::P1;
    CsrMatrix matrix;
    Vector rhs;
    std::size_t n_u = 0;
    std::size_t n_lambda = 0;
    std::vector<Point> lambda_coords;
    std::vector<std::pair<std::size_t, std::size_t>> lambda_neighbours;
};

struct WeakBcSolution {
    Vector u;
    Vector lambda;
    double residual_norm = 0.0;
};

namespace detail {

inline void push(std::vector<Triplet>& t, const CsrMatrix& a, std::size_t r0, std::size_t c0, double s, bool tr = false)
{
    for (auto e : a.triplets()) {
        if (tr) t.push_back({r0 + e.col, c0 + e.row, s * e.value});
        else t.push_back({r0 + e.row, c0 + e.col, s * e.value});
    }
}

} // namespace detail

/// Assembles −Δu + u = f with u = d on ∂Ω enforced weakly.
///
/// Multiplier: [[K+M, Tᵀ], [T, 0]].
/// BarbosaHughes: [[K+M − αh·N_nn, Tᵀ − αh·Dᵀ], [T − αh·D, −αh·M_λ]] with h = h_E on each edge.
/// Nitsche: K+M − N − Nᵀ + γ·Σ_E (1/h_E)·M_E.
inline WeakBcSystem build(Method method, const Mesh& mesh, const ScalarFunction& f, const ScalarFunction& d,
                          TraceSpace trace = TraceSpace::P1)
{
    const FeSpace vs(mesh, ElementKind::P1, 1);
    const auto a = linalg::add(stiffness(vs), mass(vs));
    const auto fl = load_vector(vs, f);
    const std::size_t nu = vs.n_dofs();
    WeakBcSystem sys;
    sys.method = method;
    sys.trace = trace;
    sys.n_u = nu;
    std::vector<Triplet> t;
    detail::push(t, a, 0, 0, 1.0);

    if (method.kind == MethodKind::Nitsche) {
        if (!(method.gamma > 0.0)) throw UnsupportedCombination("weakbc: gamma must be positive");
        const auto bo = boundary_operators(vs, method.gamma);
        detail::push(t, bo.normal_flux, 0, 0, -1.0);
        detail::push(t, bo.normal_flux, 0, 0, -1.0, true);
        detail::push(t, bo.penalty, 0, 0, 1.0);
        const auto bl = boundary_loads(vs, nullptr, d);
        sys.rhs = fl;
        for (std::size_t i = 0; i < nu; ++i) sys.rhs[i] += -bl.d_flux[i] + method.gamma * bl.d_penalty[i];
        sys.matrix = linalg::csr_from_triplets(nu, nu, std::move(t));
        return sys;
    }

    if (method.kind == MethodKind::BarbosaHughes && !(method.alpha > 0.0))
        throw UnsupportedCombination("weakbc: alpha must be positive");
    const auto to = trace_operators(vs, trace);
    const std::size_t nl = to.layout.n_dofs;
    const double al = method.kind == MethodKind::BarbosaHughes ? method.alpha : 0.0;
    detail::push(t, to.t, 0, nu, 1.0, true);
    detail::push(t, to.t, nu, 0, 1.0);
    if (al > 0.0) {
        detail::push(t, to.n_nn, 0, 0, -al);
        detail::push(t, to.d, 0, nu, -al, true);
        detail::push(t, to.d, nu, 0, -al);
        detail::push(t, to.m_lambda, nu, nu, -al);
    }
    const auto bl = boundary_loads(vs, &to.layout, d);
    sys.n_lambda = nl;
    sys.lambda_coords = to.layout.dof_coords;
    sys.lambda_neighbours = to.layout.neighbours;
    sys.rhs = fl;
    sys.rhs.insert(sys.rhs.end(), bl.d_mu.begin(), bl.d_mu.end());
    sys.matrix = linalg::csr_from_triplets(nu + nl, nu + nl, std::move(t));
    return sys;
}

inline WeakBcSolution solve(const WeakBcSystem& sys)
{
    const auto x = linalg::solve(sys.matrix, sys.rhs);
    WeakBcSolution sol;
    sol.residual_norm = linalg::relative_residual(sys.matrix, x, sys.rhs);
    sol.u.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(sys.n_u));
    sol.lambda.assign(x.begin() + static_cast<std::ptrdiff_t>(sys.n_u), x.end());
    return sol;
}

/// Exact data of −Δu + u = f.
struct MmsProblem {
    ScalarFunction u;
    std::function<Point(const Point&)> grad_u;
    ScalarFunction f;
    ScalarFunction d;
};

/// u = cos(πx)·cos(πy), f = (2π²+1)·u, d = u on ∂Ω.
inline MmsProblem mms_problem()
{
    using std::numbers::pi;
    MmsProblem p;
    p.u = [](const Point& x) { return std::cos(pi * x[0]) * std::cos(pi * x[1]); };
    p.grad_u = [](const Point& x) -> Point {
        return {-pi * std::sin(pi * x[0]) * std::cos(pi * x[1]), -pi * std::cos(pi * x[0]) * std::sin(pi * x[1])};
    };
    p.f = [](const Point& x) { return (2 * pi * pi + 1) * std::cos(pi * x[0]) * std::cos(pi * x[1]); };
    p.d = p.u;
    return p;
}

struct ScalarErrors {
    double l2 = 0.0;
    double h1 = 0.0;  // seminorm
};

inline ScalarErrors errors(const Mesh& mesh, const Vector& u, const ScalarFunction& ue,
                           const std::function<Point(const Point&)>& grad)
{
    const FeSpace vs(mesh, ElementKind::P1, 1);
    const auto rule = quadrature(6);
    ScalarErrors e;
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        const auto v = mesh.vertices(k);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto x = to_physical(v, rule.points[q]);
            const double w = rule.weights[q] * g.area;
            const double du = vs.evaluate(u, k, rule.points[q]) - ue(x);
            const auto gh = vs.evaluate_gradient(u, k, rule.points[q], g);
            const auto ge = grad(x);
            e.l2 += w * du * du;
            e.h1 += w * ((gh[0] - ge[0]) * (gh[0] - ge[0]) + (gh[1] - ge[1]) * (gh[1] - ge[1]));
        }
    }
    e.l2 = std::sqrt(e.l2);
    e.h1 = std::sqrt(e.h1);
    return e;
}

/// Full H¹ norm of a P1 field: sqrt(uᵀ(K+M)u).
inline double h1_norm(const Mesh& mesh, const Vector& u)
{
    const FeSpace vs(mesh, ElementKind::P1, 1);
    return std::sqrt(std::max(0.0, linalg::add(stiffness(vs), mass(vs)).quadratic_form(u)));
}

struct EquivalenceResult {
    double discrepancy = 0.0;           // ‖u_BH − u_N‖_H1
    double relative_discrepancy = 0.0;  // divided by ‖u_N‖_H1
};

/// BH with multipliers in `trace` against Nitsche with γ = 1/α.
inline EquivalenceResult equivalence_check(const Mesh& mesh, const ScalarFunction& f, const ScalarFunction& d,
                                           double alpha, TraceSpace trace = TraceSpace::P0)
{
    const auto bh = solve(build({MethodKind::BarbosaHughes, alpha, 0.0}, mesh, f, d, trace));
    const auto ni = solve(build({MethodKind::Nitsche, 0.0, 1.0 / alpha}, mesh, f, d));
    Vector diff(bh.u.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = bh.u[i] - ni.u[i];
    EquivalenceResult r;
    r.discrepancy = h1_norm(mesh, diff);
    const double ref = h1_norm(mesh, ni.u);
    r.relative_discrepancy = ref == 0.0 ? r.discrepancy : r.discrepancy / ref;
    return r;
}

/// RMS jump of λ between neighbouring boundary dofs relative to RMS(λ).
inline double lambda_roughness(const WeakBcSystem& sys, const Vector& lambda)
{
    if (lambda.empty() || sys.lambda_neighbours.empty()) return 0.0;
    const double rms = linalg::norm2(lambda) / std::sqrt(double(lambda.size()));
    if (rms == 0.0) return 0.0;
    double acc = 0.0;
    for (auto [i, j] : sys.lambda_neighbours) acc += (lambda[i] - lambda[j]) * (lambda[i] - lambda[j]);
    return std::sqrt(acc / double(sys.lambda_neighbours.size())) / rms;
}

/// Method with default parameters from the inverse constant of `mesh`.
inline Method default_method(MethodKind kind, const Mesh& mesh, Scaling scaling = Scaling::Squared)
{
    if (kind == MethodKind::Multiplier) return {kind, 0.0, 0.0};
    const double ci = inverse_constant(mesh);
    return {kind, default_alpha(ci, scaling), default_gamma(ci, scaling)};
}

/// One level of the manufactured-solution study; non-positive alpha/gamma select the defaults.
inline verify::Level mms_level(Method method, std::size_t n, TraceSpace trace = TraceSpace::P1,
                               Scaling scaling = Scaling::Squared)
{
    const auto mesh = unit_square_mesh(n);
    const auto p = mms_problem();
    const auto def = default_method(method.kind, mesh, scaling);
    if (!(method.alpha > 0.0)) method.alpha = def.alpha;
    if (!(method.gamma > 0.0)) method.gamma = def.gamma;
    const auto sys = build(method, mesh, p.f, p.d, trace);
    const auto sol = solve(sys);
    const auto e = errors(mesh, sol.u, p.u, p.grad_u);
    verify::Level l;
    l.n = n;
    l.h = mesh.h;
    l.errors = {{"err_u_l2", e.l2}, {"err_u_h1", e.h1}};
    return l;
}

} // namespace infsup_lab::weakbc
