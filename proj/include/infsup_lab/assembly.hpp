#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "infsup_lab/errors.hpp"
#include "infsup_lab/fespace.hpp"
#include "infsup_lab/linalg/csr.hpp"
#include "infsup_lab/mesh.hpp"

namespace infsup_lab {

using linalg::CsrMatrix;
using linalg::Triplet;
using linalg::Vector;

/// Block system [[A, Bᵀ], [B, −C]]·(u, p) = (f, g), optionally bordered by a
/// pressure-mean constraint row/column.
struct SaddleSystem {
    CsrMatrix a;
    CsrMatrix b;
    CsrMatrix c;
    Vector f;
    Vector g;
    std::optional<Vector> mean_vector;
    std::vector<std::size_t> dirichlet_dofs;
    /// −1 stores the second block row negated, [−B, C]·(u,p) = −g (non-symmetric layout).
    double constraint_row_sign = 1.0;

    std::size_t n_u() const noexcept { return a.rows; }
    std::size_t n_p() const noexcept { return b.rows; }
    std::size_t size() const noexcept { return n_u() + n_p() + (mean_vector ? 1 : 0); }
};

/// Full block matrix with the optional mean row/column appended last.
inline CsrMatrix block_matrix(const SaddleSystem& s)
{
    const std::size_t nu = s.n_u(), np = s.n_p();
    const double sg = s.constraint_row_sign;
    std::vector<Triplet> t;
    t.reserve(s.a.nnz() + 2 * s.b.nnz() + s.c.nnz() + 2 * np);
    for (auto e : s.a.triplets()) t.push_back(e);
    for (auto e : s.b.triplets()) {
        t.push_back({e.col, nu + e.row, e.value});
        t.push_back({nu + e.row, e.col, sg * e.value});
    }
    for (auto e : s.c.triplets()) t.push_back({nu + e.row, nu + e.col, -sg * e.value});
    std::size_t n = nu + np;
    if (s.mean_vector) {
        for (std::size_t q = 0; q < np; ++q) {
            const double m = (*s.mean_vector)[q];
            if (m == 0.0) continue;
            t.push_back({nu + q, n, m});
            t.push_back({n, nu + q, m});
        }
        ++n;
    }
    return linalg::csr_from_triplets(n, n, std::move(t));
}

inline Vector block_rhs(const SaddleSystem& s)
{
    Vector r(s.size(), 0.0);
    std::copy(s.f.begin(), s.f.end(), r.begin());
    for (std::size_t q = 0; q < s.n_p(); ++q) r[s.n_u() + q] = s.constraint_row_sign * s.g[q];
    return r;
}

namespace detail {

constexpr int polynomial_order(ElementKind k) noexcept
{
    switch (k) {
    case ElementKind::P0: return 0;
    case ElementKind::P1: return 1;
    case ElementKind::P2: return 2;
    case ElementKind::P1Bubble: return 3;
    }
    return 0;
}

inline int rule_degree(int needed) { return std::clamp(needed, 1, 6); }

} // namespace detail

/// (∇u, ∇v) on the space; block diagonal over components for vector spaces.
inline CsrMatrix stiffness(const FeSpace& space)
{
    if (space.kind() == ElementKind::P0) throw UnsupportedCombination("stiffness: P0 has no gradient");
    const auto& mesh = space.mesh();
    const auto rule = quadrature(detail::rule_degree(2 * (detail::polynomial_order(space.kind()) - 1)));
    const std::size_t nl = space.n_local();
    std::vector<Triplet> t;
    t.reserve(mesh.n_triangles() * nl * nl * space.components());
    std::vector<double> ke(nl * nl);
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        std::fill(ke.begin(), ke.end(), 0.0);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto d = shape_gradients(space.kind(), rule.points[q], g);
            const double w = rule.weights[q] * g.area;
            for (std::size_t i = 0; i < nl; ++i)
                for (std::size_t j = 0; j < nl; ++j) ke[i * nl + j] += w * (d[i][0] * d[j][0] + d[i][1] * d[j][1]);
        }
        for (std::size_t c = 0; c < space.components(); ++c)
            for (std::size_t i = 0; i < nl; ++i)
                for (std::size_t j = 0; j < nl; ++j) t.push_back({space.dof(k, i, c), space.dof(k, j, c), ke[i * nl + j]});
    }
    return linalg::csr_from_triplets(space.n_dofs(), space.n_dofs(), std::move(t));
}

/// Consistent mass (u, v).
inline CsrMatrix mass(const FeSpace& space)
{
    const auto& mesh = space.mesh();
    const auto rule = quadrature(detail::rule_degree(2 * detail::polynomial_order(space.kind())));
    const std::size_t nl = space.n_local();
    std::vector<Triplet> t;
    t.reserve(mesh.n_triangles() * nl * nl * space.components());
    std::vector<double> me(nl * nl);
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        std::fill(me.begin(), me.end(), 0.0);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto phi = shape_values(space.kind(), rule.points[q]);
            const double w = rule.weights[q] * g.area;
            for (std::size_t i = 0; i < nl; ++i)
                for (std::size_t j = 0; j < nl; ++j) me[i * nl + j] += w * phi[i] * phi[j];
        }
        for (std::size_t c = 0; c < space.components(); ++c)
            for (std::size_t i = 0; i < nl; ++i)
                for (std::size_t j = 0; j < nl; ++j) t.push_back({space.dof(k, i, c), space.dof(k, j, c), me[i * nl + j]});
    }
    return linalg::csr_from_triplets(space.n_dofs(), space.n_dofs(), std::move(t));
}

/// Row sums of the consistent mass.
inline Vector lumped_mass(const FeSpace& space)
{
    const auto m = mass(space);
    Vector d(m.rows, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) d[i] += m.values[k];
    return d;
}

/// B[q, v] = −(ψ_q, ∇·φ_v); n_p rows, n_u columns.
inline CsrMatrix divergence(const FeSpace& v_space, const FeSpace& p_space)
{
    if (v_space.components() != 2 || p_space.components() != 1)
        throw UnsupportedCombination("divergence: needs a vector velocity and a scalar pressure space");
    if (&v_space.mesh() != &p_space.mesh()) throw UnsupportedCombination("divergence: spaces on different meshes");
    const auto& mesh = v_space.mesh();
    const auto rule = quadrature(detail::rule_degree(detail::polynomial_order(p_space.kind()) +
                                                     detail::polynomial_order(v_space.kind()) - 1));
    const std::size_t nv = v_space.n_local(), np = p_space.n_local();
    std::vector<Triplet> t;
    t.reserve(mesh.n_triangles() * nv * np * 2);
    std::vector<double> be(np * nv * 2);
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        std::fill(be.begin(), be.end(), 0.0);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto psi = shape_values(p_space.kind(), rule.points[q]);
            const auto d = shape_gradients(v_space.kind(), rule.points[q], g);
            const double w = rule.weights[q] * g.area;
            for (std::size_t i = 0; i < np; ++i)
                for (std::size_t j = 0; j < nv; ++j)
                    for (std::size_t c = 0; c < 2; ++c) be[(i * nv + j) * 2 + c] -= w * psi[i] * d[j][c];
        }
        for (std::size_t i = 0; i < np; ++i)
            for (std::size_t j = 0; j < nv; ++j)
                for (std::size_t c = 0; c < 2; ++c)
                    t.push_back({p_space.dof(k, i), v_space.dof(k, j, c), be[(i * nv + j) * 2 + c]});
    }
    return linalg::csr_from_triplets(p_space.n_dofs(), v_space.n_dofs(), std::move(t));
}

/// Σ_K w_K·(∇p, ∇q)_K for a P1 pressure space with per-element weights w_K.
inline CsrMatrix weighted_gradient_form(const FeSpace& p_space, std::span<const double> weights)
{
    if (p_space.kind() != ElementKind::P1 || p_space.components() != 1)
        throw UnsupportedCombination("pressure stabilization needs a scalar P1 space");
    const auto& mesh = p_space.mesh();
    std::vector<Triplet> t;
    t.reserve(mesh.n_triangles() * 9);
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                const auto& a = g.grad_lambda[i];
                const auto& b = g.grad_lambda[j];
                t.push_back({p_space.dof(k, i), p_space.dof(k, j), weights[k] * g.area * (a[0] * b[0] + a[1] * b[1])});
            }
    }
    return linalg::csr_from_triplets(p_space.n_dofs(), p_space.n_dofs(), std::move(t));
}

/// S = Σ_K h_K²·(∇p, ∇q)_K
inline CsrMatrix pressure_grad_stab(const FeSpace& p_space)
{
    std::vector<double> w(p_space.mesh().h_k.size());
    std::transform(p_space.mesh().h_k.begin(), p_space.mesh().h_k.end(), w.begin(), [](double h) { return h * h; });
    return weighted_gradient_form(p_space, w);
}

/// G[z, p] = (φ_z, ∇ψ_p) for a P1 pressure and a vector z-space; n_z rows, n_p columns.
inline CsrMatrix grad_coupling(const FeSpace& p_space, const FeSpace& v_space)
{
    if (p_space.kind() != ElementKind::P1 || p_space.components() != 1 || v_space.components() != 2)
        throw UnsupportedCombination("grad_coupling: needs scalar P1 pressure and a vector space");
    const auto& mesh = v_space.mesh();
    const auto rule = quadrature(detail::rule_degree(detail::polynomial_order(v_space.kind())));
    const std::size_t nv = v_space.n_local();
    std::vector<Triplet> t;
    t.reserve(mesh.n_triangles() * nv * 3 * 2);
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        std::vector<double> phi_int(nv, 0.0);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto phi = shape_values(v_space.kind(), rule.points[q]);
            for (std::size_t j = 0; j < nv; ++j) phi_int[j] += rule.weights[q] * g.area * phi[j];
        }
        for (std::size_t j = 0; j < nv; ++j)
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t c = 0; c < 2; ++c)
                    t.push_back({v_space.dof(k, j, c), p_space.dof(k, i), phi_int[j] * g.grad_lambda[i][c]});
    }
    return linalg::csr_from_triplets(v_space.n_dofs(), p_space.n_dofs(), std::move(t));
}

/// (f, φ) for a vector load on a vector space, degree-6 quadrature.
inline Vector load_vector(const FeSpace& space, const VectorFunction& f)
{
    if (space.components() != 2) throw UnsupportedCombination("load_vector: vector load needs a vector space");
    const auto& mesh = space.mesh();
    const auto rule = quadrature(6);
    Vector out(space.n_dofs(), 0.0);
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        const auto v = mesh.vertices(k);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto phi = shape_values(space.kind(), rule.points[q]);
            const auto fx = f(to_physical(v, rule.points[q]));
            const double w = rule.weights[q] * g.area;
            for (std::size_t j = 0; j < phi.size(); ++j)
                for (std::size_t c = 0; c < 2; ++c) out[space.dof(k, j, c)] += w * fx[c] * phi[j];
        }
    }
    return out;
}

inline Vector load_vector(const FeSpace& space, const ScalarFunction& f)
{
    const auto& mesh = space.mesh();
    const auto rule = quadrature(6);
    Vector out(space.n_dofs(), 0.0);
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        const auto v = mesh.vertices(k);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto phi = shape_values(space.kind(), rule.points[q]);
            const double w = rule.weights[q] * g.area * f(to_physical(v, rule.points[q]));
            for (std::size_t j = 0; j < phi.size(); ++j) out[space.dof(k, j)] += w * phi[j];
        }
    }
    return out;
}

/// Σ_K w_K·(f, ∇ψ_q)_K for a P1 pressure space.
inline Vector weighted_gradient_load(const FeSpace& p_space, const VectorFunction& f, std::span<const double> weights)
{
    const auto& mesh = p_space.mesh();
    const auto rule = quadrature(6);
    Vector out(p_space.n_dofs(), 0.0);
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto g = mesh.geometry(k);
        const auto v = mesh.vertices(k);
        Point fint{0.0, 0.0};
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto fx = f(to_physical(v, rule.points[q]));
            fint[0] += rule.weights[q] * g.area * fx[0];
            fint[1] += rule.weights[q] * g.area * fx[1];
        }
        for (std::size_t i = 0; i < 3; ++i)
            out[p_space.dof(k, i)] += weights[k] * (fint[0] * g.grad_lambda[i][0] + fint[1] * g.grad_lambda[i][1]);
    }
    return out;
}

/// m_q = ∫ψ_q
inline Vector mean_vector(const FeSpace& p_space)
{
    return load_vector(p_space, ScalarFunction([](const Point&) { return 1.0; }));
}

/// Boundary operators of a scalar P1 space, all n×n over the full space.
struct BoundaryOperators {
    CsrMatrix mass_gamma;     // Σ_E ⟨φ_i, φ_j⟩_E
    CsrMatrix normal_flux;    // [i, j] = ⟨∂φ_j/∂n, φ_i⟩_Γ
    CsrMatrix normal_normal;  // [i, j] = ⟨∂φ_i/∂n, ∂φ_j/∂n⟩_Γ
    CsrMatrix penalty;        // γ·Σ_E (1/h_E)⟨φ_i, φ_j⟩_E
};

/// Two-point Gauss rule on [0,1], exact for cubic integrands along an edge.
inline constexpr std::array<double, 2> kEdgeGaussPoints{0.5 - 0.28867513459481287, 0.5 + 0.28867513459481287};

inline BoundaryOperators boundary_operators(const FeSpace& space, double gamma_coeff = 1.0)
{
    if (space.kind() != ElementKind::P1 || space.components() != 1)
        throw UnsupportedCombination("boundary_operators: needs a scalar P1 space");
    const auto& mesh = space.mesh();
    std::vector<Triplet> tm, tn, tnn, tp;
    for (const auto& be : mesh.boundary_edges) {
        const auto& tri = mesh.triangles[be.triangle];
        const auto g = mesh.geometry(be.triangle);
        const auto& pa = mesh.nodes[be.a];
        const auto& pb = mesh.nodes[be.b];
        const double len = distance(pa, pb);
        const Point nrm = Mesh::outward_normal(pa, pb);
        std::array<double, 3> dn{};
        for (std::size_t i = 0; i < 3; ++i) dn[i] = g.grad_lambda[i][0] * nrm[0] + g.grad_lambda[i][1] * nrm[1];
        // exact edge mass of the two trace functions: len/6·[[2,1],[1,2]]
        const std::array<std::size_t, 2> ends{be.a, be.b};
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                double v = 0.0;
                for (double s : kEdgeGaussPoints) {
                    const double phi_i = i == 0 ? 1.0 - s : s;
                    const double phi_j = j == 0 ? 1.0 - s : s;
                    v += 0.5 * len * phi_i * phi_j;
                }
                tm.push_back({ends[i], ends[j], v});
                tp.push_back({ends[i], ends[j], gamma_coeff * v / len});
            }
        // ∂φ_j/∂n is constant on the edge; ∫_E φ_i = len/2 for the two end nodes.
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 3; ++j) tn.push_back({ends[i], tri[j], 0.5 * len * dn[j]});
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) tnn.push_back({tri[i], tri[j], len * dn[i] * dn[j]});
    }
    const std::size_t n = space.n_dofs();
    return {linalg::csr_from_triplets(n, n, std::move(tm)), linalg::csr_from_triplets(n, n, std::move(tn)),
            linalg::csr_from_triplets(n, n, std::move(tnn)), linalg::csr_from_triplets(n, n, std::move(tp))};
}

/// Strong Dirichlet elimination keeping symmetry: constrained rows/columns of A
/// become identity, their known values move to the right-hand sides, and the
/// matching columns of B are zeroed.
inline SaddleSystem apply_dirichlet(SaddleSystem s, std::span<const std::size_t> dofs, std::span<const double> values)
{
    if (dofs.size() != values.size()) throw DimensionMismatch("apply_dirichlet: dofs/values length mismatch");
    if (dofs.empty()) return s;
    const std::size_t nu = s.n_u();
    std::vector<char> fixed(nu, 0);
    Vector val(nu, 0.0);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
        if (dofs[k] >= nu) throw IndexOutOfRange("apply_dirichlet: dof out of range");
        fixed[dofs[k]] = 1;
        val[dofs[k]] = values[k];
    }
    const auto av = s.a.multiply(val);
    const auto bv = s.b.multiply(val);
    for (std::size_t i = 0; i < nu; ++i) s.f[i] = fixed[i] ? val[i] : s.f[i] - av[i];
    for (std::size_t q = 0; q < s.n_p(); ++q) s.g[q] -= bv[q];

    std::vector<Triplet> ta;
    for (auto e : s.a.triplets())
        if (!fixed[e.row] && !fixed[e.col]) ta.push_back(e);
    for (std::size_t i = 0; i < nu; ++i)
        if (fixed[i]) ta.push_back({i, i, 1.0});
    s.a = linalg::csr_from_triplets(nu, nu, std::move(ta));
    std::vector<Triplet> tb;
    for (auto e : s.b.triplets())
        if (!fixed[e.col]) tb.push_back(e);
    s.b = linalg::csr_from_triplets(s.b.rows, s.b.cols, std::move(tb));
    for (auto d : dofs) s.dirichlet_dofs.push_back(d);
    std::sort(s.dirichlet_dofs.begin(), s.dirichlet_dofs.end());
    s.dirichlet_dofs.erase(std::unique(s.dirichlet_dofs.begin(), s.dirichlet_dofs.end()), s.dirichlet_dofs.end());
    return s;
}

} // namespace infsup_lab
