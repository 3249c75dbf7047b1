#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "infsup_lab/assembly.hpp"
#include "infsup_lab/fespace.hpp"
#include "infsup_lab/mesh.hpp"

/// Reference assembly used to cross-check the production forms.
///
/// Basis functions are rebuilt per triangle in physical coordinates from a
/// monomial Vandermonde system, and integrals use a collapsed (Duffy) tensor
/// Gauss–Legendre rule; no code is shared with the reference-element path.
namespace infsup_lab::oracle {

/// n-point Gauss–Legendre on [0,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w)
{
    x.assign(std::size_t(n), 0.0);
    w.assign(std::size_t(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-16) break;
        }
        x[std::size_t(i)] = 0.5 * (1.0 - t);
        w[std::size_t(i)] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
}

struct PhysPoint {
    Point x;
    double weight;
};

/// Collapsed tensor rule on a physical triangle; exact to degree 2n−2.
inline std::vector<PhysPoint> triangle_rule(const std::array<Point, 3>& v, int n = 8)
{
    std::vector<double> gx, gw;
    gauss_legendre(n, gx, gw);
    const double area = 0.5 * std::abs((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]));
    std::vector<PhysPoint> out;
    for (std::size_t i = 0; i < gx.size(); ++i)
        for (std::size_t j = 0; j < gx.size(); ++j) {
            // (s,t) in the unit square onto the reference triangle, Jacobian (1−s)
            const double s = gx[i], t = gx[j];
            const double a = s, b = (1.0 - s) * t;
            const Point x{v[0][0] + a * (v[1][0] - v[0][0]) + b * (v[2][0] - v[0][0]),
                          v[0][1] + a * (v[1][1] - v[0][1]) + b * (v[2][1] - v[0][1])};
            out.push_back({x, 2.0 * area * gw[i] * gw[j] * (1.0 - s)});
        }
    return out;
}

/// Local basis of one element in physical coordinates.
class LocalBasis {
public:
    LocalBasis(ElementKind kind, const std::array<Point, 3>& v) : kind_(kind)
    {
        if (kind == ElementKind::P0) return;
        std::vector<Point> nodes(v.begin(), v.end());
        degree_ = kind == ElementKind::P2 ? 2 : 1;
        if (kind == ElementKind::P2)
            for (int k = 0; k < 3; ++k) {
                const auto& a = v[std::size_t(k)];
                const auto& b = v[std::size_t((k + 1) % 3)];
                nodes.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
            }
        const std::size_t m = nodes.size();
        Eigen::MatrixXd vm(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            const auto mono = monomials(nodes[i]);
            for (std::size_t j = 0; j < m; ++j) vm(Eigen::Index(i), Eigen::Index(j)) = mono[j];
        }
        // column j of the inverse holds the monomial coefficients of basis function j
        coef_ = vm.inverse();
    }

    std::vector<double> values(const Point& x) const
    {
        if (kind_ == ElementKind::P0) return {1.0};
        const auto mono = monomials(x);
        std::vector<double> out(std::size_t(coef_.cols()), 0.0);
        for (Eigen::Index j = 0; j < coef_.cols(); ++j)
            for (Eigen::Index i = 0; i < coef_.rows(); ++i) out[std::size_t(j)] += coef_(i, j) * mono[std::size_t(i)];
        if (kind_ == ElementKind::P1Bubble) out.push_back(27.0 * out[0] * out[1] * out[2]);
        return out;
    }

    std::vector<Point> gradients(const Point& x) const
    {
        if (kind_ == ElementKind::P0) return {Point{0.0, 0.0}};
        const auto [dx, dy] = monomial_gradients(x);
        std::vector<Point> out(std::size_t(coef_.cols()), Point{0.0, 0.0});
        for (Eigen::Index j = 0; j < coef_.cols(); ++j)
            for (Eigen::Index i = 0; i < coef_.rows(); ++i) {
                out[std::size_t(j)][0] += coef_(i, j) * dx[std::size_t(i)];
                out[std::size_t(j)][1] += coef_(i, j) * dy[std::size_t(i)];
            }
        if (kind_ == ElementKind::P1Bubble) {
            const auto l = values(x);
            Point g{0.0, 0.0};
            for (int c = 0; c < 2; ++c)
                g[std::size_t(c)] = 27.0 * (out[0][std::size_t(c)] * l[1] * l[2] + l[0] * out[1][std::size_t(c)] * l[2] +
                                            l[0] * l[1] * out[2][std::size_t(c)]);
            out.push_back(g);
        }
        return out;
    }

private:
    std::vector<double> monomials(const Point& p) const
    {
        const double x = p[0], y = p[1];
        if (degree_ == 1) return {1.0, x, y};
        return {1.0, x, y, x * x, x * y, y * y};
    }

    std::pair<std::vector<double>, std::vector<double>> monomial_gradients(const Point& p) const
    {
        const double x = p[0], y = p[1];
        if (degree_ == 1) return {{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
        return {{0.0, 1.0, 0.0, 2.0 * x, y, 0.0}, {0.0, 0.0, 1.0, 0.0, x, 2.0 * y}};
    }

    ElementKind kind_;
    int degree_ = 1;
    Eigen::MatrixXd coef_;
};

using Dense = Eigen::MatrixXd;

inline Dense ref_stiffness(const FeSpace& s)
{
    const auto& mesh = s.mesh();
    Dense a = Dense::Zero(Eigen::Index(s.n_dofs()), Eigen::Index(s.n_dofs()));
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto v = mesh.vertices(k);
        const LocalBasis b(s.kind(), v);
        for (const auto& q : triangle_rule(v)) {
            const auto g = b.gradients(q.x);
            for (std::size_t c = 0; c < s.components(); ++c)
                for (std::size_t i = 0; i < g.size(); ++i)
                    for (std::size_t j = 0; j < g.size(); ++j)
                        a(Eigen::Index(s.dof(k, i, c)), Eigen::Index(s.dof(k, j, c))) +=
                            q.weight * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    return a;
}

inline Dense ref_mass(const FeSpace& s)
{
    const auto& mesh = s.mesh();
    Dense a = Dense::Zero(Eigen::Index(s.n_dofs()), Eigen::Index(s.n_dofs()));
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto v = mesh.vertices(k);
        const LocalBasis b(s.kind(), v);
        for (const auto& q : triangle_rule(v)) {
            const auto phi = b.values(q.x);
            for (std::size_t c = 0; c < s.components(); ++c)
                for (std::size_t i = 0; i < phi.size(); ++i)
                    for (std::size_t j = 0; j < phi.size(); ++j)
                        a(Eigen::Index(s.dof(k, i, c)), Eigen::Index(s.dof(k, j, c))) += q.weight * phi[i] * phi[j];
        }
    }
    return a;
}

/// −(ψ, ∇·φ)
inline Dense ref_divergence(const FeSpace& vs, const FeSpace& ps)
{
    const auto& mesh = vs.mesh();
    Dense a = Dense::Zero(Eigen::Index(ps.n_dofs()), Eigen::Index(vs.n_dofs()));
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto v = mesh.vertices(k);
        const LocalBasis bv(vs.kind(), v), bp(ps.kind(), v);
        for (const auto& q : triangle_rule(v)) {
            const auto g = bv.gradients(q.x);
            const auto psi = bp.values(q.x);
            for (std::size_t i = 0; i < psi.size(); ++i)
                for (std::size_t j = 0; j < g.size(); ++j)
                    for (std::size_t c = 0; c < 2; ++c)
                        a(Eigen::Index(ps.dof(k, i)), Eigen::Index(vs.dof(k, j, c))) -= q.weight * psi[i] * g[j][c];
        }
    }
    return a;
}

/// Σ_K h_K²(∇p, ∇q)_K with h_K the longest edge.
inline Dense ref_pressure_grad_stab(const FeSpace& ps)
{
    const auto& mesh = ps.mesh();
    Dense a = Dense::Zero(Eigen::Index(ps.n_dofs()), Eigen::Index(ps.n_dofs()));
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto v = mesh.vertices(k);
        double hk = 0.0;
        for (int e = 0; e < 3; ++e) hk = std::max(hk, std::hypot(v[std::size_t(e)][0] - v[std::size_t((e + 1) % 3)][0],
                                                                 v[std::size_t(e)][1] - v[std::size_t((e + 1) % 3)][1]));
        const LocalBasis b(ps.kind(), v);
        for (const auto& q : triangle_rule(v)) {
            const auto g = b.gradients(q.x);
            for (std::size_t i = 0; i < g.size(); ++i)
                for (std::size_t j = 0; j < g.size(); ++j)
                    a(Eigen::Index(ps.dof(k, i)), Eigen::Index(ps.dof(k, j))) +=
                        hk * hk * q.weight * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    return a;
}

/// (φ_z, ∇ψ_p), n_z × n_p
inline Dense ref_grad_coupling(const FeSpace& ps, const FeSpace& zs)
{
    const auto& mesh = ps.mesh();
    Dense a = Dense::Zero(Eigen::Index(zs.n_dofs()), Eigen::Index(ps.n_dofs()));
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto v = mesh.vertices(k);
        const LocalBasis bz(zs.kind(), v), bp(ps.kind(), v);
        for (const auto& q : triangle_rule(v)) {
            const auto phi = bz.values(q.x);
            const auto g = bp.gradients(q.x);
            for (std::size_t j = 0; j < phi.size(); ++j)
                for (std::size_t i = 0; i < g.size(); ++i)
                    for (std::size_t c = 0; c < 2; ++c)
                        a(Eigen::Index(zs.dof(k, j, c)), Eigen::Index(ps.dof(k, i))) += q.weight * phi[j] * g[i][c];
        }
    }
    return a;
}

struct BoundaryForms {
    Dense mass_gamma, normal_flux, normal_normal, penalty;
};

/// Edge integrals with an 8-point rule; the normal points away from the opposite vertex.
inline BoundaryForms boundary_forms(const FeSpace& s, double gamma)
{
    const auto& mesh = s.mesh();
    const auto n = Eigen::Index(s.n_dofs());
    BoundaryForms f{Dense::Zero(n, n), Dense::Zero(n, n), Dense::Zero(n, n), Dense::Zero(n, n)};
    std::vector<double> gx, gw;
    gauss_legendre(8, gx, gw);
    for (const auto& be : mesh.boundary_edges) {
        const auto v = mesh.vertices(be.triangle);
        const LocalBasis b(s.kind(), v);
        const auto& pa = mesh.nodes[be.a];
        const auto& pb = mesh.nodes[be.b];
        const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
        Point nrm{(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len};
        const Point c = mesh.barycenter(be.triangle);
        if (nrm[0] * (pa[0] - c[0]) + nrm[1] * (pa[1] - c[1]) < 0.0) nrm = {-nrm[0], -nrm[1]};
        const auto& tri = mesh.triangles[be.triangle];
        for (std::size_t q = 0; q < gx.size(); ++q) {
            const Point x{pa[0] + gx[q] * (pb[0] - pa[0]), pa[1] + gx[q] * (pb[1] - pa[1])};
            const double w = gw[q] * len;
            const auto phi = b.values(x);
            const auto g = b.gradients(x);
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) {
                    const auto I = Eigen::Index(tri[i]), J = Eigen::Index(tri[j]);
                    const double dni = g[i][0] * nrm[0] + g[i][1] * nrm[1];
                    const double dnj = g[j][0] * nrm[0] + g[j][1] * nrm[1];
                    f.mass_gamma(I, J) += w * phi[i] * phi[j];
                    f.normal_flux(I, J) += w * phi[i] * dnj;
                    f.normal_normal(I, J) += w * dni * dnj;
                    f.penalty(I, J) += gamma / len * w * phi[i] * phi[j];
                }
        }
    }
    return f;
}

inline Dense to_eigen(const CsrMatrix& a)
{
    Dense d = Dense::Zero(Eigen::Index(a.rows), Eigen::Index(a.cols));
    for (const auto& t : a.triplets()) d(Eigen::Index(t.row), Eigen::Index(t.col)) += t.value;
    return d;
}

struct FormCheck {
    std::string name;
    double relative_error = 0.0;  // max-entry difference over max entry
};

inline double relative_difference(const CsrMatrix& a, const Dense& ref)
{
    const double scale = ref.cwiseAbs().maxCoeff();
    const double diff = (to_eigen(a) - ref).cwiseAbs().maxCoeff();
    return scale == 0.0 ? diff : diff / scale;
}

/// Every bilinear form of the assembly layer against the reference on an n×n mesh.
inline std::vector<FormCheck> check_all_forms(std::size_t n = 2)
{
    const auto mesh = unit_square_mesh(n);
    std::vector<FormCheck> out;
    const auto name = [](const char* form, ElementKind k, std::size_t comps) {
        return std::string(form) + "/" + std::string(to_string(k)) + (comps == 2 ? "x2" : "");
    };
    for (auto kind : {ElementKind::P1, ElementKind::P1Bubble, ElementKind::P2})
        for (std::size_t c : {1u, 2u}) {
            const FeSpace s(mesh, kind, c);
            out.push_back({name("stiffness", kind, c), relative_difference(infsup_lab::stiffness(s), ref_stiffness(s))});
        }
    for (auto kind : {ElementKind::P0, ElementKind::P1, ElementKind::P1Bubble, ElementKind::P2})
        for (std::size_t c : {1u, 2u}) {
            const FeSpace s(mesh, kind, c);
            out.push_back({name("mass", kind, c), relative_difference(infsup_lab::mass(s), ref_mass(s))});
        }
    const std::array<std::pair<ElementKind, ElementKind>, 5> pairs{{{ElementKind::P2, ElementKind::P1},
                                                                    {ElementKind::P1Bubble, ElementKind::P1},
                                                                    {ElementKind::P1, ElementKind::P1},
                                                                    {ElementKind::P1, ElementKind::P0},
                                                                    {ElementKind::P2, ElementKind::P0}}};
    for (const auto& [vk, pk] : pairs) {
        const FeSpace vs(mesh, vk, 2), ps(mesh, pk, 1);
        out.push_back({"divergence/" + std::string(to_string(vk)) + "-" + std::string(to_string(pk)),
                       relative_difference(infsup_lab::divergence(vs, ps), ref_divergence(vs, ps))});
    }
    const FeSpace p1(mesh, ElementKind::P1, 1), z1(mesh, ElementKind::P1, 2);
    out.push_back({"pressure_grad_stab/P1", relative_difference(infsup_lab::pressure_grad_stab(p1), ref_pressure_grad_stab(p1))});
    out.push_back({"grad_coupling/P1-P1x2", relative_difference(infsup_lab::grad_coupling(p1, z1), ref_grad_coupling(p1, z1))});
    const double gamma = 3.5;
    const auto bo = infsup_lab::boundary_operators(p1, gamma);
    const auto rf = boundary_forms(p1, gamma);
    out.push_back({"boundary_mass/P1", relative_difference(bo.mass_gamma, rf.mass_gamma)});
    out.push_back({"normal_flux/P1", relative_difference(bo.normal_flux, rf.normal_flux)});
    out.push_back({"normal_normal/P1", relative_difference(bo.normal_normal, rf.normal_normal)});
    out.push_back({"nitsche_penalty/P1", relative_difference(bo.penalty, rf.penalty)});
    return out;
}

} // namespace infsup_lab::oracle
