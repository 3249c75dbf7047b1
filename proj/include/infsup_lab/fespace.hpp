#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infsup_lab/errors.hpp"
#include "infsup_lab/mesh.hpp"

namespace infsup_lab {

enum class ElementKind { P0, P1, P1Bubble, P2 };

constexpr std::size_t local_dof_count(ElementKind k) noexcept
{
    switch (k) {
    case ElementKind::P0: return 1;
    case ElementKind::P1: return 3;
    case ElementKind::P1Bubble: return 4;
    case ElementKind::P2: return 6;
    }
    return 0;
}

constexpr std::string_view to_string(ElementKind k) noexcept
{
    switch (k) {
    case ElementKind::P0: return "P0";
    case ElementKind::P1: return "P1";
    case ElementKind::P1Bubble: return "P1Bubble";
    case ElementKind::P2: return "P2";
    }
    return "?";
}

using Barycentric = std::array<double, 3>;

/// Basis values at a barycentric point.
///
/// Local ordering: vertices 0,1,2 first; for P2 then the midpoints of local
/// edges (0,1), (1,2), (2,0); for P1Bubble then the bubble 27·λ0·λ1·λ2.
inline std::vector<double> shape_values(ElementKind kind, const Barycentric& l)
{
    switch (kind) {
    case ElementKind::P0: return {1.0};
    case ElementKind::P1: return {l[0], l[1], l[2]};
    case ElementKind::P1Bubble: return {l[0], l[1], l[2], 27.0 * l[0] * l[1] * l[2]};
    case ElementKind::P2:
        return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
                4.0 * l[0] * l[1],         4.0 * l[1] * l[2],         4.0 * l[2] * l[0]};
    }
    return {};
}

/// Physical gradients of the basis, by the chain rule through ∇λ.
inline std::vector<Point> shape_gradients(ElementKind kind, const Barycentric& l, const TriangleGeometry& g)
{
    const auto& gl = g.grad_lambda;
    const auto comb = [](double a, const Point& u, double b, const Point& v) -> Point {
        return {a * u[0] + b * v[0], a * u[1] + b * v[1]};
    };
    switch (kind) {
    case ElementKind::P0: return {Point{0.0, 0.0}};
    case ElementKind::P1: return {gl[0], gl[1], gl[2]};
    case ElementKind::P1Bubble: {
        const Point gb01 = comb(l[1], gl[0], l[0], gl[1]);  // ∇(λ0λ1)
        const Point gb = comb(l[2], gb01, l[0] * l[1], gl[2]);
        return {gl[0], gl[1], gl[2], {27.0 * gb[0], 27.0 * gb[1]}};
    }
    case ElementKind::P2: {
        std::vector<Point> d(6);
        for (std::size_t i = 0; i < 3; ++i) d[i] = comb(4.0 * l[i] - 1.0, gl[i], 0.0, gl[i]);
        for (std::size_t k = 0; k < 3; ++k) {
            const std::size_t i = k, j = (k + 1) % 3;
            d[3 + k] = comb(4.0 * l[j], gl[i], 4.0 * l[i], gl[j]);
        }
        return d;
    }
    }
    return {};
}

/// Triangle quadrature in barycentric coordinates; weights sum to one (multiply by the area).
struct QuadratureRule {
    std::vector<Barycentric> points;
    std::vector<double> weights;
    int degree = 0;
};

namespace detail {

inline void add_orbit3(QuadratureRule& q, double a, double b, double w)
{
    q.points.push_back({a, b, b});
    q.points.push_back({b, a, b});
    q.points.push_back({b, b, a});
    for (int i = 0; i < 3; ++i) q.weights.push_back(w);
}

inline void add_orbit6(QuadratureRule& q, double a, double b, double c, double w)
{
    const std::array<Barycentric, 6> pts{{{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}};
    for (const auto& p : pts) {
        q.points.push_back(p);
        q.weights.push_back(w);
    }
}

} // namespace detail

/// Symmetric rule exact for polynomials of total degree ≤ `degree` (≤ 6).
inline QuadratureRule quadrature(int degree)
{
    QuadratureRule q;
    if (degree < 0 || degree > 6) throw UnsupportedDegree("quadrature: degree " + std::to_string(degree) + " > 6");
    if (degree <= 1) {
        q.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
        q.weights = {1.0};
        q.degree = 1;
    } else if (degree == 2) {
        detail::add_orbit3(q, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
        q.degree = 2;
    } else if (degree <= 4) {
        // Dunavant, 6 points
        detail::add_orbit3(q, 0.108103018168070, 0.445948490915965, 0.223381589678011);
        detail::add_orbit3(q, 0.816847572980459, 0.091576213509771, 0.109951743655322);
        q.degree = 4;
    } else if (degree == 5) {
        // Radon, 7 points
        const double s15 = std::sqrt(15.0);
        q.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
        q.weights.push_back(9.0 / 40.0);
        const double a1 = (6.0 - s15) / 21.0, a2 = (6.0 + s15) / 21.0;
        detail::add_orbit3(q, 1.0 - 2.0 * a1, a1, (155.0 - s15) / 1200.0);
        detail::add_orbit3(q, 1.0 - 2.0 * a2, a2, (155.0 + s15) / 1200.0);
        q.degree = 5;
    } else {
        // Dunavant, 12 points
        detail::add_orbit3(q, 0.501426509658179, 0.249286745170910, 0.116786275726379);
        detail::add_orbit3(q, 0.873821971016996, 0.063089014491502, 0.050844906370207);
        detail::add_orbit6(q, 0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
        q.degree = 6;
    }
    return q;
}

inline Point to_physical(const std::array<Point, 3>& v, const Barycentric& l)
{
    return {l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0], l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1]};
}

/// Finite-element space on a mesh: scalar (1 component) or vector (2 components).
///
/// Vector spaces are component-major: dof = component·n_scalar_dofs + scalar dof.
/// The mesh must outlive the space.
class FeSpace {
public:
    FeSpace(const Mesh& mesh, ElementKind kind, std::size_t components = 1)
        : mesh_(&mesh), kind_(kind), components_(components)
    {
        if (components != 1 && components != 2) throw Error("FeSpace: components must be 1 or 2");
        const std::size_t nn = mesh.n_nodes(), nt = mesh.n_triangles();
        cell_dofs_.resize(nt);
        switch (kind) {
        case ElementKind::P0:
            n_scalar_ = nt;
            for (std::size_t t = 0; t < nt; ++t) {
                cell_dofs_[t] = {t};
                coords_.push_back(mesh.barycenter(t));
            }
            break;
        case ElementKind::P1:
        case ElementKind::P1Bubble:
            n_scalar_ = nn + (kind == ElementKind::P1Bubble ? nt : 0);
            coords_ = mesh.nodes;
            for (std::size_t t = 0; t < nt; ++t) {
                const auto& tri = mesh.triangles[t];
                cell_dofs_[t] = {tri[0], tri[1], tri[2]};
                if (kind == ElementKind::P1Bubble) {
                    cell_dofs_[t].push_back(nn + t);
                    coords_.push_back(mesh.barycenter(t));
                }
            }
            for (std::size_t i = 0; i < nn; ++i)
                if (mesh.is_boundary_node(i)) scalar_boundary_.push_back(i);
            break;
        case ElementKind::P2:
            n_scalar_ = nn + mesh.edges.size();
            coords_ = mesh.nodes;
            for (const auto& e : mesh.edges)
                coords_.push_back({0.5 * (mesh.nodes[e.a][0] + mesh.nodes[e.b][0]),
                                   0.5 * (mesh.nodes[e.a][1] + mesh.nodes[e.b][1])});
            for (std::size_t t = 0; t < nt; ++t) {
                const auto& tri = mesh.triangles[t];
                const auto& te = mesh.triangle_edges[t];
                cell_dofs_[t] = {tri[0], tri[1], tri[2], nn + te[0], nn + te[1], nn + te[2]};
            }
            for (std::size_t i = 0; i < nn; ++i)
                if (mesh.is_boundary_node(i)) scalar_boundary_.push_back(i);
            for (std::size_t e = 0; e < mesh.edges.size(); ++e)
                if (mesh.edges[e].on_boundary()) scalar_boundary_.push_back(nn + e);
            break;
        }
        std::sort(scalar_boundary_.begin(), scalar_boundary_.end());
        for (std::size_t c = 0; c < components_; ++c)
            for (auto d : scalar_boundary_) boundary_.push_back(c * n_scalar_ + d);
    }

    const Mesh& mesh() const noexcept { return *mesh_; }
    ElementKind kind() const noexcept { return kind_; }
    std::size_t components() const noexcept { return components_; }
    std::size_t n_scalar_dofs() const noexcept { return n_scalar_; }
    std::size_t n_dofs() const noexcept { return n_scalar_ * components_; }
    std::size_t n_local() const noexcept { return local_dof_count(kind_); }

    /// Scalar dof indices of triangle t in local order.
    const std::vector<std::size_t>& cell_dofs(std::size_t t) const { return cell_dofs_[t]; }
    std::size_t dof(std::size_t t, std::size_t local, std::size_t component = 0) const
    {
        return component * n_scalar_ + cell_dofs_[t][local];
    }

    /// Sorted dofs (all components) lying on the boundary.
    const std::vector<std::size_t>& boundary_dofs() const noexcept { return boundary_; }
    const std::vector<std::size_t>& scalar_boundary_dofs() const noexcept { return scalar_boundary_; }

    /// Dofs (all components) not on the boundary, sorted.
    std::vector<std::size_t> free_dofs() const
    {
        std::vector<char> fixed(n_dofs(), 0);
        for (auto d : boundary_) fixed[d] = 1;
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < n_dofs(); ++i)
            if (!fixed[i]) out.push_back(i);
        return out;
    }

    const std::vector<Point>& dof_coords() const noexcept { return coords_; }

    bool is_continuous() const noexcept { return kind_ != ElementKind::P0; }

    /// Value of component `c` of a field at barycentric point l of triangle t.
    double evaluate(std::span<const double> coeffs, std::size_t t, const Barycentric& l, std::size_t c = 0) const
    {
        const auto phi = shape_values(kind_, l);
        double v = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) v += coeffs[dof(t, i, c)] * phi[i];
        return v;
    }

    Point evaluate_gradient(std::span<const double> coeffs, std::size_t t, const Barycentric& l,
                            const TriangleGeometry& g, std::size_t c = 0) const
    {
        const auto dphi = shape_gradients(kind_, l, g);
        Point v{0.0, 0.0};
        for (std::size_t i = 0; i < dphi.size(); ++i) {
            const double u = coeffs[dof(t, i, c)];
            v[0] += u * dphi[i][0];
            v[1] += u * dphi[i][1];
        }
        return v;
    }

private:
    const Mesh* mesh_;
    ElementKind kind_;
    std::size_t components_;
    std::size_t n_scalar_ = 0;
    std::vector<std::vector<std::size_t>> cell_dofs_;
    std::vector<std::size_t> scalar_boundary_;
    std::vector<std::size_t> boundary_;
    std::vector<Point> coords_;
};

using ScalarFunction = std::function<double(const Point&)>;
using VectorFunction = std::function<Point(const Point&)>;

/// Nodal interpolation of a scalar function. Bubble coefficients match the value at the barycenter.
inline std::vector<double> interpolate(const FeSpace& space, const ScalarFunction& f, std::size_t component = 0)
{
    std::vector<double> out(space.n_dofs(), 0.0);
    const std::size_t ns = space.n_scalar_dofs();
    const auto& xy = space.dof_coords();
    if (space.kind() == ElementKind::P1Bubble) {
        const std::size_t nn = space.mesh().n_nodes();
        for (std::size_t i = 0; i < nn; ++i) out[component * ns + i] = f(xy[i]);
        for (std::size_t t = 0; t < space.mesh().n_triangles(); ++t) {
            const auto& d = space.cell_dofs(t);
            const double lin = (out[component * ns + d[0]] + out[component * ns + d[1]] + out[component * ns + d[2]]) / 3.0;
            out[component * ns + d[3]] = f(xy[d[3]]) - lin;
        }
        return out;
    }
    for (std::size_t i = 0; i < ns; ++i) out[component * ns + i] = f(xy[i]);
    return out;
}

inline std::vector<double> interpolate(const FeSpace& space, const VectorFunction& f)
{
    if (space.components() != 2) throw Error("interpolate: vector function needs a 2-component space");
    auto x = interpolate(space, [&](const Point& p) { return f(p)[0]; }, 0);
    auto y = interpolate(space, [&](const Point& p) { return f(p)[1]; }, 1);
    for (std::size_t i = space.n_scalar_dofs(); i < x.size(); ++i) x[i] = y[i];
    return x;
}

} // namespace infsup_lab
