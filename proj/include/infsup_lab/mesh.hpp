#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "infsup_lab/errors.hpp"

namespace infsup_lab {

using Point = std::array<double, 2>;

/// Undirected mesh edge with its one or two adjacent triangles (second = npos on the boundary).
struct Edge {
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t a;
    std::size_t b;
    std::size_t tri0;
    std::size_t tri1 = npos;
    bool on_boundary() const noexcept { return tri1 == npos; }
};

/// Boundary edge oriented counter-clockwise with respect to its triangle.
struct BoundaryEdge {
    std::size_t a;
    std::size_t b;
    std::size_t triangle;
};

struct TriangleGeometry {
    double area = 0.0;
    std::array<Point, 3> grad_lambda{};
    double diameter = 0.0;
};

inline double distance(const Point& p, const Point& q) { return std::hypot(p[0] - q[0], p[1] - q[1]); }

inline TriangleGeometry triangle_geometry(const Point& p0, const Point& p1, const Point& p2)
{
    const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    if (!(det > 0.0)) throw Error("triangle_geometry: non-positive orientation");
    TriangleGeometry g;
    g.area = 0.5 * det;
    g.grad_lambda[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
    g.grad_lambda[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
    g.grad_lambda[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
    g.diameter = std::max({distance(p0, p1), distance(p1, p2), distance(p2, p0)});
    return g;
}

/// Structured triangulation of the unit square.
///
/// Node (i,j) sits at (i/n, j/n) with index j·(n+1)+i. Each grid cell is split
/// along its lower-left to upper-right diagonal into two counter-clockwise
/// triangles. Local edge k of a triangle joins local vertices k and k+1 (mod 3).
class Mesh {
public:
    std::vector<Point> nodes;
    std::vector<std::array<std::size_t, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<Edge> edges;
    std::vector<std::array<std::size_t, 3>> triangle_edges;
    std::vector<double> h_k;
    std::size_t n_cells_per_side = 0;
    double h = 0.0;

    std::size_t n_nodes() const noexcept { return nodes.size(); }
    std::size_t n_triangles() const noexcept { return triangles.size(); }

    std::array<Point, 3> vertices(std::size_t t) const
    {
        const auto& tri = triangles[t];
        return {nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]};
    }

    TriangleGeometry geometry(std::size_t t) const
    {
        if (t >= triangles.size()) throw IndexOutOfRange("Mesh::geometry: triangle index out of range");
        const auto v = vertices(t);
        return triangle_geometry(v[0], v[1], v[2]);
    }

    Point barycenter(std::size_t t) const
    {
        const auto v = vertices(t);
        return {(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0};
    }

    bool is_boundary_node(std::size_t i) const
    {
        const auto& p = nodes[i];
        return p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
    }

    /// Outward unit normal of a boundary edge.
    static Point outward_normal(const Point& a, const Point& b)
    {
        const double len = distance(a, b);
        return {(b[1] - a[1]) / len, -(b[0] - a[0]) / len};
    }
};

inline Mesh unit_square_mesh(std::size_t n)
{
    if (n < 1) throw Error("unit_square_mesh: n must be at least 1");
    Mesh m;
    m.n_cells_per_side = n;
    const auto id = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
    m.nodes.reserve((n + 1) * (n + 1));
    for (std::size_t j = 0; j <= n; ++j)
        for (std::size_t i = 0; i <= n; ++i) {
            // exact 0 and 1 at the ends keep boundary tests exact
            const double x = i == n ? 1.0 : double(i) / double(n);
            const double y = j == n ? 1.0 : double(j) / double(n);
            m.nodes.push_back({x, y});
        }
    m.triangles.reserve(2 * n * n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            m.triangles.push_back({a, b, c});
            m.triangles.push_back({a, c, d});
        }

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edge_index;
    m.triangle_edges.resize(m.triangles.size());
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
        for (std::size_t k = 0; k < 3; ++k) {
            const std::size_t p = m.triangles[t][k];
            const std::size_t q = m.triangles[t][(k + 1) % 3];
            const auto key = std::minmax(p, q);
            auto [it, inserted] = edge_index.try_emplace({key.first, key.second}, m.edges.size());
            if (inserted) m.edges.push_back({key.first, key.second, t});
            else m.edges[it->second].tri1 = t;
            m.triangle_edges[t][k] = it->second;
        }
    for (std::size_t t = 0; t < m.triangles.size(); ++t)
        for (std::size_t k = 0; k < 3; ++k)
            if (m.edges[m.triangle_edges[t][k]].on_boundary())
                m.boundary_edges.push_back({m.triangles[t][k], m.triangles[t][(k + 1) % 3], t});

    // All cells are congruent; the diagonal is the longest edge.
    m.h = std::sqrt(2.0) / double(n);
    m.h_k.assign(m.triangles.size(), m.h);
    return m;
}

} // namespace infsup_lab
