#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "infsup_lab/fespace.hpp"

using namespace infsup_lab;

namespace {

// ∫_ref λ0^a λ1^b λ2^c = a! b! c! 2! / (a+b+c+2)! · ½·2 (reference area ½)
double monomial_integral(int a, int b, int c)
{
    return std::tgamma(a + 1) * std::tgamma(b + 1) * std::tgamma(c + 1) / std::tgamma(a + b + c + 3);
}

double integrate(const QuadratureRule& q, int a, int b, int c)
{
    double s = 0.0;
    for (std::size_t i = 0; i < q.points.size(); ++i)
        s += q.weights[i] * 0.5 * std::pow(q.points[i][0], a) * std::pow(q.points[i][1], b) * std::pow(q.points[i][2], c);
    return s;
}

Barycentric random_point(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> d(0.0, 1.0);
    double x = d(rng), y = d(rng);
    if (x + y > 1.0) {
        x = 1.0 - x;
        y = 1.0 - y;
    }
    return {1.0 - x - y, x, y};
}

const TriangleGeometry kRef = triangle_geometry({0, 0}, {1, 0}, {0, 1});

} // namespace

TEST(Shape, LagrangeProperty)
{
    const auto p1 = shape_values(ElementKind::P1, {1, 0, 0});
    EXPECT_EQ(p1, (std::vector<double>{1, 0, 0}));
    const auto p2 = shape_values(ElementKind::P2, {0.5, 0.5, 0});
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(p2[i], i == 3 ? 1.0 : 0.0, 1e-15);
    const auto b = shape_values(ElementKind::P1Bubble, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    EXPECT_NEAR(b[3], 1.0, 1e-15);
}

TEST(Shape, ReferenceGradients)
{
    const auto g = shape_gradients(ElementKind::P1, {0.2, 0.3, 0.5}, kRef);
    EXPECT_DOUBLE_EQ(g[0][0], -1);
    EXPECT_DOUBLE_EQ(g[0][1], -1);
    EXPECT_DOUBLE_EQ(g[1][0], 1);
    EXPECT_DOUBLE_EQ(g[2][1], 1);
    // ∇[λ0(2λ0−1)] = (4λ0−1)∇λ0 = 3·(−1,−1) at vertex 0
    const auto g2 = shape_gradients(ElementKind::P2, {1, 0, 0}, kRef);
    EXPECT_DOUBLE_EQ(g2[0][0], -3);
    EXPECT_DOUBLE_EQ(g2[0][1], -3);
}

TEST(Shape, PartitionOfUnity)
{
    std::mt19937_64 rng(1);
    const auto g = triangle_geometry({0.1, 0.2}, {0.9, 0.3}, {0.4, 1.1});
    for (int k = 0; k < 20; ++k) {
        const auto l = random_point(rng);
        for (auto kind : {ElementKind::P1, ElementKind::P1Bubble, ElementKind::P2}) {
            const auto v = shape_values(kind, l);
            const auto d = shape_gradients(kind, l, g);
            const std::size_t lagrange = kind == ElementKind::P1Bubble ? 3 : v.size();
            double s = 0.0, gx = 0.0, gy = 0.0;
            for (std::size_t i = 0; i < lagrange; ++i) {
                s += v[i];
                gx += d[i][0];
                gy += d[i][1];
            }
            EXPECT_NEAR(s, 1.0, 1e-14);
            EXPECT_NEAR(gx, 0.0, 1e-13);
            EXPECT_NEAR(gy, 0.0, 1e-13);
        }
    }
}

TEST(Shape, GradientsMatchFiniteDifferences)
{
    const std::array<Point, 3> v{Point{0.1, 0.2}, Point{0.9, 0.3}, Point{0.4, 1.1}};
    const auto g = triangle_geometry(v[0], v[1], v[2]);
    const Barycentric l{0.2, 0.5, 0.3};
    const auto x = to_physical(v, l);
    // barycentric coordinates of a physical point through the affine map
    const auto bary = [&](const Point& p) -> Barycentric {
        const double l1 = g.grad_lambda[1][0] * (p[0] - v[0][0]) + g.grad_lambda[1][1] * (p[1] - v[0][1]);
        const double l2 = g.grad_lambda[2][0] * (p[0] - v[0][0]) + g.grad_lambda[2][1] * (p[1] - v[0][1]);
        return {1.0 - l1 - l2, l1, l2};
    };
    const double e = 1e-6;
    for (auto kind : {ElementKind::P1Bubble, ElementKind::P2}) {
        const auto d = shape_gradients(kind, l, g);
        const auto px = shape_values(kind, bary({x[0] + e, x[1]}));
        const auto mx = shape_values(kind, bary({x[0] - e, x[1]}));
        const auto py = shape_values(kind, bary({x[0], x[1] + e}));
        const auto my = shape_values(kind, bary({x[0], x[1] - e}));
        for (std::size_t i = 0; i < d.size(); ++i) {
            EXPECT_NEAR(d[i][0], (px[i] - mx[i]) / (2 * e), 1e-7);
            EXPECT_NEAR(d[i][1], (py[i] - my[i]) / (2 * e), 1e-7);
        }
    }
}

TEST(Quadrature, KnownIntegrals)
{
    EXPECT_NEAR(integrate(quadrature(1), 0, 0, 0), 0.5, 1e-15);
    EXPECT_NEAR(integrate(quadrature(2), 1, 1, 0), 1.0 / 24, 1e-15);
    EXPECT_NEAR(integrate(quadrature(4), 4, 0, 0), 1.0 / 30, 1e-15);
}

TEST(Quadrature, ExactForAllMonomialsUpToDegree)
{
    for (int deg = 0; deg <= 6; ++deg) {
        const auto q = quadrature(deg);
        double w = 0.0;
        for (double x : q.weights) w += x;
        EXPECT_NEAR(w, 1.0, 1e-14);
        for (int a = 0; a <= deg; ++a)
            for (int b = 0; a + b <= deg; ++b)
                for (int c = 0; a + b + c <= deg; ++c)
                    EXPECT_NEAR(integrate(q, a, b, c), monomial_integral(a, b, c), 1e-14)
                        << "degree " << deg << " monomial " << a << b << c;
    }
    EXPECT_THROW(quadrature(7), UnsupportedDegree);
}

TEST(FeSpace, DofCounts)
{
    const auto m = unit_square_mesh(3);
    EXPECT_EQ(FeSpace(m, ElementKind::P0).n_dofs(), 18u);
    EXPECT_EQ(FeSpace(m, ElementKind::P1).n_dofs(), 16u);
    EXPECT_EQ(FeSpace(m, ElementKind::P1Bubble).n_dofs(), 34u);
    EXPECT_EQ(FeSpace(m, ElementKind::P2).n_dofs(), 16u + m.edges.size());
    EXPECT_EQ(FeSpace(m, ElementKind::P2, 2).n_dofs(), 2 * (16u + m.edges.size()));
    EXPECT_THROW(FeSpace(m, ElementKind::P1, 3), Error);
}

TEST(FeSpace, ComponentMajorLayout)
{
    const auto m = unit_square_mesh(2);
    const FeSpace s(m, ElementKind::P2, 2);
    EXPECT_EQ(s.dof(3, 4, 1), s.n_scalar_dofs() + s.cell_dofs(3)[4]);
}

TEST(FeSpace, BoundaryDofs)
{
    const auto m = unit_square_mesh(4);
    EXPECT_EQ(FeSpace(m, ElementKind::P1, 2).boundary_dofs().size(), 32u);
    EXPECT_EQ(FeSpace(m, ElementKind::P2).boundary_dofs().size(), 32u);
    // bubbles vanish on the boundary and are never constrained
    const FeSpace b(m, ElementKind::P1Bubble);
    EXPECT_EQ(b.boundary_dofs().size(), 16u);
    for (auto d : b.boundary_dofs()) EXPECT_LT(d, m.n_nodes());
    EXPECT_EQ(FeSpace(m, ElementKind::P1).free_dofs().size(), 9u);
    EXPECT_TRUE(FeSpace(m, ElementKind::P0).boundary_dofs().empty());
}

TEST(FeSpace, ContinuityAcrossEdges)
{
    const auto m = unit_square_mesh(3);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-1, 1);
    for (auto kind : {ElementKind::P1, ElementKind::P1Bubble, ElementKind::P2}) {
        const FeSpace s(m, kind);
        std::vector<double> u(s.n_dofs());
        for (auto& x : u) x = d(rng);
        for (const auto& e : m.edges) {
            if (e.on_boundary()) continue;
            for (int k = 0; k < 5; ++k) {
                const double t = (k + 0.5) / 5.0;
                double val[2];
                const std::size_t tris[2] = {e.tri0, e.tri1};
                for (int side = 0; side < 2; ++side) {
                    const auto& tri = m.triangles[tris[side]];
                    Barycentric l{0, 0, 0};
                    for (std::size_t i = 0; i < 3; ++i) {
                        if (tri[i] == e.a) l[i] = 1.0 - t;
                        if (tri[i] == e.b) l[i] = t;
                    }
                    val[side] = s.evaluate(u, tris[side], l);
                }
                EXPECT_NEAR(val[0], val[1], 1e-13);
            }
        }
    }
}

TEST(FeSpace, InterpolationReproducesPolynomials)
{
    const auto m = unit_square_mesh(3);
    const FeSpace p2(m, ElementKind::P2);
    const ScalarFunction f = [](const Point& x) { return 1 + 2 * x[0] - x[1] + x[0] * x[1] + 3 * x[1] * x[1]; };
    const auto u = interpolate(p2, f);
    std::mt19937_64 rng(9);
    for (std::size_t t = 0; t < m.n_triangles(); t += 3) {
        const auto l = random_point(rng);
        EXPECT_NEAR(p2.evaluate(u, t, l), f(to_physical(m.vertices(t), l)), 1e-13);
    }
    const FeSpace v1(m, ElementKind::P1, 2);
    const auto w = interpolate(v1, VectorFunction([](const Point& x) { return Point{x[0], 2 * x[1]}; }));
    const auto g = v1.evaluate_gradient(w, 4, {0.3, 0.3, 0.4}, m.geometry(4), 1);
    EXPECT_NEAR(g[0], 0.0, 1e-13);
    EXPECT_NEAR(g[1], 2.0, 1e-13);
}
