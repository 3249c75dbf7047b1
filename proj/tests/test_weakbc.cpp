#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "infsup_lab/linalg/factor.hpp"
#include "infsup_lab/weakbc.hpp"

using namespace infsup_lab;
using namespace infsup_lab::weakbc;

namespace {

const ScalarFunction kZero = [](const Point&) { return 0.0; };
const ScalarFunction kOne = [](const Point&) { return 1.0; };

double max_abs(const Vector& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

TEST(WeakBcParse, Names)
{
    for (auto k : {MethodKind::Multiplier, MethodKind::BarbosaHughes, MethodKind::Nitsche})
        EXPECT_EQ(parse_method(method_name(k)), k);
    for (auto t : {TraceSpace::P0, TraceSpace::P1, TraceSpace::P1Disc}) EXPECT_EQ(parse_trace(trace_name(t)), t);
    EXPECT_EQ(parse_scaling("linear"), Scaling::Linear);
    EXPECT_THROW(parse_method("penalty"), UnsupportedCombination);
    EXPECT_THROW(parse_trace("p2"), UnsupportedCombination);
    EXPECT_THROW(parse_scaling("cubic"), UnsupportedCombination);
}

TEST(InverseConstant, PositiveAndMeshIndependent)
{
    const double c4 = inverse_constant(unit_square_mesh(4));
    const double c8 = inverse_constant(unit_square_mesh(8));
    EXPECT_GT(c4, 0.0);
    EXPECT_LE(std::abs(c4 - c8) / std::max(c4, c8), 0.1);
}

TEST(InverseConstant, WeightScalesBySqrtTwo)
{
    const auto mesh = unit_square_mesh(4);
    EXPECT_NEAR(inverse_constant(mesh, 2.0) / inverse_constant(mesh), std::sqrt(2.0), 1e-10);
}

TEST(InverseConstant, BoundsEveryBoundaryRayleighQuotient)
{
    // h·‖∂v/∂n‖²_Γ ≤ C_i²·‖∇v‖² for random fields
    const auto mesh = unit_square_mesh(4);
    const double ci = inverse_constant(mesh);
    const FeSpace vs(mesh, ElementKind::P1);
    const auto k = stiffness(vs);
    const auto nn = boundary_operators(vs).normal_normal;
    std::mt19937_64 rng(9);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 50; ++trial) {
        Vector v(vs.n_dofs());
        for (auto& x : v) x = d(rng);
        EXPECT_LE(mesh.h * nn.quadratic_form(v), ci * ci * k.quadratic_form(v) * (1 + 1e-10));
    }
}

TEST(WeakBcDefaults, Scalings)
{
    EXPECT_DOUBLE_EQ(default_gamma(2.0), 16.0);
    EXPECT_DOUBLE_EQ(default_gamma(2.0, Scaling::Linear), 8.0);
    EXPECT_DOUBLE_EQ(default_alpha(2.0), 0.125);
    EXPECT_DOUBLE_EQ(default_alpha(2.0, Scaling::Linear), 0.25);
}

TEST(WeakBcBuild, RejectsNonPositiveParameters)
{
    const auto mesh = unit_square_mesh(2);
    EXPECT_THROW(build({MethodKind::Nitsche, 0.0, 0.0}, mesh, kOne, kOne), UnsupportedCombination);
    EXPECT_THROW(build({MethodKind::BarbosaHughes, -1.0, 0.0}, mesh, kOne, kOne), UnsupportedCombination);
}

TEST(WeakBcSolve, ZeroDataGivesZero)
{
    const auto mesh = unit_square_mesh(4);
    for (auto kind : {MethodKind::Multiplier, MethodKind::BarbosaHughes, MethodKind::Nitsche}) {
        const auto sol = solve(build(default_method(kind, mesh), mesh, kZero, kZero));
        EXPECT_LE(max_abs(sol.u), 1e-14) << method_name(kind);
        EXPECT_LE(max_abs(sol.lambda), 1e-14) << method_name(kind);
    }
}

TEST(WeakBcSolve, ReproducesConstants)
{
    const auto mesh = unit_square_mesh(4);
    for (auto kind : {MethodKind::Multiplier, MethodKind::BarbosaHughes, MethodKind::Nitsche}) {
        const auto sol = solve(build(default_method(kind, mesh), mesh, kOne, kOne));
        for (double x : sol.u) EXPECT_NEAR(x, 1.0, 1e-10) << method_name(kind);
        EXPECT_LE(sol.residual_norm, 1e-9);
    }
}

TEST(WeakBcSolve, BarbosaHughesMultiplierIsMinusNormalDerivative)
{
    // u = 1 − x: ∂u/∂n = 1 on x = 0, −1 on x = 1, 0 on y = 0, 1
    const auto mesh = unit_square_mesh(4);
    const ScalarFunction u = [](const Point& x) { return 1.0 - x[0]; };
    for (auto trace : {TraceSpace::P0, TraceSpace::P1Disc}) {
        const auto sys = build(default_method(MethodKind::BarbosaHughes, mesh), mesh, u, u, trace);
        const auto sol = solve(sys);
        const FeSpace vs(mesh, ElementKind::P1);
        const auto ui = interpolate(vs, u);
        for (std::size_t i = 0; i < ui.size(); ++i) EXPECT_NEAR(sol.u[i], ui[i], 1e-10);
        ASSERT_EQ(sol.lambda.size(), sys.lambda_coords.size());
        std::size_t checked = 0;
        for (std::size_t k = 0; k < sol.lambda.size(); ++k) {
            const auto& x = sys.lambda_coords[k];
            if (x[0] == 0.0 && x[1] > 0.0 && x[1] < 1.0) {
                EXPECT_NEAR(sol.lambda[k], -1.0, 1e-9);
                ++checked;
            }
        }
        EXPECT_GT(checked, 0u);
    }
}

TEST(WeakBcSolve, MultiplierOnCoarseMeshes)
{
    for (std::size_t n : {2u, 4u, 8u}) {
        const auto mesh = unit_square_mesh(n);
        const auto p = mms_problem();
        const auto sys = build({MethodKind::Multiplier}, mesh, p.f, p.d);
        const auto sol = solve(sys);
        EXPECT_LE(sol.residual_norm, 1e-9);
        const double rough = lambda_roughness(sys, sol.lambda);
        EXPECT_TRUE(std::isfinite(rough));
        EXPECT_GE(rough, 0.0);
    }
}

TEST(Nitsche, SymmetricAndPositiveDefinite)
{
    for (std::size_t n : {4u, 8u, 16u}) {
        const auto mesh = unit_square_mesh(n);
        const auto sys = build(default_method(MethodKind::Nitsche, mesh), mesh, kOne, kOne);
        EXPECT_LE(linalg::symmetry_defect(sys.matrix), 1e-12 * linalg::frobenius_norm(sys.matrix));
        EXPECT_NO_THROW(linalg::cholesky(sys.matrix.to_dense())) << n;
    }
}

TEST(Nitsche, ConvergenceRates)
{
    std::vector<double> hs, l2, h1;
    for (std::size_t n : {8u, 16u, 32u}) {
        const auto l = mms_level({MethodKind::Nitsche}, n);
        hs.push_back(l.h);
        l2.push_back(l.errors.at("err_u_l2"));
        h1.push_back(l.errors.at("err_u_h1"));
    }
    EXPECT_NEAR(verify::fit_slope(hs, h1), 1.0, 0.1);
    EXPECT_NEAR(verify::fit_slope(hs, l2), 2.0, 0.15);
}

TEST(Equivalence, ZeroDataGivesZero)
{
    const auto r = equivalence_check(unit_square_mesh(4), kZero, kZero, 0.1);
    EXPECT_EQ(r.discrepancy, 0.0);
}

TEST(Equivalence, RelativeDiscrepancyIsScaleInvariant)
{
    const auto mesh = unit_square_mesh(4);
    const auto p = mms_problem();
    const auto a = equivalence_check(mesh, p.f, p.d, 0.1);
    const auto b = equivalence_check(
        mesh, [&](const Point& x) { return 10.0 * p.f(x); }, [&](const Point& x) { return 10.0 * p.d(x); }, 0.1);
    EXPECT_NEAR(b.discrepancy, 10.0 * a.discrepancy, 1e-12 * b.discrepancy + 1e-14);
    EXPECT_NEAR(b.relative_discrepancy, a.relative_discrepancy, 1e-12);
}

TEST(Equivalence, DiscontinuousP1TracesMatchNitsche)
{
    const auto mesh = unit_square_mesh(4);
    const auto p = mms_problem();
    for (double alpha : {0.1, 0.05})
        EXPECT_LE(equivalence_check(mesh, p.f, p.d, alpha, TraceSpace::P1Disc).relative_discrepancy, 1e-9);
}

TEST(Equivalence, PiecewiseConstantTracesConvergeToNitsche)
{
    const auto p = mms_problem();
    const double a = equivalence_check(unit_square_mesh(4), p.f, p.d, 0.1).relative_discrepancy;
    const double b = equivalence_check(unit_square_mesh(8), p.f, p.d, 0.1).relative_discrepancy;
    EXPECT_LT(b, a);
}

// P0 multipliers replace ∫(u−d)v by a per-edge product of means, so the two
// solutions differ at O(h²); see README.
TEST(Equivalence, DISABLED_PiecewiseConstantTracesMatchNitsche)
{
    const auto p = mms_problem();
    EXPECT_LE(equivalence_check(unit_square_mesh(4), p.f, p.d, 0.1).relative_discrepancy, 1e-9);
}

TEST(MmsProblem, LoadMatchesFiniteDifferences)
{
    const auto p = mms_problem();
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    const double h = 1e-3;
    for (int i = 0; i < 50; ++i) {
        const Point x{d(rng), d(rng)};
        const double lap = (p.u({x[0] + h, x[1]}) + p.u({x[0] - h, x[1]}) + p.u({x[0], x[1] + h}) +
                            p.u({x[0], x[1] - h}) - 4 * p.u(x)) /
                           (h * h);
        EXPECT_NEAR(p.f(x), -lap + p.u(x), 1e-5 * (1 + std::abs(p.f(x))));
        const auto g = p.grad_u(x);
        EXPECT_NEAR(g[0], (p.u({x[0] + h, x[1]}) - p.u({x[0] - h, x[1]})) / (2 * h), 1e-5);
        EXPECT_NEAR(g[1], (p.u({x[0], x[1] + h}) - p.u({x[0], x[1] - h})) / (2 * h), 1e-5);
    }
}

TEST(MmsProblem, PointValues)
{
    using std::numbers::pi;
    const auto p = mms_problem();
    EXPECT_NEAR(p.f({0.0, 0.0}), 2 * pi * pi + 1, 1e-14);
    // ∂u/∂n = −∂u/∂y on y = 0
    EXPECT_NEAR(-p.grad_u({0.5, 0.0})[1], 0.0, 1e-15);
    EXPECT_EQ(p.d({0.3, 0.0}), p.u({0.3, 0.0}));
}

TEST(MmsProblem, ResidualIntegratesToZero)
{
    using std::numbers::pi;
    const auto p = mms_problem();
    const auto mesh = unit_square_mesh(8);
    const auto rule = quadrature(6);
    double acc = 0.0;
    for (std::size_t k = 0; k < mesh.n_triangles(); ++k) {
        const auto v = mesh.vertices(k);
        const double area = mesh.geometry(k).area;
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto x = to_physical(v, rule.points[q]);
            const double uxx = -pi * pi * std::cos(pi * x[0]) * std::cos(pi * x[1]);
            const double r = -2 * uxx + p.u(x) - p.f(x);
            acc += rule.weights[q] * area * r * r;
        }
    }
    EXPECT_LE(acc, 1e-10);
}

TEST(WeakBcErrors, InterpolantErrorAndNorm)
{
    const auto mesh = unit_square_mesh(8);
    const auto p = mms_problem();
    const FeSpace vs(mesh, ElementKind::P1);
    const auto e = errors(mesh, interpolate(vs, p.u), p.u, p.grad_u);
    EXPECT_LT(e.l2, 0.02);
    EXPECT_LT(e.h1, 0.5);
    // ‖1‖_H1 on the unit square is 1
    EXPECT_NEAR(h1_norm(mesh, Vector(vs.n_dofs(), 1.0)), 1.0, 1e-14);
}
