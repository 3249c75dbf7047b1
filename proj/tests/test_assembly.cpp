#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "infsup_lab/assembly.hpp"
#include "infsup_lab/linalg/solve.hpp"
#include "infsup_lab/oracle.hpp"

using namespace infsup_lab;

namespace {

Mesh reference_mesh()
{
    Mesh m;
    m.nodes = {{0, 0}, {1, 0}, {0, 1}};
    m.triangles = {{0, 1, 2}};
    m.h_k = {std::sqrt(2.0)};
    return m;
}

double max_abs(const Vector& v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double relative_symmetry(const CsrMatrix& a)
{
    return linalg::symmetry_defect(a) / linalg::frobenius_norm(a);
}

} // namespace

TEST(Stiffness, ReferenceTriangle)
{
    const auto m = reference_mesh();
    const auto k = stiffness(FeSpace(m, ElementKind::P1)).to_dense();
    const double ref[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(k(i, j), ref[i][j], 1e-15);
}

TEST(Stiffness, ConstantsInKernel)
{
    const auto m = unit_square_mesh(4);
    for (auto kind : {ElementKind::P1, ElementKind::P1Bubble, ElementKind::P2}) {
        const FeSpace s(m, kind);
        const auto c = interpolate(s, ScalarFunction([](const Point&) { return 1.0; }));
        EXPECT_LE(max_abs(stiffness(s).multiply(c)), 1e-12);
    }
    EXPECT_THROW(stiffness(FeSpace(m, ElementKind::P0)), UnsupportedCombination);
}

TEST(Stiffness, LinearFieldEnergy)
{
    const auto m = unit_square_mesh(2);
    const FeSpace s(m, ElementKind::P1);
    const auto x = interpolate(s, ScalarFunction([](const Point& p) { return p[0]; }));
    EXPECT_NEAR(stiffness(s).quadratic_form(x), 1.0, 1e-14);
}

TEST(Mass, TotalsAndReference)
{
    const auto m = unit_square_mesh(3);
    for (auto kind : {ElementKind::P0, ElementKind::P1, ElementKind::P2}) {
        const FeSpace s(m, kind);
        const auto mm = mass(s);
        double total = 0.0;
        for (double v : mm.values) total += v;
        EXPECT_NEAR(total, 1.0, 1e-14);
    }
    const auto ml = lumped_mass(FeSpace(m, ElementKind::P1));
    double total = 0.0;
    for (double v : ml) {
        EXPECT_GT(v, 0.0);
        total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-14);

    const auto r = reference_mesh();
    const auto mr = mass(FeSpace(r, ElementKind::P1)).to_dense();
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(mr(i, j), (i == j ? 2.0 : 1.0) / 24.0, 1e-15);
}

TEST(Divergence, ConstantPressureAnnihilatesInteriorVelocities)
{
    const auto m = unit_square_mesh(4);
    for (auto [vk, pk] : {std::pair{ElementKind::P2, ElementKind::P1}, std::pair{ElementKind::P1Bubble, ElementKind::P1},
                          std::pair{ElementKind::P1, ElementKind::P0}}) {
        const FeSpace vs(m, vk, 2), ps(m, pk);
        const auto b = divergence(vs, ps);
        const auto one = interpolate(ps, ScalarFunction([](const Point&) { return 1.0; }));
        const auto bt1 = b.multiply_transposed(one);
        for (auto d : vs.free_dofs()) EXPECT_NEAR(bt1[d], 0.0, 1e-12);
    }
}

TEST(Divergence, UnitDivergenceField)
{
    const auto m = unit_square_mesh(1);
    const FeSpace vs(m, ElementKind::P1, 2), ps(m, ElementKind::P0);
    const auto v = interpolate(vs, VectorFunction([](const Point& x) { return Point{x[0], 0.0}; }));
    const auto bv = divergence(vs, ps).multiply(v);
    for (std::size_t t = 0; t < 2; ++t) EXPECT_NEAR(bv[t], -0.5, 1e-15);
}

TEST(Divergence, RejectsScalarVelocity)
{
    const auto m = unit_square_mesh(2);
    EXPECT_THROW(divergence(FeSpace(m, ElementKind::P1), FeSpace(m, ElementKind::P0)), UnsupportedCombination);
}

TEST(PressureStab, UniformMeshFactorsAsH2TimesStiffness)
{
    const auto m = unit_square_mesh(4);
    const FeSpace p(m, ElementKind::P1);
    auto s = pressure_grad_stab(p).to_dense();
    auto k = stiffness(p).to_dense();
    k *= m.h * m.h;
    s -= k;
    EXPECT_LE(linalg::frobenius_norm(s), 1e-15);
    const Vector one(p.n_dofs(), 1.0);
    EXPECT_LE(max_abs(pressure_grad_stab(p).multiply(one)), 1e-14);
}

TEST(PressureStab, LinearFieldEnergy)
{
    const auto m = unit_square_mesh(2);
    const FeSpace p(m, ElementKind::P1);
    const auto x = interpolate(p, ScalarFunction([](const Point& q) { return q[0]; }));
    EXPECT_NEAR(pressure_grad_stab(p).quadratic_form(x), m.h * m.h, 1e-14);
}

TEST(PressureStab, PerElementWeightsMatchUniformPath)
{
    const auto m = unit_square_mesh(3);
    const FeSpace p(m, ElementKind::P1);
    const std::vector<double> w(m.n_triangles(), m.h * m.h);
    auto a = weighted_gradient_form(p, w).to_dense();
    a -= pressure_grad_stab(p).to_dense();
    EXPECT_EQ(linalg::frobenius_norm(a), 0.0);
}

TEST(GradCoupling, ConstantAndLinearPressure)
{
    const auto m = unit_square_mesh(3);
    const FeSpace p(m, ElementKind::P1), z(m, ElementKind::P1, 2);
    const auto g = grad_coupling(p, z);
    const Vector one(p.n_dofs(), 1.0);
    EXPECT_LE(max_abs(g.multiply(one)), 1e-14);
    const auto x = interpolate(p, ScalarFunction([](const Point& q) { return q[0]; }));
    const auto gx = g.multiply(x);
    const auto load = load_vector(z, VectorFunction([](const Point&) { return Point{1.0, 0.0}; }));
    for (std::size_t i = 0; i < gx.size(); ++i) EXPECT_NEAR(gx[i], load[i], 1e-14);
}

TEST(GradCoupling, TransposeAgainstQuadrature)
{
    const auto m = unit_square_mesh(3);
    const FeSpace p(m, ElementKind::P1), z(m, ElementKind::P1, 2);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-1, 1);
    Vector pv(p.n_dofs()), zv(z.n_dofs());
    for (auto& x : pv) x = d(rng);
    for (auto& x : zv) x = d(rng);
    const double lhs = linalg::dot(pv, grad_coupling(p, z).multiply_transposed(zv));
    double rhs = 0.0;
    for (std::size_t t = 0; t < m.n_triangles(); ++t) {
        const auto v = m.vertices(t);
        const auto g = m.geometry(t);
        for (const auto& q : oracle::triangle_rule(v, 4)) {
            const oracle::LocalBasis b(ElementKind::P1, v);
            const auto phi = b.values(q.x);
            double z0 = 0.0, z1 = 0.0;
            for (std::size_t i = 0; i < 3; ++i) {
                z0 += zv[z.dof(t, i, 0)] * phi[i];
                z1 += zv[z.dof(t, i, 1)] * phi[i];
            }
            const auto gp = p.evaluate_gradient(pv, t, {1.0 / 3, 1.0 / 3, 1.0 / 3}, g);
            rhs += q.weight * (z0 * gp[0] + z1 * gp[1]);
        }
    }
    EXPECT_NEAR(lhs, rhs, 1e-13);
}

TEST(BoundaryOperators, TotalsAndKernels)
{
    const auto m = unit_square_mesh(4);
    const FeSpace s(m, ElementKind::P1);
    const double gamma = 2.5;
    const auto bo = boundary_operators(s, gamma);
    const Vector one(s.n_dofs(), 1.0);
    double perimeter = 0.0;
    for (double v : bo.mass_gamma.multiply(one)) perimeter += v;
    EXPECT_NEAR(perimeter, 4.0, 1e-14);
    const double h_e = 1.0 / 4;
    EXPECT_NEAR(bo.penalty.quadratic_form(one), gamma * 4.0 / h_e, 1e-12);
    EXPECT_LE(max_abs(bo.normal_flux.multiply(one)), 1e-13);
    EXPECT_LE(max_abs(bo.normal_normal.multiply(one)), 1e-13);
    EXPECT_THROW(boundary_operators(FeSpace(m, ElementKind::P2)), UnsupportedCombination);
}

TEST(BoundaryOperators, NormalFluxOfLinearField)
{
    // ⟨∂x/∂n, 1⟩_Γ = 0 and ⟨∂x/∂n, x⟩_Γ = ∫_{x=1} 1 = 1
    const auto m = unit_square_mesh(3);
    const FeSpace s(m, ElementKind::P1);
    const auto bo = boundary_operators(s);
    const auto x = interpolate(s, ScalarFunction([](const Point& p) { return p[0]; }));
    const Vector one(s.n_dofs(), 1.0);
    const auto nx = bo.normal_flux.multiply(x);
    EXPECT_NEAR(linalg::dot(one, nx), 0.0, 1e-14);
    EXPECT_NEAR(linalg::dot(x, nx), 1.0, 1e-14);
}

TEST(Assembly, SymmetricForms)
{
    const auto m = unit_square_mesh(4);
    for (auto kind : {ElementKind::P1, ElementKind::P1Bubble, ElementKind::P2}) {
        const FeSpace s(m, kind, 2);
        EXPECT_LE(relative_symmetry(stiffness(s)), 1e-13);
        EXPECT_LE(relative_symmetry(mass(s)), 1e-13);
    }
    const FeSpace p(m, ElementKind::P1);
    EXPECT_LE(relative_symmetry(pressure_grad_stab(p)), 1e-13);
    EXPECT_LE(relative_symmetry(boundary_operators(p, 3.0).penalty), 1e-13);
}

TEST(Assembly, MatchesIndependentQuadrature)
{
    for (const auto& c : oracle::check_all_forms(2)) EXPECT_LE(c.relative_error, 1e-12) << c.name;
}

TEST(Assembly, OracleTwoTriangleDivergence)
{
    const auto m = unit_square_mesh(1);
    const FeSpace vs(m, ElementKind::P2, 2), ps(m, ElementKind::P1);
    const auto ref = oracle::ref_divergence(vs, ps);
    const auto b = oracle::to_eigen(divergence(vs, ps));
    EXPECT_LE((b - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Loads, MeanVector)
{
    const auto m = unit_square_mesh(3);
    for (auto kind : {ElementKind::P0, ElementKind::P1}) {
        double total = 0.0;
        for (double v : mean_vector(FeSpace(m, kind))) total += v;
        EXPECT_NEAR(total, 1.0, 1e-14);
    }
}

TEST(Loads, ScalarLoadOfConstant)
{
    const auto m = unit_square_mesh(3);
    const FeSpace s(m, ElementKind::P2);
    const auto l = load_vector(s, ScalarFunction([](const Point&) { return 2.0; }));
    const auto mm = mass(s);
    const Vector one(s.n_dofs(), 1.0);
    const auto ref = mm.multiply(one);
    for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(l[i], 2.0 * ref[i], 1e-14);
}

TEST(Saddle, BlockLayoutAndSigns)
{
    SaddleSystem s;
    s.a = linalg::csr_from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 3.0}});
    s.b = linalg::csr_from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, -1.0}});
    s.c = linalg::csr_from_triplets(1, 1, {{0, 0, 0.5}});
    s.f = {1.0, 2.0};
    s.g = {4.0};
    const auto k = block_matrix(s).to_dense();
    EXPECT_DOUBLE_EQ(k(0, 2), 1.0);
    EXPECT_DOUBLE_EQ(k(2, 1), -1.0);
    EXPECT_DOUBLE_EQ(k(2, 2), -0.5);
    s.constraint_row_sign = -1.0;
    const auto kn = block_matrix(s).to_dense();
    EXPECT_DOUBLE_EQ(kn(2, 0), -1.0);
    EXPECT_DOUBLE_EQ(kn(2, 2), 0.5);
    EXPECT_DOUBLE_EQ(block_rhs(s)[2], -4.0);
}

TEST(Dirichlet, AllConstrainedGivesIdentity)
{
    SaddleSystem s;
    s.a = linalg::csr_from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}});
    s.b = linalg::csr_from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
    s.c = linalg::empty_csr(1, 1);
    s.f = {1.0, 1.0};
    s.g = {0.0};
    const std::vector<std::size_t> dofs{0, 1};
    const auto r = apply_dirichlet(s, dofs, Vector{0.0, 0.0});
    const auto a = r.a.to_dense();
    EXPECT_DOUBLE_EQ(a(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(a(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(a(1, 1), 1.0);
    EXPECT_EQ(r.f, (Vector{0.0, 0.0}));
    EXPECT_DOUBLE_EQ(linalg::frobenius_norm(r.b), 0.0);
}

TEST(Dirichlet, NoConstraintsUnchanged)
{
    SaddleSystem s;
    s.a = linalg::csr_from_triplets(2, 2, {{0, 0, 2.0}, {1, 1, 3.0}});
    s.b = linalg::csr_from_triplets(1, 2, {{0, 0, 1.0}});
    s.c = linalg::empty_csr(1, 1);
    s.f = {1.0, 1.0};
    s.g = {0.5};
    const auto r = apply_dirichlet(s, std::vector<std::size_t>{}, Vector{});
    EXPECT_EQ(r.f, s.f);
    EXPECT_EQ(r.g, s.g);
    EXPECT_DOUBLE_EQ(r.a.at(1, 1), 3.0);
}

TEST(Dirichlet, HandEliminatedToyProblem)
{
    // [[2,−1],[−1,2]]·u = (1,0) with u₁ = 3: 2u₀ = 1 + 3 → u₀ = 2
    SaddleSystem s;
    s.a = linalg::csr_from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, -1.0}, {1, 0, -1.0}, {1, 1, 2.0}});
    s.b = linalg::csr_from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
    s.c = linalg::csr_from_triplets(1, 1, {{0, 0, 1.0}});
    s.f = {1.0, 0.0};
    s.g = {0.0};
    const auto r = apply_dirichlet(s, std::vector<std::size_t>{1}, Vector{3.0});
    EXPECT_DOUBLE_EQ(r.f[0], 4.0);
    EXPECT_DOUBLE_EQ(r.f[1], 3.0);
    EXPECT_DOUBLE_EQ(r.a.at(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(r.g[0], -3.0);
    const auto x = linalg::solve(block_matrix(r), block_rhs(r));
    EXPECT_NEAR(x[1], 3.0, 1e-15);
}
