#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "infsup_lab/infsup.hpp"

using namespace infsup_lab;
using namespace infsup_lab::infsup;

namespace {

DenseMatrix rotation(double angle, std::size_t n, std::size_t i, std::size_t j)
{
    DenseMatrix r(n, n, 0.0);
    for (std::size_t k = 0; k < n; ++k) r(k, k) = 1.0;
    r(i, i) = r(j, j) = std::cos(angle);
    r(i, j) = -std::sin(angle);
    r(j, i) = std::sin(angle);
    return r;
}

DenseMatrix identity(std::size_t n)
{
    DenseMatrix r(n, n, 0.0);
    for (std::size_t k = 0; k < n; ++k) r(k, k) = 1.0;
    return r;
}

DenseMatrix permute(const DenseMatrix& a, const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols)
{
    DenseMatrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(rows[i], cols[j]);
    return out;
}

} // namespace

TEST(InfSupEuclidean, DiagonalExtension)
{
    const DenseMatrix b{{3, 0, 0}, {0, 1, 0}};
    const auto r = infsup_euclidean(b);
    EXPECT_NEAR(r.beta, 1.0, 1e-14);
    EXPECT_EQ(r.numerical_rank, 2u);
    EXPECT_EQ(r.kernel_dim_pressure, 0u);
}

TEST(InfSupEuclidean, ExplicitKernel)
{
    const DenseMatrix b{{1, 0}, {0, 0}};
    const auto r = infsup_euclidean(b);
    EXPECT_NEAR(r.beta, 1.0, 1e-14);
    EXPECT_EQ(r.kernel_dim_pressure, 1u);
    EXPECT_NEAR(std::abs(r.kernel_basis(1, 0)), 1.0, 1e-14);
}

TEST(InfSupEuclidean, InjectedTinySingularValueIsRankDeficient)
{
    DenseMatrix s(3, 4, 0.0);
    s(0, 0) = 5.0;
    s(1, 1) = 2.0;
    s(2, 2) = 1e-14;
    const auto u = linalg::matmul(rotation(0.3, 3, 0, 1), rotation(1.1, 3, 1, 2));
    const auto v = linalg::matmul(rotation(0.7, 4, 0, 3), rotation(-0.4, 4, 1, 2));
    const auto b = linalg::matmul(linalg::matmul(u, s), v);
    const auto r = infsup_euclidean(b);
    EXPECT_NEAR(r.beta, 2.0, 1e-13);
    EXPECT_EQ(r.numerical_rank, 2u);
    EXPECT_EQ(r.kernel_dim_pressure, 1u);
}

TEST(InfSupEuclidean, MatchesBlockEigenvalues)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    DenseMatrix b(5, 9);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 9; ++j) b(i, j) = d(rng);
    DenseMatrix k(14, 14, 0.0);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 9; ++j) k(9 + i, j) = k(j, 9 + i) = b(i, j);
    const auto eig = linalg::sym_eig(k);
    const auto r = infsup_euclidean(b);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(eig.values[i], r.sigma[i], 1e-10);
    EXPECT_NEAR(r.beta, eig.values[4], 1e-10);
}

TEST(InfSupWeighted, IdentityNormsReduceToEuclidean)
{
    const DenseMatrix m{{2, 1, 0}, {1, 3, 1}, {0, 1, 4}};
    const auto r = infsup_weighted(m, identity(3), identity(3));
    const auto eig = linalg::sym_eig(m);
    EXPECT_NEAR(r.beta, eig.values.back(), 1e-13);
    EXPECT_NEAR(r.beta, infsup_euclidean(m).beta, 1e-13);
}

TEST(InfSupWeighted, ScaledNorms)
{
    // X = 4I, M = 9I: β scales by 1/(2·3)
    const DenseMatrix b{{3, 0, 0}, {0, 1, 0}};
    auto x = identity(3);
    x *= 4.0;
    auto m = identity(2);
    m *= 9.0;
    EXPECT_NEAR(infsup_weighted(b, x, m).beta, 1.0 / 6.0, 1e-14);
}

TEST(InfSupWeighted, ErrorsPropagate)
{
    const DenseMatrix b{{1, 0}, {0, 1}};
    const DenseMatrix indefinite{{1, 0}, {0, -1}};
    EXPECT_THROW(infsup_weighted(b, indefinite, identity(2)), NotPositiveDefinite);
    EXPECT_THROW(infsup_weighted(b, identity(3), identity(2)), DimensionMismatch);
}

TEST(InfSupWeighted, PermutationInvariance)
{
    const auto mesh = unit_square_mesh(4);
    const auto op = pair_operators(Pair::TaylorHood, mesh);
    const double beta = infsup_weighted(op.b, op.x_norm, op.m_norm).beta;
    std::mt19937_64 rng(5);
    std::vector<std::size_t> pv(op.b.cols()), pp(op.b.rows());
    std::iota(pv.begin(), pv.end(), 0);
    std::iota(pp.begin(), pp.end(), 0);
    std::shuffle(pv.begin(), pv.end(), rng);
    std::shuffle(pp.begin(), pp.end(), rng);
    const auto r = infsup_weighted(permute(op.b, pp, pv), permute(op.x_norm, pv, pv), permute(op.m_norm, pp, pp));
    EXPECT_NEAR(r.beta, beta, 1e-10);
}

TEST(InfSupPairs, ConstantPressureInKernel)
{
    for (auto pair : {Pair::TaylorHood, Pair::Mini, Pair::P1P1, Pair::P1P0, Pair::P2P0})
        for (auto mode : {NormMode::Euclidean, NormMode::Weighted}) {
            const auto r = compute(pair, 4, mode);
            EXPECT_GE(r.kernel_dim_pressure, 1u) << pair_name(pair);
            EXPECT_LE(r.constant_kernel_angle, 1e-8) << pair_name(pair);
        }
}

TEST(InfSupPairs, KernelDimensions)
{
    EXPECT_EQ(compute(Pair::TaylorHood, 4, NormMode::Weighted).kernel_dim_pressure, 1u);
    EXPECT_EQ(compute(Pair::Mini, 4, NormMode::Weighted).kernel_dim_pressure, 1u);
    EXPECT_EQ(compute(Pair::P2P0, 4, NormMode::Weighted).kernel_dim_pressure, 1u);
    // more pressure dofs (32) than free P1 velocities (18) on n = 4
    EXPECT_GE(compute(Pair::P1P0, 4, NormMode::Weighted).kernel_dim_pressure, 14u);
}

TEST(InfSupPairs, StablePairsKeepBeta)
{
    for (auto pair : {Pair::TaylorHood, Pair::Mini}) {
        const double a = compute(pair, 4, NormMode::Weighted).beta;
        const double b = compute(pair, 8, NormMode::Weighted).beta;
        EXPECT_LE(std::abs(a - b) / std::max(a, b), 0.2) << pair_name(pair);
        EXPECT_GT(b, 0.1);
    }
}

TEST(InfSupPairs, EqualOrderBetaDecays)
{
    const double a = compute(Pair::P1P1, 4, NormMode::Weighted).beta;
    const double b = compute(Pair::P1P1, 8, NormMode::Weighted).beta;
    EXPECT_GE(a / b, 1.3);
}

TEST(InfSupPairs, BetaIsBoundedByOne)
{
    // |(∇·v, q)| ≤ √2·|v|_H¹‖q‖, so the weighted constant never exceeds √2
    for (auto pair : {Pair::TaylorHood, Pair::Mini, Pair::P1P1, Pair::P2P0})
        EXPECT_LE(compute(pair, 4, NormMode::Weighted).sigma.front(), std::sqrt(2.0) + 1e-12) << pair_name(pair);
}

TEST(SpuriousMode, CheckerboardForP1P0)
{
    const auto mesh = unit_square_mesh(8);
    const auto r = compute(Pair::P1P0, 8, NormMode::Weighted);
    const auto m = spurious_mode(r, mesh);
    EXPECT_TRUE(m.cell_data);
    EXPECT_EQ(m.values.size(), mesh.n_triangles());
    EXPECT_GE(m.alternation, 0.8);
}

TEST(SpuriousMode, TaylorHoodModeReported)
{
    const auto mesh = unit_square_mesh(4);
    const auto m = spurious_mode(compute(Pair::TaylorHood, 4, NormMode::Weighted), mesh);
    EXPECT_FALSE(m.cell_data);
    EXPECT_GE(m.alternation, 0.0);
    EXPECT_LE(m.alternation, 1.0);
}

TEST(SpuriousMode, ModeIsOrthogonalToConstants)
{
    const auto mesh = unit_square_mesh(4);
    const auto r = compute(Pair::TaylorHood, 4, NormMode::Weighted);
    const auto m = mass(FeSpace(mesh, ElementKind::P1)).to_dense();
    const auto mq = linalg::matvec(m, r.worst_pressure_mode);
    EXPECT_NEAR(std::accumulate(mq.begin(), mq.end(), 0.0), 0.0, 1e-10);
}

TEST(AlternationScore, ConstantAndZeroFields)
{
    const auto mesh = unit_square_mesh(4);
    EXPECT_DOUBLE_EQ(alternation_score(mesh, ElementKind::P1, std::vector<double>(mesh.n_nodes(), 1.0)), 0.0);
    EXPECT_DOUBLE_EQ(alternation_score(mesh, ElementKind::P0, std::vector<double>(mesh.n_triangles(), 0.0)), 0.0);
}

TEST(InfSupParse, NamesAndErrors)
{
    for (auto p : {Pair::TaylorHood, Pair::Mini, Pair::P1P1, Pair::P1P0, Pair::P2P0}) EXPECT_EQ(parse_pair(pair_name(p)), p);
    EXPECT_EQ(parse_mode("weighted"), NormMode::Weighted);
    EXPECT_THROW(parse_pair("q2q1"), UnsupportedCombination);
    EXPECT_THROW(parse_mode("energy"), UnsupportedCombination);
}
