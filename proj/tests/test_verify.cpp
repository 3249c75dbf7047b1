#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "infsup_lab/io.hpp"
#include "infsup_lab/verify.hpp"

using namespace infsup_lab;
using namespace infsup_lab::verify;

namespace {

Level make_level(std::size_t n, double h, double err)
{
    Level l;
    l.n = n;
    l.h = h;
    l.errors["err"] = err;
    return l;
}

} // namespace

TEST(FitSlope, ExactPowerLaw)
{
    const std::vector<double> hs{0.5, 0.25, 0.125, 0.0625};
    std::vector<double> es;
    for (double h : hs) es.push_back(3.0 * h * h);
    EXPECT_NEAR(fit_slope(hs, es), 2.0, 1e-10);
}

TEST(FitSlope, ConstantErrorsGiveZero)
{
    EXPECT_NEAR(fit_slope({0.5, 0.25, 0.125}, {0.1, 0.1, 0.1}), 0.0, 1e-14);
}

TEST(FitSlope, TwoPointsAndHandValues)
{
    EXPECT_NEAR(fit_slope({1.0, 0.5}, {2.0, 0.5}), 2.0, 1e-14);
    EXPECT_NEAR(fit_slope({1.0, 0.5, 0.25}, {4.0, 1.0, 0.25}), 2.0, 1e-14);
}

TEST(FitSlope, NoisyDataStaysNearTrueRate)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> noise(-0.05, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> hs, es;
        for (double h = 0.5; h > 0.01; h /= 2) {
            hs.push_back(h);
            es.push_back(h * h * (1.0 + noise(rng)));
        }
        const double s = fit_slope(hs, es);
        EXPECT_GE(s, 1.85);
        EXPECT_LE(s, 2.15);
    }
}

TEST(FitSlope, ScaleInvariance)
{
    const std::vector<double> hs{0.4, 0.2, 0.1}, es{0.3, 0.11, 0.02};
    std::vector<double> scaled;
    for (double e : es) scaled.push_back(1e6 * e);
    EXPECT_NEAR(fit_slope(hs, es), fit_slope(hs, scaled), 1e-12);
}

TEST(FitSlope, Errors)
{
    EXPECT_THROW(fit_slope({0.5}, {0.1}), DegenerateFit);
    EXPECT_THROW(fit_slope({0.5, 0.25}, {0.1, 0.0}), DegenerateFit);
    EXPECT_THROW(fit_slope({0.5, -0.25}, {0.1, 0.2}), DegenerateFit);
    EXPECT_THROW(fit_slope({0.5, 0.5}, {0.1, 0.2}), DegenerateFit);
    EXPECT_THROW(fit_slope({0.5, 0.25}, {0.1, std::nan("")}), DegenerateFit);
    EXPECT_THROW(fit_slope({0.5, 0.25, 0.1}, {0.1, 0.2}), DimensionMismatch);
}

TEST(Convergence, SlopesFromBuilder)
{
    const LevelBuilder b = [](std::size_t n) { return make_level(n, 1.0 / double(n), std::pow(1.0 / double(n), 2)); };
    for (std::size_t threads : {1u, 3u}) {
        const auto r = run_convergence(b, {8, 2, 4}, "demo", "power", threads);
        ASSERT_EQ(r.levels.size(), 3u);
        EXPECT_TRUE(r.complete());
        EXPECT_EQ(r.levels.front().n, 2u);
        EXPECT_NEAR(r.slope("err"), 2.0, 1e-12);
        EXPECT_THROW(r.slope("missing"), DegenerateFit);
    }
}

TEST(Convergence, FailedLevelOmitsSlopes)
{
    const LevelBuilder b = [](std::size_t n) {
        if (n == 8) throw SingularMatrix("pivot");
        return make_level(n, 1.0 / double(n), 1.0 / double(n));
    };
    const auto r = run_convergence(b, {2, 4, 8});
    EXPECT_FALSE(r.complete());
    EXPECT_TRUE(r.slopes.empty());
    EXPECT_EQ(r.levels.back().failure, "pivot");
}

TEST(Convergence, TooFewLevelsOmitSlopes)
{
    const LevelBuilder b = [](std::size_t n) { return make_level(n, 1.0 / double(n), 1.0 / double(n)); };
    EXPECT_TRUE(run_convergence(b, {2, 4}).slopes.empty());
}

TEST(Io, JsonKeepsSeventeenDigits)
{
    io::Json j;
    j["x"] = 0.1;
    j["inf"] = std::numeric_limits<double>::infinity();
    j["n"] = 3;
    const auto text = io::dump_json(j, 0);
    EXPECT_EQ(text, "{\"x\":0.10000000000000001,\"inf\":null,\"n\":3}");
    EXPECT_EQ(io::Json::parse(text)["x"].get<double>(), 0.1);
}

TEST(Io, CsvHeaderAndRows)
{
    EXPECT_EQ(io::csv({"a", "b"}, {{1.0, 0.5}}), "a,b\n1,0.5\n");
    EXPECT_THROW(io::csv({"a", "b"}, {{1.0}}), DimensionMismatch);
}

TEST(Io, ConvergenceExports)
{
    ConvergenceReport r;
    r.method = "th";
    r.levels = {make_level(2, 0.5, 0.25), make_level(4, 0.25, 0.0625)};
    const auto text = io::convergence_csv(r);
    EXPECT_EQ(text.substr(0, text.find('\n')), "level,h,err");
    const auto j = io::to_json(r);
    EXPECT_EQ(j["levels"].size(), 2u);
    EXPECT_EQ(j["levels"][1]["errors"]["err"].get<double>(), 0.0625);
}

TEST(Io, VtkLayout)
{
    const auto mesh = unit_square_mesh(1);
    const std::vector<double> u{0, 1, 2, 3, 10, 11, 12, 13};
    const auto text = io::vtk(mesh, {{"u", u, 2}}, {{"p", {5, 6}, 1}});
    EXPECT_NE(text.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
    EXPECT_NE(text.find("CELLS 2 8"), std::string::npos);
    EXPECT_NE(text.find("POINT_DATA 4\nVECTORS u double\n0 10 0\n"), std::string::npos);
    EXPECT_NE(text.find("CELL_DATA 2\nSCALARS p double 1\nLOOKUP_TABLE default\n5\n6\n"), std::string::npos);
    EXPECT_THROW(io::vtk(mesh, {{"short", {1.0}, 1}}, {}), DimensionMismatch);
}
