#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "infsup_lab/infsup.hpp"
#include "infsup_lab/linalg/svd.hpp"
#include "infsup_lab/locking.hpp"
#include "infsup_lab/oracle.hpp"
#include "infsup_lab/stokes.hpp"
#include "infsup_lab/verify.hpp"
#include "infsup_lab/weakbc.hpp"

/// End-to-end checks of the numbered acceptance criteria.
namespace infsup_lab::selftest {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

namespace detail {

inline std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

inline std::string g(double a) { return fmt("%.4g", a); }

inline double variation(const std::vector<double>& v)
{
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi == 0.0 ? 0.0 : (*hi - *lo) / *hi;
}

inline std::vector<double> weighted_betas(infsup::Pair pair, const std::vector<std::size_t>& ns)
{
    std::vector<double> out;
    for (auto n : ns) out.push_back(infsup::compute(pair, n, infsup::NormMode::Weighted).beta);
    return out;
}

inline std::string list(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + g(v[i]);
    return s;
}

inline verify::ConvergenceReport stokes_study(stokes::MethodKind kind)
{
    const stokes::Method m{kind, stokes::kDefaultEps};
    return verify::run_convergence([m](std::size_t n) { return stokes::mms_level(m, n); }, {8, 16, 32},
                                   std::string(stokes::method_name(kind)), "stokes-mms");
}

inline double slope_or_nan(const verify::ConvergenceReport& r, const std::string& name)
{
    const auto it = r.slopes.find(name);
    return it == r.slopes.end() ? std::nan("") : it->second;
}

} // namespace detail

inline CriterionResult criterion_1()
{
    const auto b = detail::weighted_betas(infsup::Pair::TaylorHood, {4, 8, 16});
    const double v = detail::variation(b);
    return {1, "Taylor-Hood weighted beta varies <= 15% over n=4,8,16", v <= 0.15,
            "beta = [" + detail::list(b) + "], variation " + detail::g(v)};
}

inline CriterionResult criterion_2()
{
    const auto b = detail::weighted_betas(infsup::Pair::P1P1, {4, 8, 16});
    const double r1 = b[0] / b[1], r2 = b[1] / b[2];
    return {2, "P1/P1 weighted beta(n)/beta(2n) >= 1.3 for n=4,8", r1 >= 1.3 && r2 >= 1.3,
            "beta = [" + detail::list(b) + "], ratios " + detail::g(r1) + ", " + detail::g(r2)};
}

inline CriterionResult criterion_3()
{
    const auto b = detail::weighted_betas(infsup::Pair::Mini, {4, 8, 16});
    const double v = detail::variation(b);
    return {3, "Mini weighted beta varies <= 20% over n=4,8,16", v <= 0.20,
            "beta = [" + detail::list(b) + "], variation " + detail::g(v)};
}

inline CriterionResult criterion_4()
{
    const auto mesh = unit_square_mesh(8);
    double score[2];
    int k = 0;
    for (auto mode : {infsup::NormMode::Weighted, infsup::NormMode::Euclidean}) {
        const auto r = infsup::compute(infsup::Pair::P1P0, 8, mode);
        score[k++] = infsup::spurious_mode(r, mesh).alternation;
    }
    return {4, "P1/P0 worst pressure mode alternation >= 0.8 at n=8", score[0] >= 0.8 && score[1] >= 0.8,
            "alternation weighted " + detail::g(score[0]) + ", euclidean " + detail::g(score[1])};
}

inline CriterionResult criterion_5()
{
    const auto r = detail::stokes_study(stokes::MethodKind::P1P1Loss);
    const double su = detail::slope_or_nan(r, "err_u_h1"), sp = detail::slope_or_nan(r, "err_p_l2");
    return {5, "P1/P1 with reintroduced loss: H1(u) and L2(p) slopes >= 0.9", su >= 0.9 && sp >= 0.9,
            "slopes u_h1 " + detail::g(su) + ", p_l2 " + detail::g(sp)};
}

inline CriterionResult criterion_6()
{
    const auto r = detail::stokes_study(stokes::MethodKind::BrezziPitkaranta);
    const double su = detail::slope_or_nan(r, "err_u_h1");
    return {6, "Brezzi-Pitkaranta (eps=0.05): H1(u) slope >= 0.9", su >= 0.9, "slope u_h1 " + detail::g(su)};
}

inline CriterionResult criterion_7()
{
    const auto r = detail::stokes_study(stokes::MethodKind::TaylorHood);
    const double su = detail::slope_or_nan(r, "err_u_h1"), sp = detail::slope_or_nan(r, "err_p_l2");
    return {7, "Taylor-Hood: H1(u) slope >= 1.9, L2(p) slope >= 1.7", su >= 1.9 && sp >= 1.7,
            "slopes u_h1 " + detail::g(su) + ", p_l2 " + detail::g(sp)};
}

inline CriterionResult criterion_8()
{
    locking::LockingConfig cfg;
    cfg.n = 8;
    const auto ratio = [&](locking::Method m, locking::ProjectionMass pm) {
        cfg.method = m;
        cfg.projection_mass = pm;
        const auto r = locking::lambda_sweep(cfg, {1e2, 1e6});
        if (!r[0].solve_ok || !r[1].solve_ok) return std::nan("");
        return r[1].u_h1_norm / r[0].u_h1_norm;
    };
    const double plain = ratio(locking::Method::Plain, locking::ProjectionMass::Lumped);
    const double corr = ratio(locking::Method::Corrected, locking::ProjectionMass::Lumped);
    const double corr_consistent = ratio(locking::Method::Corrected, locking::ProjectionMass::Consistent);
    return {8, "Locking: Plain ratio <= 0.2, Corrected ratio in [0.8, 1.25] (n=8, lambda 1e2 -> 1e6)",
            plain <= 0.2 && corr >= 0.8 && corr <= 1.25,
            "plain " + detail::g(plain) + ", corrected (lumped) " + detail::g(corr) +
                "; corrected with consistent projection mass " + detail::g(corr_consistent)};
}

inline CriterionResult criterion_9()
{
    const auto mesh = unit_square_mesh(4);
    locking::LockingConfig cfg;
    const auto op = locking::locking_operators(mesh, cfg.f, cfg.g);
    const auto plain = locking::build_plain(op, cfg.lambda).matrix.to_dense();
    const auto mo = locking::multiplier_operators(op, locking::MultiplierSpace::DiscontinuousP1);
    const auto elim = locking::multiplier_eliminated(locking::build_multiplier(op, mo, cfg.lambda));
    auto diff = elim;
    diff -= plain;
    const double d = linalg::frobenius_norm(diff);
    return {9, "Eliminating the multiplier reproduces the Plain matrix (Frobenius <= 1e-12, n=4)", d <= 1e-12,
            "lambda " + detail::g(cfg.lambda) + ", ||diff||_F " + detail::g(d) + ", relative " +
                detail::g(d / linalg::frobenius_norm(plain))};
}

inline CriterionResult criterion_10()
{
    const auto mesh = unit_square_mesh(8);
    const auto m = weakbc::default_method(weakbc::MethodKind::Nitsche, mesh);
    const ScalarFunction one = [](const Point&) { return 1.0; };
    const auto sol = weakbc::solve(weakbc::build(m, mesh, one, one));
    double err = 0.0;
    for (double u : sol.u) err = std::max(err, std::abs(u - 1.0));
    const auto r = verify::run_convergence(
        [](std::size_t n) { return weakbc::mms_level({weakbc::MethodKind::Nitsche, 0.0, 0.0}, n); }, {8, 16, 32},
        "nitsche", "weakbc-mms");
    const double s = detail::slope_or_nan(r, "err_u_h1");
    return {10, "Nitsche reproduces u=1 (max err <= 1e-10, n=8); H1 slope >= 0.9", err <= 1e-10 && s >= 0.9,
            "max |u-1| " + detail::g(err) + ", slope u_h1 " + detail::g(s)};
}

inline CriterionResult criterion_11()
{
    const auto mesh = unit_square_mesh(4);
    const auto p = weakbc::mms_problem();
    const double alpha = 0.1;
    const auto r0 = weakbc::equivalence_check(mesh, p.f, p.d, alpha, weakbc::TraceSpace::P0);
    const auto rd = weakbc::equivalence_check(mesh, p.f, p.d, alpha, weakbc::TraceSpace::P1Disc);
    return {11, "BH (P0 multipliers) matches Nitsche (gamma=1/alpha) to 1e-9 relative in H1, n=4",
            r0.relative_discrepancy <= 1e-9,
            "alpha 0.1, relative H1 discrepancy " + detail::g(r0.relative_discrepancy) +
                "; with discontinuous P1 multipliers " + detail::g(rd.relative_discrepancy)};
}

inline CriterionResult criterion_12(unsigned seed = 12345)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> rows(1, 60), cols(1, 40);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    double worst_rec = 0.0, worst_orth = 0.0, worst_pair = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = rows(rng), n = cols(rng);
        linalg::DenseMatrix a(m, n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = val(rng);
        const auto s = linalg::svd(a);
        auto rec = linalg::reconstruct(s, m, n);
        rec -= a;
        worst_rec = std::max(worst_rec, linalg::frobenius_norm(rec) / linalg::frobenius_norm(a));
        for (const auto* q : {&s.u, &s.v}) {
            auto qtq = linalg::matmul_tn(*q, *q);
            for (std::size_t i = 0; i < qtq.rows(); ++i) qtq(i, i) -= 1.0;
            worst_orth = std::max(worst_orth, linalg::frobenius_norm(qtq));
        }
        // [[0, A], [Aᵀ, 0]] has eigenvalues ±σᵢ padded with zeros
        linalg::DenseMatrix blk(m + n, m + n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) blk(i, m + j) = blk(m + j, i) = a(i, j);
        const auto eig = linalg::sym_eig(blk);
        std::vector<double> expect(m + n, 0.0);
        for (std::size_t k = 0; k < s.sigma.size(); ++k) {
            expect[k] = s.sigma[k];
            expect[m + n - 1 - k] = -s.sigma[k];
        }
        std::sort(expect.begin(), expect.end(), std::greater<>());
        for (std::size_t k = 0; k < m + n; ++k) worst_pair = std::max(worst_pair, std::abs(eig.values[k] - expect[k]));
    }
    return {12, "SVD on 100 random matrices: reconstruction, orthogonality <= 1e-12; +-sigma pairing <= 1e-10",
            worst_rec <= 1e-12 && worst_orth <= 1e-12 && worst_pair <= 1e-10,
            "worst reconstruction " + detail::g(worst_rec) + ", orthogonality " + detail::g(worst_orth) +
                ", eigen pairing " + detail::g(worst_pair)};
}

inline CriterionResult criterion_13()
{
    const auto checks = oracle::check_all_forms(2);
    double worst = 0.0;
    std::string which;
    for (const auto& c : checks)
        if (c.relative_error >= worst) {
            worst = c.relative_error;
            which = c.name;
        }
    return {13, "Assembled forms match independent re-quadrature to 1e-12 relative (n=2)", worst <= 1e-12,
            std::to_string(checks.size()) + " forms, worst " + detail::g(worst) + " (" + which + ")"};
}

inline const std::vector<std::function<CriterionResult()>>& all_criteria()
{
    static const std::vector<std::function<CriterionResult()>> c{
        criterion_1, criterion_2, criterion_3,  criterion_4,  criterion_5,  criterion_6,  criterion_7,
        criterion_8, criterion_9, criterion_10, criterion_11, [] { return criterion_12(); }, criterion_13};
    return c;
}

/// Runs one criterion, turning library errors into a failed result.
inline CriterionResult run(const std::function<CriterionResult()>& c, int id)
{
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = c();
    } catch (const std::exception& e) {
        r.id = id;
        r.title = "criterion " + std::to_string(id);
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline std::string format_line(const CriterionResult& r)
{
    char head[32];
    std::snprintf(head, sizeof head, "[%s] %2d ", r.pass ? "PASS" : "FAIL", r.id);
    return std::string(head) + r.title + " | " + r.detail + " (" + detail::fmt("%.1f", r.seconds) + " s)";
}

/// Parses "8,11" into a set of ids.
inline std::set<int> parse_id_list(const std::string& s)
{
    std::set<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.insert(std::stoi(item));
    return out;
}

inline std::set<int> failed_ids(const std::vector<CriterionResult>& rs)
{
    std::set<int> out;
    for (const auto& r : rs)
        if (!r.pass) out.insert(r.id);
    return out;
}

} // namespace infsup_lab::selftest
