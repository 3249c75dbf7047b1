#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "infsup_lab/infsup.hpp"
#include "infsup_lab/io.hpp"
#include "infsup_lab/locking.hpp"
#include "infsup_lab/selftest.hpp"
#include "infsup_lab/stokes.hpp"
#include "infsup_lab/verify.hpp"
#include "infsup_lab/weakbc.hpp"

#ifndef INFSUP_LAB_VERSION
#define INFSUP_LAB_VERSION "dev"
#endif

namespace {

using namespace infsup_lab;
using io::Json;

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Outputs {
    std::string json;
    std::string csv;
    std::string vtk;
};

std::size_t worker_count()
{
    const char* env = std::getenv("INFSUP_LAB_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw UsageError("INFSUP_LAB_THREADS must be a positive integer");
    return std::size_t(v);
}

std::string timestamp()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

Json envelope(Json config, Json results, const std::string& status)
{
    Json j;
    j["config"] = std::move(config);
    j["results"] = std::move(results);
    j["status"] = status;
    j["version"] = INFSUP_LAB_VERSION;
    j["timestamp"] = timestamp();
    return j;
}

void write_json(const Outputs& out, const Json& doc)
{
    if (!out.json.empty()) io::write_text(out.json, io::dump_json(doc));
}

void require(bool ok, const std::string& msg)
{
    if (!ok) throw UsageError(msg);
}

std::vector<double> parse_doubles(const std::string& s)
{
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto next = s.find(',', pos);
        const auto item = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("cannot parse number '" + item + "'");
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s)
{
    std::vector<std::size_t> out;
    for (double v : parse_doubles(s)) {
        require(v >= 1.0 && v == std::floor(v) && v <= 4096.0, "mesh sizes must be integers in [1, 4096]");
        out.push_back(std::size_t(v));
    }
    return out;
}

/// Vertex values of a velocity field as a component-major 2·n_nodes vector.
std::vector<double> vertex_velocity(const FeSpace& vs, const Vector& u)
{
    const std::size_t nn = vs.mesh().n_nodes(), ns = vs.n_scalar_dofs();
    std::vector<double> out(2 * nn);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < nn; ++i) out[c * nn + i] = u[c * ns + i];
    return out;
}

// ---------------------------------------------------------------- stokes

struct StokesArgs {
    std::string method = "th";
    std::size_t n = 16;
    double eps = stokes::kDefaultEps;
};

int run_stokes(const StokesArgs& a, const Outputs& out)
{
    const auto kind = stokes::parse_method(a.method);
    require(a.n >= 1, "--n must be at least 1");
    require(a.eps > 0.0, "--eps must be positive");
    Json config{{"subcommand", "stokes"}, {"method", a.method}, {"n", a.n}, {"eps", a.eps}};
    const auto mesh = unit_square_mesh(a.n);
    const auto exact = stokes::manufactured_problem();
    const auto st = stokes::build({kind, a.eps}, mesh, exact.f);
    stokes::StokesSolution sol;
    try {
        sol = stokes::solve(st);
    } catch (const SingularMatrix& e) {
        std::cout << "stokes " << a.method << " n=" << a.n << ": singular system (" << e.what() << ")\n";
        write_json(out, envelope(config, Json{{"h", mesh.h}, {"message", e.what()}}, "singular"));
        return kExitOk;
    }
    const auto e = stokes::errors(st, sol, exact);
    Json results{{"h", mesh.h},
                 {"err_u_l2", e.err_u_l2},
                 {"err_u_h1", e.err_u_h1},
                 {"err_p_l2", e.err_p_l2},
                 {"residual", sol.residual_norm},
                 {"mass_balance_defect", stokes::mass_balance_defect(st, sol)},
                 {"oscillation_indicator", stokes::oscillation_indicator(st.pressure, sol.p)},
                 {"velocity_dofs", st.velocity.n_dofs()},
                 {"pressure_dofs", st.pressure.n_dofs()}};
    if (st.pressure.kind() == ElementKind::P1)
        results["boundary_normal_pressure_gradient"] = stokes::boundary_normal_gradient(st.pressure, sol.p);
    std::printf("stokes %s n=%zu h=%.6g err_u_l2=%.6e err_u_h1=%.6e err_p_l2=%.6e residual=%.2e\n", a.method.c_str(),
                a.n, mesh.h, e.err_u_l2, e.err_u_h1, e.err_p_l2, sol.residual_norm);
    const bool finite = std::isfinite(e.err_u_h1) && std::isfinite(e.err_p_l2);
    write_json(out, envelope(config, results, finite ? "ok" : "failed"));
    if (!out.csv.empty())
        io::write_text(out.csv, io::csv({"h", "err_u_l2", "err_u_h1", "err_p_l2"},
                                        {{mesh.h, e.err_u_l2, e.err_u_h1, e.err_p_l2}}));
    if (!out.vtk.empty()) {
        std::vector<io::VtkField> pd{{"velocity", vertex_velocity(st.velocity, sol.u), 2}};
        std::vector<io::VtkField> cd;
        if (st.pressure.kind() == ElementKind::P0) cd.push_back({"pressure", sol.p, 1});
        else pd.push_back({"pressure", sol.p, 1});
        io::write_text(out.vtk, io::vtk(mesh, pd, cd));
    }
    return finite ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------------- convergence

struct ConvergenceArgs {
    std::string problem = "stokes";
    std::string method = "th";
    std::string levels = "8,16,32";
    double eps = stokes::kDefaultEps;
    double alpha = 0.0;
    double gamma = 0.0;
    std::string trace = "p1";
    std::string scaling = "squared";
};

int run_convergence_cmd(const ConvergenceArgs& a, const Outputs& out)
{
    const auto ns = parse_sizes(a.levels);
    require(ns.size() >= 3, "--levels needs at least three mesh sizes");
    require(a.eps > 0.0, "--eps must be positive");
    require(a.alpha >= 0.0 && a.gamma >= 0.0, "--alpha and --gamma must be non-negative (0 selects the default)");
    Json config{{"subcommand", "convergence"}, {"problem", a.problem}, {"method", a.method}, {"levels", ns}};
    verify::LevelBuilder builder;
    if (a.problem == "stokes") {
        const stokes::Method m{stokes::parse_method(a.method), a.eps};
        config["eps"] = a.eps;
        builder = [m](std::size_t n) { return stokes::mms_level(m, n); };
    } else if (a.problem == "weakbc") {
        const weakbc::Method m{weakbc::parse_method(a.method), a.alpha, a.gamma};
        const auto trace = weakbc::parse_trace(a.trace);
        const auto scaling = weakbc::parse_scaling(a.scaling);
        config["alpha"] = a.alpha;
        config["gamma"] = a.gamma;
        config["trace"] = a.trace;
        config["scaling"] = a.scaling;
        builder = [m, trace, scaling](std::size_t n) { return weakbc::mms_level(m, n, trace, scaling); };
    } else {
        throw UsageError("--problem must be 'stokes' or 'weakbc'");
    }
    const auto r = verify::run_convergence(builder, ns, a.method, a.problem, worker_count());
    for (const auto& l : r.levels) {
        std::printf("n=%-4zu h=%.6g", l.n, l.h);
        if (!l.ok) std::printf(" failed: %s", l.failure.c_str());
        for (const auto& [k, v] : l.errors) std::printf(" %s=%.6e", k.c_str(), v);
        std::printf("\n");
    }
    for (const auto& [k, v] : r.slopes) std::printf("slope %s = %.4f\n", k.c_str(), v);
    const bool ok = r.complete();
    write_json(out, envelope(config, io::to_json(r), ok ? "ok" : "failed"));
    if (!out.csv.empty()) io::write_text(out.csv, io::convergence_csv(r));
    return ok ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------------- infsup

struct InfSupArgs {
    std::string pair = "th";
    std::size_t n = 8;
    std::string mode = "weighted";
    double rank_tol = -1.0;
};

int run_infsup(const InfSupArgs& a, const Outputs& out)
{
    const auto pair = infsup::parse_pair(a.pair);
    const auto mode = infsup::parse_mode(a.mode);
    require(a.n >= 1, "--n must be at least 1");
    const auto r = infsup::compute(pair, a.n, mode, a.rank_tol);
    const auto mesh = unit_square_mesh(a.n);
    const auto sm = infsup::spurious_mode(r, mesh);
    Json config{{"subcommand", "infsup"}, {"pair", a.pair}, {"n", a.n}, {"mode", a.mode}, {"rank_tol", a.rank_tol}};
    Json results{{"h", r.h},
                 {"beta", r.beta},
                 {"numerical_rank", r.numerical_rank},
                 {"kernel_dim_pressure", r.kernel_dim_pressure},
                 {"constant_kernel_angle", r.constant_kernel_angle},
                 {"rank_tol", r.rank_tol},
                 {"worst_mode_alternation", sm.alternation},
                 {"sigma", r.sigma}};
    std::printf("infsup %s n=%zu mode=%s beta=%.6e rank=%zu kernel_dim=%zu alternation=%.4f\n", a.pair.c_str(), a.n,
                a.mode.c_str(), r.beta, r.numerical_rank, r.kernel_dim_pressure, sm.alternation);
    write_json(out, envelope(config, results, "ok"));
    if (!out.csv.empty()) {
        std::vector<std::vector<double>> rows;
        for (std::size_t k = 0; k < r.sigma.size(); ++k) rows.push_back({double(k), r.sigma[k]});
        io::write_text(out.csv, io::csv({"index", "sigma"}, rows));
    }
    if (!out.vtk.empty()) {
        const std::vector<io::VtkField> f{{"worst_pressure_mode", sm.values, 1}};
        io::write_text(out.vtk, sm.cell_data ? io::vtk(mesh, {}, f) : io::vtk(mesh, f, {}));
    }
    return kExitOk;
}

// ---------------------------------------------------------------- locking

struct LockingArgs {
    std::string method = "plain";
    std::string lambdas = "1e2,1e4,1e6";
    std::size_t n = 8;
    double c_omega = locking::kUnitSquarePoincare;
    std::string multiplier_space = "p1-disc";
    std::string projection_mass = "lumped";
    bool tilde_a = false;
};

int run_locking(const LockingArgs& a, const Outputs& out)
{
    locking::LockingConfig cfg;
    cfg.method = locking::parse_method(a.method);
    cfg.n = a.n;
    cfg.poincare_const = a.c_omega;
    cfg.multiplier_space = locking::parse_space(a.multiplier_space);
    cfg.projection_mass = locking::parse_mass(a.projection_mass);
    cfg.tilde_a = a.tilde_a;
    const auto lambdas = parse_doubles(a.lambdas);
    require(a.n >= 1, "--n must be at least 1");
    require(a.c_omega > 0.0, "--c-omega must be positive");
    for (double l : lambdas) require(l >= 0.0 && std::isfinite(l), "--lambdas must be non-negative");

    const auto mesh = unit_square_mesh(cfg.n);
    const auto op = locking::locking_operators(mesh, cfg.f, cfg.g);
    std::vector<locking::LockingReport> reports(lambdas.size());
    const std::size_t threads = worker_count();
    for (std::size_t start = 0; start < lambdas.size(); start += threads) {
        std::vector<std::future<locking::LockingReport>> jobs;
        for (std::size_t i = start; i < std::min(lambdas.size(), start + threads); ++i) {
            auto c = cfg;
            c.lambda = lambdas[i];
            jobs.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                      [&op, c] { return locking::report(op, c); }));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) reports[start + i] = jobs[i].get();
    }

    Json config{{"subcommand", "locking"},       {"method", a.method},
                {"lambdas", lambdas},            {"n", a.n},
                {"c_omega", a.c_omega},          {"multiplier_space", a.multiplier_space},
                {"projection_mass", a.projection_mass}, {"tilde_a", a.tilde_a},
                {"f", {1.0, 1.0}},               {"g", 0.0}};
    Json results = Json::array();
    bool ok = true;
    std::vector<std::vector<double>> rows;
    for (const auto& r : reports) {
        Json e{{"lambda", r.lambda}, {"u_h1_norm", r.u_h1_norm}, {"p_h1_norm", r.p_h1_norm}, {"solve_ok", r.solve_ok}};
        if (!r.message.empty()) e["message"] = r.message;
        results.push_back(e);
        ok = ok && r.solve_ok;
        rows.push_back({r.lambda, r.u_h1_norm, r.p_h1_norm});
        std::printf("lambda=%-10.4g u_h1=%.6e p_h1=%.6e %s\n", r.lambda, r.u_h1_norm, r.p_h1_norm,
                    r.solve_ok ? "ok" : ("failed: " + r.message).c_str());
    }
    write_json(out, envelope(config, results, ok ? "ok" : "failed"));
    if (!out.csv.empty()) io::write_text(out.csv, io::csv({"lambda", "u_h1_norm", "p_h1_norm"}, rows));
    if (!out.vtk.empty() && !reports.empty()) {
        auto c = cfg;
        c.lambda = lambdas.back();
        const auto sol = locking::solve(op, c);
        const FeSpace vs(mesh, ElementKind::P1, 2), ps(mesh, ElementKind::P1, 1);
        io::write_text(out.vtk, io::vtk(mesh,
                                        {{"u", locking::expand(op.u_free, vs.n_dofs(), sol.u), 2},
                                         {"p", locking::expand(op.p_free, ps.n_dofs(), sol.p), 1}},
                                        {}));
    }
    return ok ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------------- weakbc

struct WeakBcArgs {
    std::string method = "nitsche";
    std::size_t n = 8;
    double alpha = 0.0;
    double gamma = 0.0;
    std::string trace = "p1";
    std::string scaling = "squared";
    bool equivalence = false;
};

int run_weakbc(const WeakBcArgs& a, const Outputs& out)
{
    const auto kind = weakbc::parse_method(a.method);
    const auto trace = weakbc::parse_trace(a.trace);
    const auto scaling = weakbc::parse_scaling(a.scaling);
    require(a.n >= 1, "--n must be at least 1");
    require(a.alpha >= 0.0 && a.gamma >= 0.0, "--alpha and --gamma must be non-negative (0 selects the default)");
    const auto mesh = unit_square_mesh(a.n);
    const double ci = weakbc::inverse_constant(mesh);
    auto m = weakbc::default_method(kind, mesh, scaling);
    if (a.alpha > 0.0) m.alpha = a.alpha;
    if (a.gamma > 0.0) m.gamma = a.gamma;
    const auto p = weakbc::mms_problem();
    const auto sys = weakbc::build(m, mesh, p.f, p.d, trace);
    const auto sol = weakbc::solve(sys);
    const auto e = weakbc::errors(mesh, sol.u, p.u, p.grad_u);

    Json config{{"subcommand", "weakbc"}, {"method", a.method}, {"n", a.n},         {"alpha", m.alpha},
                {"gamma", m.gamma},       {"trace", a.trace},   {"scaling", a.scaling}};
    Json results{{"h", mesh.h},
                 {"inverse_constant", ci},
                 {"err_u_l2", e.l2},
                 {"err_u_h1", e.h1},
                 {"residual", sol.residual_norm},
                 {"lambda_roughness", weakbc::lambda_roughness(sys, sol.lambda)}};
    std::printf("weakbc %s n=%zu C_i=%.6f err_u_l2=%.6e err_u_h1=%.6e residual=%.2e\n", a.method.c_str(), a.n, ci, e.l2,
                e.h1, sol.residual_norm);
    if (a.equivalence) {
        const double alpha = a.alpha > 0.0 ? a.alpha : weakbc::default_alpha(ci, scaling);
        const auto eq = weakbc::equivalence_check(mesh, p.f, p.d, alpha, trace);
        results["equivalence"] = {{"alpha", alpha},
                                  {"trace", a.trace},
                                  {"discrepancy", eq.discrepancy},
                                  {"relative_discrepancy", eq.relative_discrepancy}};
        std::printf("bh/nitsche equivalence alpha=%.6g trace=%s relative discrepancy=%.3e\n", alpha, a.trace.c_str(),
                    eq.relative_discrepancy);
    }
    const bool ok = sol.residual_norm <= 1e-9;
    write_json(out, envelope(config, results, ok ? "ok" : "failed"));
    if (!out.csv.empty())
        io::write_text(out.csv, io::csv({"h", "err_u_l2", "err_u_h1"}, {{mesh.h, e.l2, e.h1}}));
    if (!out.vtk.empty()) io::write_text(out.vtk, io::vtk(mesh, {{"u", sol.u, 1}}, {}));
    return ok ? kExitOk : kExitNumerical;
}

// ---------------------------------------------------------------- selftest

struct SelftestArgs {
    std::string only;
    std::string expect_fail;
    unsigned seed = 12345;
};

int run_selftest(const SelftestArgs& a, const Outputs& out)
{
    const auto& all = selftest::all_criteria();
    std::set<int> only = selftest::parse_id_list(a.only);
    for (int id : only) require(id >= 1 && id <= int(all.size()), "--only ids must lie in 1.." + std::to_string(all.size()));
    const auto expected = selftest::parse_id_list(a.expect_fail);
    std::vector<selftest::CriterionResult> results;
    for (int id = 1; id <= int(all.size()); ++id) {
        if (!only.empty() && !only.count(id)) continue;
        const auto fn = id == 12 ? std::function<selftest::CriterionResult()>([&] { return selftest::criterion_12(a.seed); })
                                 : all[std::size_t(id - 1)];
        results.push_back(selftest::run(fn, id));
        std::cout << selftest::format_line(results.back()) << std::endl;
    }
    const auto failed = selftest::failed_ids(results);
    std::printf("%zu/%zu criteria passed\n", results.size() - failed.size(), results.size());
    Json rs = Json::array();
    for (const auto& r : results)
        rs.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
    std::string status = failed.empty() ? "ok" : "failed";
    int code = failed.empty() ? kExitOk : kExitNumerical;
    if (!expected.empty()) {
        std::set<int> considered;
        for (int id : expected)
            if (only.empty() || only.count(id)) considered.insert(id);
        const bool match = failed == considered;
        std::printf("expected failures {%s}: %s\n", a.expect_fail.c_str(), match ? "matched" : "NOT matched");
        status = match ? "expected-failures" : "failed";
        code = match ? kExitOk : kExitNumerical;
    }
    write_json(out, envelope(Json{{"subcommand", "selftest"}, {"only", a.only}, {"expect_fail", a.expect_fail},
                                  {"seed", a.seed}},
                             rs, status));
    return code;
}

void add_outputs(CLI::App* sub, Outputs& out, bool vtk)
{
    sub->add_option("--json", out.json, "Write the JSON report to this path");
    sub->add_option("--csv", out.csv, "Write a CSV table to this path");
    if (vtk) sub->add_option("--vtk", out.vtk, "Write a legacy VTK file to this path");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"infsup-lab: mixed finite element experiments on the unit square"};
    app.option_defaults()->always_capture_default();
    app.set_version_flag("--version", std::string(INFSUP_LAB_VERSION));
    app.require_subcommand(1);
    app.footer("Environment: INFSUP_LAB_THREADS sets the worker count (default 1).");

    Outputs out;
    StokesArgs sa;
    auto* s = app.add_subcommand("stokes", "Solve the manufactured Stokes problem with one method");
    s->add_option("--method", sa.method, "p1p1-plain | p1p1-loss | bp | gls | dw | th | mini | p2p0");
    s->add_option("--n", sa.n, "Cells per side");
    s->add_option("--eps", sa.eps, "Stabilization parameter (bp, gls, dw)");
    add_outputs(s, out, true);

    ConvergenceArgs ca;
    auto* c = app.add_subcommand("convergence", "Manufactured-solution convergence study");
    c->add_option("--problem", ca.problem, "stokes | weakbc");
    c->add_option("--method", ca.method, "Stokes or weak-BC method name");
    c->add_option("--levels", ca.levels, "Comma-separated cells per side (at least three)");
    c->add_option("--eps", ca.eps, "Stokes stabilization parameter");
    c->add_option("--alpha", ca.alpha, "BH parameter (0: 0.5/C_i^2 or 0.5/C_i per --scaling)");
    c->add_option("--gamma", ca.gamma, "Nitsche parameter (0: 4*C_i^2 or 4*C_i per --scaling)");
    c->add_option("--trace", ca.trace, "Multiplier space: p0 | p1 | p1-disc");
    c->add_option("--scaling", ca.scaling, "Default-parameter scaling: squared | linear");
    add_outputs(c, out, false);

    InfSupArgs ia;
    auto* i = app.add_subcommand("infsup", "Discrete inf-sup constant and spurious pressure modes");
    i->add_option("--pair", ia.pair, "th | mini | p1p1 | p1p0 | p2p0");
    i->add_option("--n", ia.n, "Cells per side");
    i->add_option("--mode", ia.mode, "euclidean | weighted");
    i->add_option("--rank-tol", ia.rank_tol, "Relative rank tolerance (negative: 1e-10*max(m,n))");
    add_outputs(i, out, true);

    LockingArgs la;
    auto* l = app.add_subcommand("locking", "Penalized (u,p) problem: lambda sweep");
    l->add_option("--method", la.method, "plain | corrected | multiplier");
    l->add_option("--lambdas", la.lambdas, "Comma-separated penalty values");
    l->add_option("--n", la.n, "Cells per side");
    l->add_option("--c-omega", la.c_omega, "Poincare constant of the domain");
    l->add_option("--multiplier-space", la.multiplier_space, "p1-disc | p1 | p1-zero (multiplier method)");
    l->add_option("--projection-mass", la.projection_mass, "lumped | consistent (corrected method)");
    l->add_flag("--tilde-a", la.tilde_a, "Augment a(.,.) and use penalty lambda-1 (multiplier method)");
    add_outputs(l, out, true);

    WeakBcArgs wa;
    auto* w = app.add_subcommand("weakbc", "Weak Dirichlet conditions for -Lap u + u = f");
    w->add_option("--method", wa.method, "multiplier | bh | nitsche");
    w->add_option("--n", wa.n, "Cells per side");
    w->add_option("--alpha", wa.alpha, "BH parameter (0: default from C_i)");
    w->add_option("--gamma", wa.gamma, "Nitsche parameter (0: default from C_i)");
    w->add_option("--trace", wa.trace, "Multiplier space: p0 | p1 | p1-disc");
    w->add_option("--scaling", wa.scaling, "Default-parameter scaling: squared | linear");
    w->add_flag("--equivalence", wa.equivalence, "Also compare BH (this trace space) with Nitsche at gamma = 1/alpha");
    add_outputs(w, out, true);

    SelftestArgs ta;
    auto* t = app.add_subcommand("selftest", "Run the acceptance criteria and print a pass/fail table");
    t->add_option("--only", ta.only, "Comma-separated criterion ids (empty: all)");
    t->add_option("--expect-fail", ta.expect_fail,
                  "Comma-separated ids known to fail; exit 0 only if exactly these fail");
    t->add_option("--seed", ta.seed, "Seed of the randomized SVD check");
    t->add_option("--json", out.json, "Write the JSON report to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*s) return run_stokes(sa, out);
        if (*c) return run_convergence_cmd(ca, out);
        if (*i) return run_infsup(ia, out);
        if (*l) return run_locking(la, out);
        if (*w) return run_weakbc(wa, out);
        if (*t) return run_selftest(ta, out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UnsupportedCombination& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
