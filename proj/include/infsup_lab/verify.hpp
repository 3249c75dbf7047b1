#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <string>
#include <vector>

#include "infsup_lab/errors.hpp"

namespace infsup_lab::verify {

/// Least-squares slope of log(err) against log(h).
inline double fit_slope(const std::vector<double>& hs, const std::vector<double>& errs)
{
    if (hs.size() != errs.size()) throw DimensionMismatch("fit_slope: hs and errs differ in length");
    if (hs.size() < 2) throw DegenerateFit("fit_slope: need at least two points");
    const std::size_t n = hs.size();
    double mx = 0.0, my = 0.0;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(hs[i] > 0.0) || !(errs[i] > 0.0) || !std::isfinite(hs[i]) || !std::isfinite(errs[i]))
            throw DegenerateFit("fit_slope: values must be positive and finite");
        x[i] = std::log(hs[i]);
        y[i] = std::log(errs[i]);
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw DegenerateFit("fit_slope: all h values coincide");
    return sxy / sxx;
}

struct Level {
    std::size_t n = 0;
    double h = 0.0;
    std::map<std::string, double> errors;
    bool ok = true;
    std::string failure;
};

struct ConvergenceReport {
    std::string method;
    std::string problem;
    std::vector<Level> levels;  // decreasing h
    std::map<std::string, double> slopes;

    bool complete() const
    {
        return std::all_of(levels.begin(), levels.end(), [](const Level& l) { return l.ok; });
    }

    double slope(const std::string& name) const
    {
        const auto it = slopes.find(name);
        if (it == slopes.end()) throw DegenerateFit("no slope recorded for '" + name + "'");
        return it->second;
    }
};

/// Computes h and the named errors on an n×n mesh.
using LevelBuilder = std::function<Level(std::size_t n)>;

inline Level run_level(const LevelBuilder& builder, std::size_t n)
{
    try {
        auto l = builder(n);
        l.n = n;
        return l;
    } catch (const Error& e) {
        Level l;
        l.n = n;
        l.h = n > 0 ? std::sqrt(2.0) / double(n) : 0.0;
        l.ok = false;
        l.failure = e.what();
        return l;
    }
}

inline void fill_slopes(ConvergenceReport& r)
{
    r.slopes.clear();
    std::sort(r.levels.begin(), r.levels.end(), [](const Level& a, const Level& b) { return a.h > b.h; });
    if (r.levels.size() < 3 || !r.complete()) return;
    std::vector<double> hs;
    for (const auto& l : r.levels) hs.push_back(l.h);
    for (const auto& [name, value] : r.levels.front().errors) {
        (void)value;
        std::vector<double> es;
        for (const auto& l : r.levels) {
            const auto it = l.errors.find(name);
            if (it == l.errors.end()) break;
            es.push_back(it->second);
        }
        if (es.size() != hs.size()) continue;
        try {
            r.slopes[name] = fit_slope(hs, es);
        } catch (const DegenerateFit&) {
        }
    }
}

/// Runs every level (on up to `threads` workers) and fits slopes over all of them.
inline ConvergenceReport run_convergence(const LevelBuilder& builder, const std::vector<std::size_t>& ns,
                                         std::string method = {}, std::string problem = {}, std::size_t threads = 1)
{
    ConvergenceReport r;
    r.method = std::move(method);
    r.problem = std::move(problem);
    if (threads <= 1) {
        for (auto n : ns) r.levels.push_back(run_level(builder, n));
    } else {
        for (std::size_t start = 0; start < ns.size(); start += threads) {
            std::vector<std::future<Level>> jobs;
            for (std::size_t i = start; i < std::min(ns.size(), start + threads); ++i)
                jobs.push_back(std::async(std::launch::async, run_level, std::cref(builder), ns[i]));
            for (auto& j : jobs) r.levels.push_back(j.get());
        }
    }
    fill_slopes(r);
    return r;
}

} // namespace infsup_lab::verify
