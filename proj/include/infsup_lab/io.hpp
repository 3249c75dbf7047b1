#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "infsup_lab/errors.hpp"
#include "infsup_lab/mesh.hpp"
#include "infsup_lab/verify.hpp"

namespace infsup_lab::io {

using Json = nlohmann::ordered_json;

/// Number with 17 significant digits; non-finite values become null in JSON.
inline std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace detail {

inline void dump(const Json& j, std::ostringstream& out, int indent, int depth)
{
    const auto pad = [&](int d) {
        if (indent > 0) out << '\n' << std::string(std::size_t(indent * d), ' ');
    };
    switch (j.type()) {
    case Json::value_t::object: {
        if (j.empty()) {
            out << "{}";
            return;
        }
        out << '{';
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out << ',';
            first = false;
            pad(depth + 1);
            out << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
            dump(it.value(), out, indent, depth + 1);
        }
        pad(depth);
        out << '}';
        return;
    }
    case Json::value_t::array: {
        if (j.empty()) {
            out << "[]";
            return;
        }
        out << '[';
        bool first = true;
        for (const auto& v : j) {
            if (!first) out << ',';
            first = false;
            pad(depth + 1);
            dump(v, out, indent, depth + 1);
        }
        pad(depth);
        out << ']';
        return;
    }
    case Json::value_t::number_float: {
        const double x = j.get<double>();
        out << (std::isfinite(x) ? format_double(x) : "null");
        return;
    }
    default: out << j.dump();
    }
}

} // namespace detail

/// JSON text with every float printed to 17 significant digits.
inline std::string dump_json(const Json& j, int indent = 2)
{
    std::ostringstream out;
    detail::dump(j, out, indent, 0);
    if (indent > 0) out << '\n';
    return out.str();
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error("failed writing '" + path + "'");
}

/// CSV with a header row; every value printed to 17 significant digits.
inline std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
        if (r.size() != header.size()) throw DimensionMismatch("csv: row length differs from header");
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
        out << '\n';
    }
    return out.str();
}

/// Columns: level, h, then one column per error name.
inline std::string convergence_csv(const verify::ConvergenceReport& r)
{
    std::vector<std::string> header{"level", "h"};
    if (!r.levels.empty())
        for (const auto& [name, v] : r.levels.front().errors) {
            (void)v;
            header.push_back(name);
        }
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
        const auto& l = r.levels[k];
        std::vector<double> row{double(k), l.h};
        for (std::size_t c = 2; c < header.size(); ++c) {
            const auto it = l.errors.find(header[c]);
            row.push_back(it == l.errors.end() ? std::nan("") : it->second);
        }
        rows.push_back(std::move(row));
    }
    return csv(header, rows);
}

inline Json to_json(const verify::ConvergenceReport& r)
{
    Json j;
    j["method"] = r.method;
    j["problem"] = r.problem;
    j["levels"] = Json::array();
    for (const auto& l : r.levels) {
        Json e;
        e["n"] = l.n;
        e["h"] = l.h;
        e["ok"] = l.ok;
        if (!l.ok) e["failure"] = l.failure;
        e["errors"] = Json::object();
        for (const auto& [name, v] : l.errors) e["errors"][name] = v;
        j["levels"].push_back(std::move(e));
    }
    j["slopes"] = Json::object();
    for (const auto& [name, v] : r.slopes) j["slopes"][name] = v;
    return j;
}

struct VtkField {
    std::string name;
    std::vector<double> values;
    std::size_t components = 1;  // 1 or 2 (stored component-major)
};

/// Legacy ASCII UNSTRUCTURED_GRID of the triangle mesh (cell type 5).
inline std::string vtk(const Mesh& mesh, const std::vector<VtkField>& point_data, const std::vector<VtkField>& cell_data,
                       const std::string& title = "infsup-lab")
{
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.n_nodes() << " double\n";
    for (const auto& p : mesh.nodes) out << format_double(p[0]) << ' ' << format_double(p[1]) << " 0\n";
    out << "CELLS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << mesh.n_triangles() << '\n';
    for (std::size_t t = 0; t < mesh.n_triangles(); ++t) out << "5\n";
    const auto section = [&](const char* kind, std::size_t count, const std::vector<VtkField>& fields) {
        if (fields.empty()) return;
        out << kind << ' ' << count << '\n';
        for (const auto& f : fields) {
            if (f.values.size() < count * f.components)
                throw DimensionMismatch("vtk: field '" + f.name + "' is too short");
            if (f.components == 1) {
                out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
                for (std::size_t i = 0; i < count; ++i) out << format_double(f.values[i]) << '\n';
            } else {
                const std::size_t stride = f.values.size() / 2;
                out << "VECTORS " << f.name << " double\n";
                for (std::size_t i = 0; i < count; ++i)
                    out << format_double(f.values[i]) << ' ' << format_double(f.values[stride + i]) << " 0\n";
            }
        }
    };
    section("POINT_DATA", mesh.n_nodes(), point_data);
    section("CELL_DATA", mesh.n_triangles(), cell_data);
    return out.str();
}

} // namespace infsup_lab::io
