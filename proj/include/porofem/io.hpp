#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "porofem/analysis.hpp"
#include "porofem/error.hpp"
#include "porofem/mesh.hpp"
#include "porofem/solver.hpp"

namespace porofem {

namespace detail {

inline std::ofstream open_output(const std::string& path)
{
    const std::filesystem::path fp(path);
    if (fp.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(fp.parent_path(), ec);
        if (ec) throw std::runtime_error("cannot create directory for " + path + ": " + ec.message());
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << std::setprecision(17);
    return os;
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Legacy VTK.

/// ASCII legacy VTK unstructured grid with point vectors u, z and cell scalar p.
inline void write_vtk(const Mesh& mesh, const State& state, std::ostream& os)
{
    const int d = mesh.dim();
    if (state.u.size() != d * mesh.num_vertices() || state.z.size() != d * mesh.num_vertices() ||
        state.p.size() != mesh.num_cells())
        throw InvalidArgument("write_vtk: state does not match the mesh");
    os << std::setprecision(17);
    os << "# vtk DataFile Version 3.0\n";
    os << "porofem t=" << state.t << "\n";
    os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.num_vertices() << " double\n";
    for (const Point& x : mesh.vertices()) os << x.x() << ' ' << x.y() << ' ' << x.z() << '\n';
    os << "CELLS " << mesh.num_cells() << ' ' << mesh.num_cells() * (d + 2) << '\n';
    for (const Cell& c : mesh.cells()) {
        os << d + 1;
        for (int a = 0; a <= d; ++a) os << ' ' << c[a];
        os << '\n';
    }
    os << "CELL_TYPES " << mesh.num_cells() << '\n';
    const int type = d == 2 ? 5 : 10;
    for (Index c = 0; c < mesh.num_cells(); ++c) os << type << '\n';
    os << "POINT_DATA " << mesh.num_vertices() << '\n';
    for (const auto& [name, vec] : {std::pair<const char*, const Vector*>{"u", &state.u}, {"z", &state.z}}) {
        os << "VECTORS " << name << " double\n";
        for (Index v = 0; v < mesh.num_vertices(); ++v) {
            for (int k = 0; k < 3; ++k) os << (k ? " " : "") << (k < d ? (*vec)[d * v + k] : 0.0);
            os << '\n';
        }
    }
    os << "CELL_DATA " << mesh.num_cells() << '\n';
    os << "SCALARS p double 1\nLOOKUP_TABLE default\n";
    for (Index c = 0; c < mesh.num_cells(); ++c) os << state.p[c] << '\n';
    if (!os) throw std::runtime_error("write_vtk: stream error");
}

inline void write_vtk(const Mesh& mesh, const State& state, const std::string& path)
{
    auto os = detail::open_output(path);
    write_vtk(mesh, state, os);
    if (!os) throw std::runtime_error("write_vtk: failed writing " + path);
}

// ---------------------------------------------------------------------------
// CSV.

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw InvalidArgument("csv: no column " + name);
    }

    /// Numeric value; empty cells read as NaN.
    [[nodiscard]] double number(std::size_t row, const std::string& name) const
    {
        const std::string& cell = rows.at(row).at(column(name));
        if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
        if (cell == "inf") return std::numeric_limits<double>::infinity();
        if (cell == "-inf") return -std::numeric_limits<double>::infinity();
        if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw ParseError("bad number '" + cell + "'", row + 2);
        return v;
    }
};

inline void write_csv(const CsvTable& table, std::ostream& os)
{
    for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
    os << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw InvalidArgument("write_csv: row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << '\n';
    }
}

inline void write_csv(const CsvTable& table, const std::string& path)
{
    auto os = detail::open_output(path);
    write_csv(table, os);
}

/// Comma-separated, no quoting. Throws ParseError on ragged rows.
[[nodiscard]] inline CsvTable read_csv(std::istream& is)
{
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    const auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) out.push_back(detail::trim(cell));
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        auto cells = split(line);
        if (t.header.empty()) {
            t.header = std::move(cells);
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError("expected " + std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()),
                             line_no);
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) throw ParseError("empty csv", line_no);
    return t;
}

[[nodiscard]] inline CsvTable read_csv(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_csv(is);
}

/// h, dt, the five error norms, the oscillation indicator and one rate per
/// norm (empty on the first row).
[[nodiscard]] inline CsvTable convergence_csv(const ConvergenceTable& table)
{
    CsvTable out;
    out.header = {"h", "dt"};
    for (const auto& n : table.norms) out.header.push_back(n);
    out.header.push_back("osc");
    for (const auto& n : table.norms) out.header.push_back("rate_" + n.substr(4));
    std::vector<std::vector<double>> rates;
    if (table.rows.size() >= 2) rates = convergence_rates(table);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        std::vector<std::string> row{detail::format_double(r.h), detail::format_double(r.dt)};
        for (double e : r.errors) row.push_back(detail::format_double(e));
        row.push_back(detail::format_double(r.oscillation));
        for (std::size_t k = 0; k < table.norms.size(); ++k)
            row.push_back(i == 0 ? std::string{} : detail::format_double(rates[i - 1][k]));
        out.rows.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config files.
//
//   # comment
//   [section]
//   key = value
//
// Keys outside any section belong to section "". Duplicate keys are errors.

class Config {
public:
    [[nodiscard]] static Config parse(std::istream& is)
    {
        Config c;
        std::string line;
        std::size_t line_no = 0;
        std::string section;
        while (std::getline(is, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ParseError("unterminated section header", line_no);
                section = detail::trim(line.substr(1, line.size() - 2));
                if (section.empty()) throw ParseError("empty section name", line_no);
                c.sections_[section];
                c.order_.push_back(section);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty()) throw ParseError("empty key", line_no);
            auto& sec = c.sections_[section];
            if (sec.contains(key)) throw ParseError("duplicate key '" + key + "'", line_no);
            sec[key] = {value, line_no};
        }
        return c;
    }

    [[nodiscard]] static Config parse_file(const std::string& path)
    {
        std::ifstream is(path);
        if (!is) throw InvalidArgument("cannot open config " + path);
        return parse(is);
    }

    [[nodiscard]] bool has(const std::string& section, const std::string& key) const
    {
        const auto it = sections_.find(section);
        return it != sections_.end() && it->second.contains(key);
    }

    [[nodiscard]] bool has_section(const std::string& section) const { return sections_.contains(section); }

    /// Section names in file order.
    [[nodiscard]] std::vector<std::string> sections() const { return order_; }

    [[nodiscard]] std::vector<std::string> keys(const std::string& section) const
    {
        std::vector<std::string> out;
        const auto it = sections_.find(section);
        if (it != sections_.end())
            for (const auto& [k, v] : it->second) out.push_back(k);
        return out;
    }

    [[nodiscard]] std::string string(const std::string& section, const std::string& key) const
    {
        return entry(section, key).value;
    }

    [[nodiscard]] std::string string_or(const std::string& section, const std::string& key, std::string fallback) const
    {
        return has(section, key) ? string(section, key) : fallback;
    }

    [[nodiscard]] double number(const std::string& section, const std::string& key) const
    {
        const Entry& e = entry(section, key);
        try {
            std::size_t used = 0;
            const double v = std::stod(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ParseError("[" + section + "] " + key + ": not a number '" + e.value + "'", e.line);
        }
    }

    [[nodiscard]] double number_or(const std::string& section, const std::string& key, double fallback) const
    {
        return has(section, key) ? number(section, key) : fallback;
    }

    /// Whitespace- or comma-separated numbers.
    [[nodiscard]] std::vector<double> numbers(const std::string& section, const std::string& key) const
    {
        const Entry& e = entry(section, key);
        std::string s = e.value;
        for (char& ch : s)
            if (ch == ',') ch = ' ';
        std::istringstream is(s);
        std::vector<double> out;
        std::string tok;
        while (is >> tok) {
            try {
                std::size_t used = 0;
                out.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ParseError("[" + section + "] " + key + ": not a number '" + tok + "'", e.line);
            }
        }
        return out;
    }

    [[nodiscard]] std::size_t line_of(const std::string& section, const std::string& key) const
    {
        return entry(section, key).line;
    }

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };

    [[nodiscard]] const Entry& entry(const std::string& section, const std::string& key) const
    {
        const auto it = sections_.find(section);
        if (it == sections_.end() || !it->second.contains(key))
            throw InvalidArgument("config: missing [" + section + "] " + key);
        return it->second.at(key);
    }

    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::vector<std::string> order_;
};

}  // namespace porofem
