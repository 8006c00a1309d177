#include "afem/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace afem {

namespace {

std::string format(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format(const std::optional<double>& v) { return v ? format(*v) : std::string(); }

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::optional<double> parse_cell(const std::string& cell, std::size_t line)
{
    if (cell.empty()) {
        return std::nullopt;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != cell.size()) {
        throw CsvError("line " + std::to_string(line) + ": non-numeric cell '" + cell + "'");
    }
    return v;
}

} // namespace

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> columns{"step",     "n_elem",         "n_dofs",    "h_max",    "eta",
                                                  "osc",      "err_energy",     "err_supg",  "n_marked_prime",
                                                  "n_marked", "solve_ms",       "estimate_ms", "refine_ms"};
    return columns;
}

void write_csv_header(std::ostream& out)
{
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out << (i ? "," : "") << cols[i];
    }
    out << '\n';
}

void write_csv_row(std::ostream& out, const AdaptRecord& r)
{
    out << r.step << ',' << r.n_elem << ',' << r.n_dofs << ',' << format(r.h_max) << ',' << format(r.eta) << ','
        << format(r.osc) << ',' << format(r.err_energy) << ',' << format(r.err_supg) << ',' << r.n_marked_prime
        << ',' << r.n_marked << ',' << format(r.solve_ms) << ',' << format(r.estimate_ms) << ','
        << format(r.refine_ms) << '\n';
}

std::vector<std::optional<double>> CsvTable::column(const std::string& name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw CsvError("no column '" + name + "'");
    }
    const auto idx = static_cast<std::size_t>(it - header.begin());
    std::vector<std::optional<double>> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        out.push_back(row[idx]);
    }
    return out;
}

CsvTable read_csv(std::istream& in)
{
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw CsvError("empty file");
    }
    table.header = split(line);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != table.header.size()) {
            throw CsvError("line " + std::to_string(lineno) + ": expected " + std::to_string(table.header.size()) +
                           " cells, found " + std::to_string(cells.size()));
        }
        std::vector<std::optional<double>> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) {
            row.push_back(parse_cell(cell, lineno));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

CsvTable read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw CsvError("cannot open " + path);
    }
    return read_csv(in);
}

double fit_rate(std::span<const double> n, std::span<const double> value)
{
    if (n.size() != value.size() || n.size() < 2) {
        throw std::invalid_argument("fit_rate needs at least two matching samples");
    }
    const auto m = static_cast<double>(n.size());
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        sx += std::log(n[i]);
        sy += std::log(value[i]);
    }
    const double mx = sx / m;
    const double my = sy / m;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double dx = std::log(n[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(value[i]) - my);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("fit_rate needs distinct n values");
    }
    return -sxy / sxx;
}

std::size_t tail_start_fraction(std::size_t rows, double fraction)
{
    const auto keep = std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(rows))));
    return rows > keep ? rows - keep : 0;
}

std::size_t tail_start_decade(std::span<const double> n)
{
    if (n.empty()) {
        return 0;
    }
    const double cutoff = n.back() / 10.0;
    std::size_t i = 0;
    while (i < n.size() && n[i] < cutoff) {
        ++i;
    }
    return i;
}

double csv_rate(const CsvTable& table, const std::string& column, double fraction)
{
    const auto ns = table.column("n_elem");
    const auto vs = table.column(column);
    std::vector<double> n;
    std::vector<double> v;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] && vs[i]) {
            n.push_back(*ns[i]);
            v.push_back(*vs[i]);
        }
    }
    const std::size_t start = tail_start_fraction(n.size(), fraction);
    if (n.size() - start < 4) {
        throw CsvError("need at least 4 rows with '" + column + "' to fit a rate");
    }
    return fit_rate(std::span(n).subspan(start), std::span(v).subspan(start));
}

} // namespace afem
