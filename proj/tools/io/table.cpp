#include "table.hpp"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace hosidf::io {

std::string format12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

double round12(double x) { return std::isfinite(x) ? std::strtod(format12(x).c_str(), nullptr) : x; }

void Table::add(std::vector<double> row) {
    for (double& v : row) v = round12(v);
    rows.push_back(std::move(row));
}

namespace {

void harmonic_row(Table& t, double omega, int n, cplx v, std::optional<double> gamma) {
    std::vector<double> row{rad_to_hz(omega), double(n), v.real(), v.imag(), 20.0 * std::log10(std::abs(v)),
                            wrapped_angle(v) * 180.0 / std::numbers::pi};
    if (gamma) row.push_back(*gamma);
    t.add(std::move(row));
}

} // namespace

Table open_loop_table(const HosidfGrid& g) {
    Table t{{"freq_hz", "n", "re", "im", "mag_db", "phase_deg"}, {}};
    for (size_t i = 0; i < g.omega.size(); ++i)
        for (size_t k = 0; k < g.orders.size(); ++k) harmonic_row(t, g.omega[i], g.orders[k], g.values[i][k], {});
    return t;
}

Table closed_loop_table(const ClosedLoopGrid& g) {
    Table t{{"freq_hz", "n", "re", "im", "mag_db", "phase_deg", "gamma"}, {}};
    for (size_t i = 0; i < g.omega.size(); ++i)
        for (size_t k = 0; k < g.orders.size(); ++k)
            harmonic_row(t, g.omega[i], g.orders[k], g.values[i][k], g.gamma[i]);
    return t;
}

Table trace_table(const SimTrace& tr, size_t stride) {
    Table t{{"t", "e", "z", "zs", "v", "u", "y", "reset_flag"}, {}};
    if (stride == 0) stride = 1;
    for (size_t i = 0; i < tr.t.size(); ++i) {
        // A reset inside a skipped stretch still shows on the next kept row.
        bool flag = false;
        for (size_t k = i; k < std::min(i + stride, tr.t.size()); ++k) flag = flag || tr.reset_flag[k];
        if (i % stride != 0) continue;
        t.add({tr.t[i], tr.e[i], tr.z[i], tr.zs[i], tr.v[i], tr.u[i], tr.y[i], flag ? 1.0 : 0.0});
    }
    return t;
}

void write_csv(std::ostream& out, const Table& t) {
    for (size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << '\n';
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format12(row[c]);
        out << '\n';
    }
}

Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) return t;
    std::istringstream hs(line);
    for (std::string col; std::getline(hs, col, ',');) t.columns.push_back(col);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> row;
        for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::strtod(cell.c_str(), nullptr));
        t.rows.push_back(std::move(row));
    }
    return t;
}

nlohmann::json to_json(const Table& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) {
        nlohmann::json jr = nlohmann::json::array();
        for (double v : r) jr.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
        rows.push_back(std::move(jr));
    }
    return {{"columns", t.columns}, {"rows", std::move(rows)}};
}

} // namespace hosidf::io
