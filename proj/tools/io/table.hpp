#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hosidf/hosidf.hpp"

namespace hosidf::io {

// Values are rounded to 12 significant digits on insertion so that the CSV
// text and the JSON numbers carry identical values.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::vector<double> row);
};

std::string format12(double x);
double round12(double x);

Table open_loop_table(const HosidfGrid& g);
Table closed_loop_table(const ClosedLoopGrid& g);
Table trace_table(const SimTrace& tr, size_t stride = 1);

void write_csv(std::ostream& out, const Table& t);
Table read_csv(std::istream& in);

// {"columns": [...], "rows": [[...], ...]}; non-finite values become null.
nlohmann::json to_json(const Table& t);

} // namespace hosidf::io
