#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace ppc450 {

// A golden CSV: header columns, rows keyed by the `config` column.
struct GoldenTable {
    std::string id;
    std::vector<std::string> columns;                     // excluding `config`
    std::set<std::string> reference_only;                 // display-only columns
    std::vector<std::string> row_order;
    std::map<std::string, std::map<std::string, double>> rows;

    double at(const std::string& config, const std::string& column) const;
};

// id is `table2` or `table3`. Reads from `dir` (defaults to the shipped data
// directory). Throws std::invalid_argument for unknown ids, std::runtime_error
// for malformed files.
GoldenTable load_golden(const std::string& id, const std::string& dir = "");

GoldenTable parse_golden(const std::string& id, const std::string& text);

std::string default_data_dir();

}  // namespace ppc450
