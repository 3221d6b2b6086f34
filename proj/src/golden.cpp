#include "ppc450/golden.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#ifndef PPC450_DATA_DIR
#define PPC450_DATA_DIR "data"
#endif

namespace ppc450 {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, sep)) {
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
}

const std::map<std::string, std::vector<std::string>>& schemas() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"table2", {"frame", "stencils_per_iteration", "reg_input", "reg_result", "reg_weight", "loads", "stores",
                    "fpu_ops", "lsu_cycles_ld", "lsu_cycles_st", "fpu_cycles", "util_ldst", "util_fpu",
                    "bytes_per_stencil"}},
        {"table3", {"naive", "simulated", "bw_l1", "bw_stream", "l1_predicted", "l1_observed", "stream_predicted",
                    "stream_observed"}},
    };
    return s;
}

}  // namespace

double GoldenTable::at(const std::string& config, const std::string& column) const {
    auto r = rows.find(config);
    if (r == rows.end()) throw std::out_of_range(id + ": no row " + config);
    auto c = r->second.find(column);
    if (c == r->second.end()) throw std::out_of_range(id + ": no column " + column);
    return c->second;
}

std::string default_data_dir() { return PPC450_DATA_DIR; }

GoldenTable parse_golden(const std::string& id, const std::string& text) {
    auto schema = schemas().find(id);
    if (schema == schemas().end()) throw std::invalid_argument("unknown golden table id: " + id);
    GoldenTable t;
    t.id = id;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool have_header = false;
    auto fail = [&](const std::string& why) {
        throw std::runtime_error(id + " line " + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (line[0] == '#') {
            const std::string tag = "# reference_only:";
            if (line.rfind(tag, 0) == 0)
                for (auto& c : split(line.substr(tag.size()), ','))
                    if (!c.empty()) t.reference_only.insert(c);
            continue;
        }
        auto cells = split(line, ',');
        if (!have_header) {
            if (cells.empty() || cells[0] != "config") fail("header must start with config");
            t.columns.assign(cells.begin() + 1, cells.end());
            if (t.columns != schema->second) fail("columns do not match the " + id + " schema");
            have_header = true;
            continue;
        }
        if (cells.size() != t.columns.size() + 1) fail("expected " + std::to_string(t.columns.size() + 1) + " cells");
        auto& row = t.rows[cells[0]];
        t.row_order.push_back(cells[0]);
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            try {
                std::size_t used = 0;
                row[t.columns[c]] = std::stod(cells[c + 1], &used);
                if (used != cells[c + 1].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                fail("non-numeric value '" + cells[c + 1] + "'");
            }
        }
    }
    if (!have_header) throw std::runtime_error(id + ": missing header");
    for (const auto& c : t.reference_only)
        if (std::find(t.columns.begin(), t.columns.end(), c) == t.columns.end())
            throw std::runtime_error(id + ": reference_only names unknown column " + c);
    return t;
}

GoldenTable load_golden(const std::string& id, const std::string& dir) {
    if (!schemas().count(id)) throw std::invalid_argument("unknown golden table id: " + id);
    const std::string path = (dir.empty() ? default_data_dir() : dir) + "/" + id + ".csv";
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_golden(id, ss.str());
}

}  // namespace ppc450
