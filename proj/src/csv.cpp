#include "evofis/csv.hpp"

#include "evofis/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace evofis::csv {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

} // namespace

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

Table parse(const std::string& text) {
    Table table;
    std::stringstream ss(text);
    std::string line;
    bool saw_header = false;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto cells = split_line(line);
        if (!saw_header) {
            table.header = std::move(cells);
            saw_header = true;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw IngestError("csv: line " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (!saw_header) {
        throw IngestError("csv: empty input, no header row");
    }
    return table;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IngestError("csv: cannot open " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string to_string(const Table& table) {
    std::ostringstream out;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out << (i ? "," : "") << table.header[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << '\n';
    }
    return out.str();
}

void write_file(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IngestError("csv: cannot write " + path.string());
    }
    out << to_string(table);
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw Error("failed to format a double");
    }
    return std::string(buf, ptr);
}

} // namespace evofis::csv
