#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace evofis::csv {

/// In-memory CSV table: one header row plus data rows, all cells as text.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column position for \p name, -1 if absent.
    int column(const std::string& name) const;
};

/// Read a comma-separated file. The first line is the header. Blank lines
/// are skipped, trailing '\r' is stripped. Ragged rows throw IngestError.
Table read_file(const std::filesystem::path& path);

Table parse(const std::string& text);

/// Write rows as CSV. Cells are emitted verbatim (no quoting; writers in
/// this project only emit numbers and plain identifiers).
void write_file(const std::filesystem::path& path, const Table& table);

std::string to_string(const Table& table);

/// Shortest decimal form of a double that parses back to the identical
/// value, so scores recomputed from written files match exactly.
std::string format_double(double value);

} // namespace evofis::csv
