#pragma once

#include <string>
#include <vector>

namespace sdeflow {

// Shortest round-trip decimal representation via std::to_chars; decimal
// point, no locale dependence.
std::string format_double(double v);

// Write via temp file + rename so partial outputs are never observed.
void atomic_write_file(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);

// CSV assembly: header + rows of formatted doubles / raw cells.
struct CsvWriter {
    std::string data;
    explicit CsvWriter(const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);
    void row_values(const std::vector<double>& values);
};

} // namespace sdeflow
