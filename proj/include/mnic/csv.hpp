#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace mnic {

// Shortest representation of a double that parses back to the same bits.
// All numeric output goes through this, which is what makes reruns of the
// same config byte-identical.
std::string format_double(double v);

using CellValue = std::variant<std::string, double, std::int64_t, std::uint64_t>;

// Row-oriented writer emitting either CSV (header + comma rows) or JSON
// lines (one object per row). Field values render identically in both.
class TableWriter {
public:
    TableWriter(const std::string& path, std::vector<std::string> columns,
                bool jsonl);
    ~TableWriter();

    void write_row(const std::vector<CellValue>& cells);
    void close();

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::vector<std::string> columns_;
    bool jsonl_;
    std::ofstream out_;
};

} // namespace mnic
