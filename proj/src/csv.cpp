#include "mnic/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace mnic {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

TableWriter::TableWriter(const std::string& path,
                         std::vector<std::string> columns, bool jsonl)
    : path_(path), columns_(std::move(columns)), jsonl_(jsonl), out_(path) {
    if (!out_)
        throw std::runtime_error("cannot open output file '" + path + "'");
    if (!jsonl_) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (i) out_ << ',';
            out_ << columns_[i];
        }
        out_ << '\n';
    }
}

TableWriter::~TableWriter() { close(); }

namespace {

std::string render(const CellValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    if (const auto* d = std::get_if<double>(&v)) return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    return std::to_string(std::get<std::uint64_t>(v));
}

} // namespace

void TableWriter::write_row(const std::vector<CellValue>& cells) {
    if (cells.size() != columns_.size())
        throw std::invalid_argument("table row width does not match header");
    if (jsonl_) {
        out_ << '{';
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << '"' << columns_[i] << "\":";
            if (std::holds_alternative<std::string>(cells[i])) {
                out_ << '"' << std::get<std::string>(cells[i]) << '"';
            } else if (const auto* d = std::get_if<double>(&cells[i]);
                       d && !std::isfinite(*d)) {
                out_ << "null";  // bare nan/inf is not valid JSON
            } else {
                out_ << render(cells[i]);
            }
        }
        out_ << "}\n";
    } else {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << render(cells[i]);
        }
        out_ << '\n';
    }
}

void TableWriter::close() {
    if (out_.is_open()) out_.close();
}

} // namespace mnic
