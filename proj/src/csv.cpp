#include "rlfep/csv.hpp"

#include "rlfep/common.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace rlfep {

std::string format_double(double value) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw Error("failed to format double");
    return std::string(buf.data(), ptr);
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        out.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(std::string_view text, std::size_t line_no) {
    if (text == "true") return 1.0;
    if (text == "false") return 0.0;
    double v = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (!text.empty() && text.front() == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ParseError("invalid number '" + std::string(text) + "'", line_no);
    }
    return v;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<double> CsvTable::column_values(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw ParseError("missing column '" + name + "'", 1);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
    return out;
}

CsvTable read_numeric_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ParseError("row has " + std::to_string(fields.size()) + " fields, header has " +
                                 std::to_string(table.header.size()),
                             line_no);
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(parse_double(f, line_no));
        table.rows.push_back(std::move(row));
        table.line_numbers.push_back(line_no);
    }
    if (table.header.empty()) throw ParseError(path.string() + " is empty", 0);
    return table;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw Error("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ << ',';
        out_ << header[i];
    }
    out_ << '\n';
}

void CsvWriter::separator() {
    if (current_ >= columns_) throw Error("CSV row has more fields than the header");
    if (current_ > 0) out_ << ',';
    ++current_;
}

CsvWriter& CsvWriter::operator<<(double value) {
    separator();
    out_ << format_double(value);
    return *this;
}

CsvWriter& CsvWriter::operator<<(int value) {
    separator();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long value) {
    separator();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::operator<<(std::size_t value) {
    separator();
    out_ << value;
    return *this;
}

CsvWriter& CsvWriter::operator<<(bool value) {
    separator();
    out_ << (value ? 1 : 0);
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& value) {
    separator();
    out_ << value;
    return *this;
}

void CsvWriter::end_row() {
    if (current_ != columns_) throw Error("CSV row has fewer fields than the header");
    out_ << '\n';
    current_ = 0;
}

}  // namespace rlfep
