#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace rlfep {

/// Shortest round-trip decimal representation; identical bits give identical
/// text, which is what makes CSV outputs comparable byte for byte.
std::string format_double(double value);

std::vector<std::string> split_csv_line(std::string_view line);

/// Throws ParseError tagged with `line_no` when `text` is not a full number.
double parse_double(std::string_view text, std::size_t line_no);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row

    int column(const std::string& name) const;
    /// Throws ParseError when the column is missing.
    std::vector<double> column_values(const std::string& name) const;
};

/// Reads a numeric CSV with a header row. Boolean cells "true"/"false" are
/// read as 1/0. Throws ParseError with the offending row number.
CsvTable read_numeric_csv(const std::filesystem::path& path);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& operator<<(double value);
    CsvWriter& operator<<(int value);
    CsvWriter& operator<<(long long value);
    CsvWriter& operator<<(std::size_t value);
    CsvWriter& operator<<(bool value);
    CsvWriter& operator<<(const std::string& value);
    void end_row();

private:
    void separator();

    std::ofstream out_;
    std::size_t columns_;
    std::size_t current_ = 0;
};

}  // namespace rlfep
