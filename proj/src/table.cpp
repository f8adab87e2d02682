#include "rlfep/table.hpp"

#include "rlfep/common.hpp"
#include "rlfep/csv.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace rlfep {

GridTable::GridTable(std::vector<TableAxis> axes, std::vector<double> values)
    : axes_(std::move(axes)), values_(std::move(values)) {
    if (axes_.empty()) throw ConfigError("table needs at least one axis");
    std::size_t expected = 1;
    for (const auto& axis : axes_) {
        if (axis.breakpoints.size() < 2) {
            throw ConfigError("axis '" + axis.name + "' needs at least two breakpoints");
        }
        for (std::size_t i = 1; i < axis.breakpoints.size(); ++i) {
            if (!(axis.breakpoints[i] > axis.breakpoints[i - 1])) {
                throw ConfigError("axis '" + axis.name + "' breakpoints are not strictly increasing");
            }
        }
        expected *= axis.breakpoints.size();
    }
    if (values_.size() != expected) {
        throw ConfigError("table holds " + std::to_string(values_.size()) + " values, axes require " +
                          std::to_string(expected));
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw ConfigError("table contains a non-finite value");
    }
    strides_.assign(axes_.size(), 1);
    for (std::size_t i = axes_.size() - 1; i > 0; --i) {
        strides_[i - 1] = strides_[i] * axes_[i].breakpoints.size();
    }
}

int GridTable::axis_index(const std::string& name) const {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (axes_[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

GridTable::Lookup GridTable::interpolate(std::span<const double> point) const {
    if (point.size() != axes_.size()) {
        throw ConfigError("table query has " + std::to_string(point.size()) + " coordinates, expected " +
                          std::to_string(axes_.size()));
    }
    const std::size_t n = axes_.size();
    Lookup out;
    std::vector<std::size_t> lower(n);
    std::vector<double> frac(n);
    for (std::size_t d = 0; d < n; ++d) {
        const auto& bp = axes_[d].breakpoints;
        double x = point[d];
        if (!std::isfinite(x)) throw IntegrityError("non-finite table query on axis " + axes_[d].name);
        if (x < bp.front()) {
            x = bp.front();
            out.clamped = true;
        } else if (x > bp.back()) {
            x = bp.back();
            out.clamped = true;
        }
        auto it = std::upper_bound(bp.begin(), bp.end(), x);
        std::size_t i = static_cast<std::size_t>(std::distance(bp.begin(), it));
        i = std::clamp<std::size_t>(i, 1, bp.size() - 1) - 1;
        lower[d] = i;
        frac[d] = (x - bp[i]) / (bp[i + 1] - bp[i]);
    }
    // Sum over the 2^n cell corners. Corners with zero weight are skipped so
    // that nodal queries return the stored value exactly.
    double sum = 0.0;
    const std::size_t corners = std::size_t{1} << n;
    for (std::size_t c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t offset = 0;
        for (std::size_t d = 0; d < n; ++d) {
            const bool upper = (c >> d) & 1U;
            w *= upper ? frac[d] : 1.0 - frac[d];
            offset += (lower[d] + (upper ? 1 : 0)) * strides_[d];
        }
        if (w != 0.0) sum += w * values_[offset];
    }
    out.value = sum;
    return out;
}

GridTable parse_table_csv(const std::string& text) {
    std::vector<TableAxis> axes;
    std::vector<double> values;
    std::size_t row_width = 0;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool in_values = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        auto fields = split_csv_line(line);
        if (fields.front() == "axis") {
            if (in_values) throw ParseError("axis row after value rows", line_no);
            if (fields.size() < 4) throw ParseError("axis row needs a name and two breakpoints", line_no);
            TableAxis axis;
            axis.name = fields[1];
            for (std::size_t i = 2; i < fields.size(); ++i) {
                axis.breakpoints.push_back(parse_double(fields[i], line_no));
                if (i > 2 && !(axis.breakpoints.back() > axis.breakpoints[axis.breakpoints.size() - 2])) {
                    throw ParseError("breakpoints of '" + axis.name + "' are not strictly increasing", line_no);
                }
            }
            axes.push_back(std::move(axis));
            continue;
        }
        if (axes.empty()) throw ParseError("value row before any axis row", line_no);
        in_values = true;
        row_width = axes.back().breakpoints.size();
        if (fields.size() != row_width) {
            throw ParseError("value row has " + std::to_string(fields.size()) + " entries, expected " +
                                 std::to_string(row_width),
                             line_no);
        }
        for (const auto& f : fields) values.push_back(parse_double(f, line_no));
    }
    if (axes.empty()) throw ParseError("table has no axis rows", 0);
    std::size_t expected = 1;
    for (const auto& a : axes) expected *= a.breakpoints.size();
    if (values.size() != expected) {
        throw ParseError("table is not rectangular: " + std::to_string(values.size() / std::max<std::size_t>(row_width, 1)) +
                             " value rows, expected " + std::to_string(expected / axes.back().breakpoints.size()),
                         line_no);
    }
    return GridTable(std::move(axes), std::move(values));
}

GridTable load_table_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open aero table " + path.string());
    std::stringstream buf;
    buf << f.rdbuf();
    try {
        return parse_table_csv(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path.filename().string() + ": " + e.detail, e.line);
    }
}

}  // namespace rlfep
