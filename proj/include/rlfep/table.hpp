#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rlfep {

struct TableAxis {
    std::string name;
    std::vector<double> breakpoints;  // strictly increasing
};

/// Rectangular N-dimensional grid with multilinear interpolation. Values are
/// stored row-major (last axis varies fastest).
class GridTable {
public:
    GridTable() = default;
    GridTable(std::vector<TableAxis> axes, std::vector<double> values);

    struct Lookup {
        double value = 0.0;
        bool clamped = false;
    };

    /// Queries outside the breakpoint range are clamped to the edge and
    /// reported through Lookup::clamped.
    Lookup interpolate(std::span<const double> point) const;

    const std::vector<TableAxis>& axes() const { return axes_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t rank() const { return axes_.size(); }

    /// Index of the named axis, or -1.
    int axis_index(const std::string& name) const;

private:
    std::vector<TableAxis> axes_;
    std::vector<double> values_;
    std::vector<std::size_t> strides_;
};

/// Parses the aero table CSV format:
///
///     # comment
///     axis,alpha_deg,-10,0,10,20
///     axis,beta_deg,-5,0,5
///     v,v,v            <- one row per combination of leading axes,
///     ...                 one column per breakpoint of the last axis
///
/// Throws ParseError (with line number) on malformed content, non-monotone
/// breakpoints or a non-rectangular value block.
GridTable parse_table_csv(const std::string& text);
GridTable load_table_csv(const std::filesystem::path& path);

}  // namespace rlfep
