#pragma once

#include "repsim/analysis/consistency.hpp"
#include "repsim/numeric.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace repsim::report {

/// Shortest round-trip text for finite values, "nan" otherwise.
std::string csv_number(double v);

/// Square or rectangular matrix as CSV: a header row of column ids, then one
/// row per row id. `corner` fills the top-left cell.
std::string matrix_csv(const std::string& corner, std::span<const std::string> rows,
                       std::span<const std::string> cols, const Matrix& values);

/// Color of `v` on a fixed scale. A scale with lo >= 0 runs white to dark
/// blue; a scale with lo < 0 diverges blue, white (at the midpoint), red.
/// Non-finite values are grey.
std::string color(double v, double lo, double hi);

/// Heatmap of a labelled square matrix with a fixed color scale.
std::string heatmap_svg(const std::string& title, std::span<const std::string> labels, const Matrix& values,
                        double lo, double hi);

/// Distributions ordered by decreasing median (stable for ties).
nlohmann::ordered_json distributions_json(std::span<const ConsistencyDistribution> distributions);

/// Replaces characters outside [A-Za-z0-9._-] so that ids can be file names.
std::string file_stem(std::string_view id);

/// Writes through a temporary file and renames it; creates parent
/// directories. Raises IoError.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace repsim::report
