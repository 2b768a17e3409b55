#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace eegglt::csv {

/// Shortest decimal text that parses back to the identical double ('.' decimal, no locale).
std::string format_double(double v);
double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Header-less, row-major, one matrix row per line.
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace eegglt::csv
