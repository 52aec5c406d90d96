#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dlab/cli.hpp"
#include "dlab/profiles.hpp"
#include "dlab/twopoint.hpp"

namespace dlab::cli::detail {

/// "sin", "cos", "sin^3", "sin(ky)", "cos(ky)", a number (constant), or
/// {"a": [a0, a1, ...], "b": [b1, b2, ...]}.
ShearProfile profile_from_json(const json& j, const std::string& path);
ProfileFamily family_from_json(const json& j, const std::string& path);
/// {"shear_x": profile} or {"shear_y": profile}.
TrigField2D field_from_json(const json& j, const std::string& path);
/// {"re": rows, "im": rows}, Hermitian.
Eigen::MatrixXcd hermitian_from_json(const json& j, const std::string& path);

/// Rows of numbers with a header, printed with round-trip precision.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
/// Same, with one leading string column.
void write_series_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::pair<std::string, std::vector<double>>>& rows);
std::vector<std::vector<double>> read_csv(const std::filesystem::path& path, std::vector<std::string>* header);
void write_json(const std::filesystem::path& path, const json& j);
json read_json(const std::filesystem::path& path);

}  // namespace dlab::cli::detail
