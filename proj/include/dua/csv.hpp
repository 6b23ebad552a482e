#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dua/matrix.hpp"

namespace dua {

/// Shortest round-trip decimal rendering of a double (to_chars).
std::string format_double(double x);

/// Headerless numeric CSV -> matrix. Rejects ragged rows, empty files and
/// non-numeric or non-finite cells; errors name file, row and column (1-based).
Matrix read_csv_matrix(const std::filesystem::path& path);

void write_csv_matrix(const Matrix& m, const std::filesystem::path& path);

/// Single-column integer CSV.
std::vector<int> read_csv_labels(const std::filesystem::path& path);

void write_csv_labels(const std::vector<int>& labels, const std::filesystem::path& path);

/// Writes `content` to a temp file in the target directory, then renames it
/// into place, so readers never observe a partial file.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

std::string read_text(const std::filesystem::path& path);

}  // namespace dua
