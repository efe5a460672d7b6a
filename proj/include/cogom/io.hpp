#pragma once

#include "cogom/linalg.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace cogom::io {

/// Headerless CSV, one matrix row per line, ',' separated, LF endings, every
/// value in scientific notation with 17 significant digits (lossless for
/// doubles). An empty matrix is an empty file.
std::string format_matrix_csv(const DenseMatrix& m);

/// Parses format_matrix_csv output (any decimal notation is accepted).
/// Throws ValidationError naming the 1-based row and column of the first
/// malformed cell, or of a row whose width differs from the first row.
DenseMatrix parse_matrix_csv(std::string_view text, std::string_view source = "<memory>");

DenseMatrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

/// Shortest-exact rendering used for scalars in CSV tables.
std::string format_double(double v);

}  // namespace cogom::io
