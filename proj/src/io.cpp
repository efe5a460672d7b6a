#include "cogom/io.hpp"

#include "cogom/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace cogom::io {

namespace {

void append_scientific(std::string& out, double v) {
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::scientific, 16);
  out.append(buf.data(), res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_matrix_csv(const DenseMatrix& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 25);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out.push_back(',');
      append_scientific(out, m(i, j));
    }
    if (m.cols() > 0) out.push_back('\n');
  }
  return out;
}

DenseMatrix parse_matrix_csv(std::string_view text, std::string_view source) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    std::size_t col = 0;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      const std::string_view cell =
          trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      ++col;
      double v = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      const auto res = std::from_chars(first, last, v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << source << ": malformed value '" << cell << "' at row " << line_no << ", column "
            << col;
        throw ValidationError(msg.str());
      }
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      cols = col;
    } else if (col != cols) {
      std::ostringstream msg;
      msg << source << ": row " << line_no << " has " << col << " columns, expected " << cols
          << " (column " << std::min(col, cols) + 1 << ")";
      throw ValidationError(msg.str());
    }
    ++rows;
  }
  DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed while reading '" + path.string() + "'");
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

DenseMatrix read_matrix_csv(const std::filesystem::path& path) {
  return parse_matrix_csv(read_text(path), path.string());
}

void write_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m) {
  write_text(path, format_matrix_csv(m));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 40> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace cogom::io
