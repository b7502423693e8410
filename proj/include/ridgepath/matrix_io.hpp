#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ridgepath/dense_matrix.hpp"
#include "ridgepath/errors.hpp"
#include "ridgepath/format.hpp"

// Binary matrix files: 8-byte magic "RPMATX01", u64 rows, u64 cols, then
// rows*cols f64 values in column-major order, all little-endian.

namespace ridgepath {

inline constexpr char kMatrixMagic[8] = {'R', 'P', 'M', 'A', 'T', 'X', '0', '1'};

namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline bool get_u64(std::istream& is, std::uint64_t& v) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return true;
}

}  // namespace detail

inline void write_matrix(std::ostream& os, const DenseMatrix& m) {
  os.write(kMatrixMagic, 8);
  detail::put_u64(os, m.rows());
  detail::put_u64(os, m.cols());
  for (std::size_t k = 0; k < m.size(); ++k) {
    detail::put_u64(os, std::bit_cast<std::uint64_t>(m.data()[k]));
  }
  if (!os) throw IoError("failed writing matrix data");
}

inline DenseMatrix read_matrix(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8)) throw BadFormat("file too short for matrix header");
  if (std::memcmp(magic, kMatrixMagic, 8) != 0) throw BadFormat("bad magic, not an RPMATX01 file");
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  if (!detail::get_u64(is, rows) || !detail::get_u64(is, cols)) {
    throw BadFormat("truncated matrix header");
  }
  if (rows != 0 && cols > (std::uint64_t{1} << 40) / rows) throw BadFormat("matrix too large");
  std::vector<double> data(rows * cols);
  for (double& v : data) {
    std::uint64_t bits = 0;
    if (!detail::get_u64(is, bits)) throw BadFormat("payload shorter than header declares");
    v = std::bit_cast<double>(bits);
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw BadFormat("payload longer than header declares");
  }
  try {
    return DenseMatrix(rows, cols, std::move(data));
  } catch (const NonFiniteValue& e) {
    throw BadFormat(std::string("matrix file holds non-finite values: ") + e.what());
  }
}

inline void save_matrix(const std::string& path, const DenseMatrix& m) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_matrix(os, m);
  os.flush();
  if (!os) throw IoError("failed writing '" + path + "'");
}

inline DenseMatrix load_matrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_matrix(is);
}

// CSV: one header line, then one row per matrix row, comma separated.

inline DenseMatrix read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw BadFormat("CSV is empty, expected a header line");
  std::vector<std::vector<double>> rows;
  std::size_t cols = 0;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const std::size_t comma = rest.find(',');
      double v = 0.0;
      if (!parse_double(rest.substr(0, comma), v)) {
        throw BadFormat("CSV line " + std::to_string(lineno) + ": bad number '" +
                        std::string(rest.substr(0, comma)) + "'");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows.empty()) cols = row.size();
    if (row.size() != cols) {
      throw BadFormat("CSV line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                      " fields, expected " + std::to_string(cols));
    }
    rows.push_back(std::move(row));
  }
  DenseMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  if (!m.all_finite()) throw BadFormat("CSV holds non-finite values");
  return m;
}

inline void write_csv(std::ostream& os, const DenseMatrix& m) {
  for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? "," : "") << "c" << j;
  os << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

inline bool has_suffix(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

/// Loads a matrix file, or a CSV when the path ends in ".csv".
inline DenseMatrix load_any(const std::string& path) {
  if (!has_suffix(path, ".csv")) return load_matrix(path);
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_csv(is);
}

}  // namespace ridgepath
