#pragma once

// Internal helpers for the weight file format: text headers, little-endian
// float64 payloads.

#include <Eigen/Core>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tmatch/error.hpp"

namespace tmatch::detail {

inline void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline double get_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline void write_tensor(std::ostream& out, const std::string& name,
                         const Eigen::MatrixXd& m) {
  out << "tensor " << name << " " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
}

inline Eigen::MatrixXd read_tensor(std::istream& in, const std::string& expect) {
  std::string line;
  if (!std::getline(in, line)) throw IoFailure("weight file truncated before " + expect);
  std::istringstream hdr(line);
  std::string kw, name;
  Eigen::Index rows = 0, cols = 0;
  hdr >> kw >> name >> rows >> cols;
  if (kw != "tensor" || name != expect || rows <= 0 || cols <= 0) {
    throw IoFailure("expected tensor " + expect + ", got: " + line);
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get_f64(in);
  if (!in) throw IoFailure("weight file truncated inside " + expect);
  return m;
}

}  // namespace tmatch::detail
