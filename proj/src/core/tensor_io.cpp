#include "tensor_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hammer {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_double17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("parse_double: invalid number '" + s + "'");
  return v;
}

void TensorMap::put(const std::string& name, Mat value) {
  if (contains(name))
    throw std::runtime_error("TensorMap: duplicate tensor '" + name + "'");
  items.emplace_back(name, std::move(value));
}

void TensorMap::put_vec(const std::string& name, const Vec& value) {
  Mat m(1, value.size());
  m.row(0) = value.transpose();
  put(name, std::move(m));
}

void TensorMap::put_scalar(const std::string& name, double value) {
  Mat m(1, 1);
  m(0, 0) = value;
  put(name, std::move(m));
}

const Mat& TensorMap::get(const std::string& name) const {
  for (const auto& [k, v] : items)
    if (k == name) return v;
  throw std::runtime_error("TensorMap: missing tensor '" + name + "'");
}

Vec TensorMap::get_vec(const std::string& name) const {
  const Mat& m = get(name);
  if (m.rows() != 1)
    throw std::runtime_error("TensorMap: tensor '" + name + "' is not a vector");
  return m.row(0).transpose();
}

double TensorMap::get_scalar(const std::string& name) const {
  const Mat& m = get(name);
  if (m.rows() != 1 || m.cols() != 1)
    throw std::runtime_error("TensorMap: tensor '" + name + "' is not a scalar");
  return m(0, 0);
}

bool TensorMap::contains(const std::string& name) const {
  for (const auto& [k, v] : items)
    if (k == name) return true;
  return false;
}

void save_tensor_map(const TensorMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_tensor_map: cannot open " + path);
  out << "hammer-tensors 1\n";
  for (const auto& [name, m] : map.items) {
    out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out << ' ';
        out << format_double(m(r, c));
      }
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw std::runtime_error("save_tensor_map: write failed for " + path);
}

TensorMap load_tensor_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_tensor_map: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "hammer-tensors 1")
    throw std::runtime_error("load_tensor_map: bad header in " + path);
  TensorMap map;
  while (std::getline(in, line)) {
    if (line == "end") return map;
    std::istringstream hdr(line);
    std::string tag, name;
    Eigen::Index rows = 0, cols = 0;
    hdr >> tag >> name >> rows >> cols;
    if (tag != "tensor" || hdr.fail() || rows < 0 || cols < 0)
      throw std::runtime_error("load_tensor_map: bad tensor header '" + line + "'");
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!std::getline(in, line))
        throw std::runtime_error("load_tensor_map: truncated tensor " + name);
      std::istringstream row(line);
      std::string cell;
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(row >> cell))
          throw std::runtime_error("load_tensor_map: short row in tensor " + name);
        m(r, c) = parse_double(cell);
      }
    }
    map.items.emplace_back(std::move(name), std::move(m));
  }
  throw std::runtime_error("load_tensor_map: missing end marker in " + path);
}

}  // namespace hammer
