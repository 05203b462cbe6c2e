#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mlp.hpp"

namespace hammer {

// Flat, ordered name -> matrix container backing the checkpoint format.
// Vectors are stored as 1 x n, scalars as 1 x 1. Values are written with
// shortest round-trip decimal formatting, so save/load is bit-exact.
//
// File layout (plain text, one tensor after another):
//   hammer-tensors 1
//   tensor <name> <rows> <cols>
//   <cols values>            (one line per row)
//   ...
//   end
struct TensorMap {
  std::vector<std::pair<std::string, Mat>> items;

  void put(const std::string& name, Mat value);
  void put_vec(const std::string& name, const Vec& value);
  void put_scalar(const std::string& name, double value);

  const Mat& get(const std::string& name) const;          // throws if missing
  Vec get_vec(const std::string& name) const;             // shape-checked 1 x n
  double get_scalar(const std::string& name) const;
  bool contains(const std::string& name) const;
};

void save_tensor_map(const TensorMap& map, const std::string& path);
TensorMap load_tensor_map(const std::string& path);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);
// Fixed 17-significant-digit rendering (metrics CSV contract).
std::string format_double17(double v);
double parse_double(const std::string& s);  // throws on trailing garbage

}  // namespace hammer
