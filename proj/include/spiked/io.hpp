#pragma once

#include "spiked/tensor.hpp"

#include <string>

namespace spiked {

// Binary layout, little-endian throughout:
//   "SPKT" | uint32 version (1) | uint64 d | uint64 dims[d] | float64 data[prod dims]
// Matrices use the same header with d = 2 and row-major data.
void write_tensor_binary(const std::string& path, const DenseTensor& t);
DenseTensor read_tensor_binary(const std::string& path);

// One line per entry: i_1,...,i_d,value (0-based indices).
void write_tensor_csv(const std::string& path, const DenseTensor& t);

void write_matrix_binary(const std::string& path, const Mat& m);
Mat read_matrix_binary(const std::string& path);
void write_matrix_csv(const std::string& path, const Mat& m);

// Locale-independent shortest round-trip-safe formatting at 15 significant digits.
std::string fmt_num(double x);

}  // namespace spiked
