#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

namespace speclab {

// Binary matrix format: "SPLB" magic, int64 rows, int64 cols, then row-major
// (re, im) little-endian doubles.
void write_matrix_binary(const Eigen::MatrixXcd& A, const std::string& path);
Eigen::MatrixXcd read_matrix_binary(const std::string& path);

void write_matrix_csv(const Eigen::MatrixXcd& A, const std::string& path);

} // namespace speclab
