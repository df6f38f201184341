#include "speclab/io.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "speclab/errors.hpp"

namespace speclab {

static_assert(sizeof(double) == 8);

void write_matrix_binary(const Eigen::MatrixXcd& A, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open for writing: " + path);
    out.write("SPLB", 4);
    std::int64_t r = A.rows(), c = A.cols();
    out.write(reinterpret_cast<const char*>(&r), 8);
    out.write(reinterpret_cast<const char*>(&c), 8);
    for (std::int64_t i = 0; i < r; ++i)
        for (std::int64_t j = 0; j < c; ++j) {
            double re = A(i, j).real(), im = A(i, j).imag();
            out.write(reinterpret_cast<const char*>(&re), 8);
            out.write(reinterpret_cast<const char*>(&im), 8);
        }
    if (!out)
        throw Error("short write: " + path);
}

Eigen::MatrixXcd read_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "SPLB")
        throw Error("bad magic in " + path);
    std::int64_t r = 0, c = 0;
    in.read(reinterpret_cast<char*>(&r), 8);
    in.read(reinterpret_cast<char*>(&c), 8);
    if (!in || r < 0 || c < 0 || r * c > (1LL << 28))
        throw Error("bad dimensions in " + path);
    Eigen::MatrixXcd A(r, c);
    for (std::int64_t i = 0; i < r; ++i)
        for (std::int64_t j = 0; j < c; ++j) {
            double re, im;
            in.read(reinterpret_cast<char*>(&re), 8);
            in.read(reinterpret_cast<char*>(&im), 8);
            A(i, j) = {re, im};
        }
    if (!in)
        throw Error("short read: " + path);
    return A;
}

void write_matrix_csv(const Eigen::MatrixXcd& A, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot open for writing: " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            if (j)
                out << ',';
            out << A(i, j).real() << ' ' << A(i, j).imag();
        }
        out << '\n';
    }
}

} // namespace speclab
