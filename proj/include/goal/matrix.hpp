#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace goal {

// Dense row-major matrix of doubles. Small and deterministic; no BLAS.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
};

Matrix matmul(const Matrix& a, const Matrix& b);          // a * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);       // a^T * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);       // a * b^T
Matrix transpose(const Matrix& m);

void axpy(Matrix& y, double alpha, const Matrix& x);      // y += alpha * x
void scale(Matrix& m, double alpha);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double max_abs_diff(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);
void check_finite(const Matrix& m, const char* what);

}  // namespace goal
