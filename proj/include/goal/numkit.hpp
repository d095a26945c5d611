#pragma once

#include <functional>
#include <vector>

#include "goal/matrix.hpp"
#include "goal/rng.hpp"

namespace goal {

// Householder QR of a (rows >= cols). Q is rows x cols with orthonormal
// columns, R is cols x cols upper triangular with non-negative diagonal.
struct QrResult {
    Matrix q;
    Matrix r;
};
QrResult qr_thin(const Matrix& a);

// Random d x K matrix with orthonormal columns (Q of a Gaussian draw).
// Deterministic per rng state; the R-diagonal sign convention pins Q.
Matrix orthonormal_basis(std::size_t d, std::size_t k, Rng& rng);

// Max-shifted softmax with temperature. logits / temperature, then softmax.
std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);
void softmax_inplace(std::span<const double> logits, double temperature, std::span<double> out);

double log_sum_exp(std::span<const double> v);

// Shannon entropy of a probability vector, in nats. 0*log(0) := 0.
double entropy(std::span<const double> p);

// Row-wise l2 normalization. Rows must be nonzero.
Matrix normalize_rows(const Matrix& m);

// Pull a gradient w.r.t. normalized rows back to the raw rows:
// g_raw = (I - n n^T) g_norm / ||row||.
Matrix normalize_rows_backward(const Matrix& raw, const Matrix& grad_normalized);

// Central-difference gradient check. f maps a flat parameter vector to a
// scalar; analytic is the claimed gradient at x. Returns the max relative
// error max_i |a_i - c_i| / max(1, |a_i|, |c_i|).
double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<const double> x, std::span<const double> analytic,
                  double h = 1e-5);

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double sigma = 1.0);

}  // namespace goal
