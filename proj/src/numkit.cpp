#include "goal/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#endif

namespace goal {

namespace {

// four accumulators so the reduction vectorizes without reassociation flags
double dot_range(const double* __restrict a, const double* __restrict b, std::size_t lo, std::size_t hi) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = lo;
    for (; i + 4 <= hi; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < hi; ++i) s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

// one pass over v updating two columns, halving loads of v
#if defined(__AVX2__) && defined(__FMA__)
void reflect_two(const double* __restrict v, double vnorm2,
                 double* __restrict c1, double* __restrict c2,
                 std::size_t lo, std::size_t hi) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d b0 = _mm256_setzero_pd(), b1 = _mm256_setzero_pd();
    std::size_t i = lo;
    for (; i + 8 <= hi; i += 8) {
        const __m256d v0 = _mm256_loadu_pd(v + i), v1 = _mm256_loadu_pd(v + i + 4);
        a0 = _mm256_fmadd_pd(v0, _mm256_loadu_pd(c1 + i), a0);
        a1 = _mm256_fmadd_pd(v1, _mm256_loadu_pd(c1 + i + 4), a1);
        b0 = _mm256_fmadd_pd(v0, _mm256_loadu_pd(c2 + i), b0);
        b1 = _mm256_fmadd_pd(v1, _mm256_loadu_pd(c2 + i + 4), b1);
    }
    alignas(32) double pa[4], pb[4];
    _mm256_store_pd(pa, _mm256_add_pd(a0, a1));
    _mm256_store_pd(pb, _mm256_add_pd(b0, b1));
    double s1 = (pa[0] + pa[1]) + (pa[2] + pa[3]);
    double s2 = (pb[0] + pb[1]) + (pb[2] + pb[3]);
    for (; i < hi; ++i) {
        s1 += v[i] * c1[i];
        s2 += v[i] * c2[i];
    }
    const double f1 = 2.0 * s1 / vnorm2, f2 = 2.0 * s2 / vnorm2;
    const __m256d vf1 = _mm256_set1_pd(f1), vf2 = _mm256_set1_pd(f2);
    for (i = lo; i + 4 <= hi; i += 4) {
        _mm256_storeu_pd(c1 + i,
                         _mm256_fnmadd_pd(vf1, _mm256_loadu_pd(v + i), _mm256_loadu_pd(c1 + i)));
        _mm256_storeu_pd(c2 + i,
                         _mm256_fnmadd_pd(vf2, _mm256_loadu_pd(v + i), _mm256_loadu_pd(c2 + i)));
    }
    for (; i < hi; ++i) {
        c1[i] -= f1 * v[i];
        c2[i] -= f2 * v[i];
    }
}
#else
void reflect_two(const double* __restrict v, double vnorm2,
                 double* __restrict c1, double* __restrict c2,
                 std::size_t lo, std::size_t hi) {
    const double f1 = 2.0 * dot_range(v, c1, lo, hi) / vnorm2;
    const double f2 = 2.0 * dot_range(v, c2, lo, hi) / vnorm2;
    for (std::size_t i = lo; i < hi; ++i) {
        c1[i] -= f1 * v[i];
        c2[i] -= f2 * v[i];
    }
}
#endif

}  // namespace

QrResult qr_thin(const Matrix& a) {
    const std::size_t m = a.rows, n = a.cols;
    if (m < n) throw std::invalid_argument("qr_thin: requires rows >= cols");
    // work on A^T so every Householder update runs over contiguous memory
    Matrix bt = transpose(a);                // n x m, row j is column j of A
    // reflector storage; row k only uses [k, m), so skip zero-initialization
    std::unique_ptr<double[]> vs(new double[n * m]);
    std::vector<double> vnorm2s(n, 0.0);

    for (std::size_t k = 0; k < n; ++k) {
        double* colk = bt.row(k).data();
        const double normx2 = dot_range(colk, colk, k, m);
        if (normx2 == 0.0) continue;
        const double normx = std::sqrt(normx2);
        const double alpha = colk[k] >= 0.0 ? -normx : normx;
        double* v = vs.get() + k * m;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            v[i] = colk[i];
            if (i == k) v[i] -= alpha;
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 == 0.0) continue;
        vnorm2s[k] = vnorm2;
        // the reflector sends its own column to alpha * e_k analytically;
        // entries below the diagonal are never read again
        colk[k] = alpha;
        // apply H = I - 2 v v^T / (v^T v) to the remaining columns of A
        std::size_t j = k + 1;
        for (; j + 2 <= n; j += 2)
            reflect_two(v, vnorm2, bt.row(j).data(), bt.row(j + 1).data(), k, m);
        for (; j < n; ++j) {
            double* col = bt.row(j).data();
            const double f = 2.0 * dot_range(v, col, k, m) / vnorm2;
            for (std::size_t i = k; i < m; ++i) col[i] -= f * v[i];
        }
    }

    // thin Q: rows of Q^T are e_j run back through the stored reflections
    Matrix qt(n, m);
    for (std::size_t j = 0; j < n; ++j) qt(j, j) = 1.0;
    for (std::size_t k = n; k-- > 0;) {
        if (vnorm2s[k] == 0.0) continue;
        const double* v = vs.get() + k * m;
        // rows j < k are still e_j with no support in columns >= k
        std::size_t j = k;
        for (; j + 2 <= n; j += 2)
            reflect_two(v, vnorm2s[k], qt.row(j).data(), qt.row(j + 1).data(), k, m);
        for (; j < n; ++j) {
            double* row = qt.row(j).data();
            const double f = 2.0 * dot_range(row, v, k, m) / vnorm2s[k];
            for (std::size_t i = k; i < m; ++i) row[i] -= f * v[i];
        }
    }

    QrResult out;
    out.q = transpose(qt);
    out.r = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) out.r(i, j) = bt(j, i);

    // sign convention: diagonal of R non-negative
    for (std::size_t j = 0; j < n; ++j) {
        if (out.r(j, j) < 0.0) {
            for (std::size_t jj = j; jj < n; ++jj) out.r(j, jj) = -out.r(j, jj);
            for (std::size_t i = 0; i < m; ++i) out.q(i, j) = -out.q(i, j);
        }
    }
    return out;
}

Matrix orthonormal_basis(std::size_t d, std::size_t k, Rng& rng) {
    if (k < 1) throw std::invalid_argument("orthonormal_basis: K must be >= 1");
    if (d < k) throw std::invalid_argument("orthonormal_basis: requires d >= K");
    Matrix g = gaussian_matrix(d, k, rng);
    Matrix q = qr_thin(g).q;
    check_finite(q, "orthonormal_basis");
    return q;
}

void softmax_inplace(std::span<const double> logits, double temperature, std::span<double> out) {
    if (temperature <= 0.0) throw std::invalid_argument("softmax: temperature must be > 0");
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    double mx = logits[0] / temperature;
    for (double v : logits) mx = std::max(mx, v / temperature);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] / temperature - mx);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
    std::vector<double> out(logits.size());
    softmax_inplace(logits, temperature, out);
    return out;
}

double log_sum_exp(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    double mx = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

Matrix normalize_rows(const Matrix& m) {
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double n = norm2(m.row(i));
        if (n == 0.0) throw std::invalid_argument("normalize_rows: zero row");
        for (std::size_t j = 0; j < m.cols; ++j) out(i, j) /= n;
    }
    return out;
}

Matrix normalize_rows_backward(const Matrix& raw, const Matrix& grad_normalized) {
    if (!raw.same_shape(grad_normalized))
        throw std::invalid_argument("normalize_rows_backward: shape mismatch");
    Matrix out(raw.rows, raw.cols);
    for (std::size_t i = 0; i < raw.rows; ++i) {
        const double n = norm2(raw.row(i));
        if (n == 0.0) throw std::invalid_argument("normalize_rows_backward: zero row");
        const double gd = dot(raw.row(i), grad_normalized.row(i)) / (n * n);
        for (std::size_t j = 0; j < raw.cols; ++j)
            out(i, j) = (grad_normalized(i, j) - raw(i, j) * gd) / n;
    }
    return out;
}

double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<const double> x, std::span<const double> analytic, double h) {
    if (x.size() != analytic.size())
        throw std::invalid_argument("grad_check: gradient length mismatch");
    std::vector<double> xs(x.begin(), x.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x0 = xs[i];
        xs[i] = x0 + h;
        const double fp = f(xs);
        xs[i] = x0 - h;
        const double fm = f(xs);
        xs[i] = x0;
        const double cd = (fp - fm) / (2.0 * h);
        const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(cd)});
        worst = std::max(worst, std::abs(analytic[i] - cd) / denom);
    }
    return worst;
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double sigma) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = sigma * rng.gaussian();
    return m;
}

}  // namespace goal
