// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "airfl/kernels.hpp"

#include <immintrin.h>

namespace airfl::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i)
        y[i] += a * x[i];
}

void caxpy_avx2(double c_re, double c_im, const double* x, double* y_re, double* y_im,
                std::size_t n) {
    const __m256d vr = _mm256_set1_pd(c_re);
    const __m256d vi = _mm256_set1_pd(c_im);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y_re + i, _mm256_fmadd_pd(vr, vx, _mm256_loadu_pd(y_re + i)));
        _mm256_storeu_pd(y_im + i, _mm256_fmadd_pd(vi, vx, _mm256_loadu_pd(y_im + i)));
    }
    for (; i < n; ++i) {
        y_re[i] += c_re * x[i];
        y_im[i] += c_im * x[i];
    }
}

void real_cmul_acc_avx2(double g_re, double g_im, const double* y_re, const double* y_im,
                        double* out, std::size_t n) {
    const __m256d vr = _mm256_set1_pd(g_re);
    const __m256d vi = _mm256_set1_pd(g_im);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_loadu_pd(out + i);
        acc = _mm256_fmadd_pd(vr, _mm256_loadu_pd(y_re + i), acc);
        acc = _mm256_fnmadd_pd(vi, _mm256_loadu_pd(y_im + i), acc);
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < n; ++i)
        out[i] += g_re * y_re[i] - g_im * y_im[i];
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i)
        acc += x[i] * y[i];
    return acc;
}

double sq_dist_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double total = hsum(acc);
    for (; i < n; ++i) {
        const double d = x[i] - y[i];
        total += d * d;
    }
    return total;
}

void affine_avx2(double a, double b, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vb));
    for (; i < n; ++i)
        y[i] = a * x[i] + b;
}

} // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{Backend::Avx2,     "avx2",        &axpy_avx2,
                                   &caxpy_avx2,       &real_cmul_acc_avx2,
                                   &dot_avx2,         &sq_dist_avx2, &affine_avx2};
    return table;
}

} // namespace airfl::kernels
