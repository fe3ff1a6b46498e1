// Advanced SIMD (NEON) variants, two doubles per lane group. aarch64 only.

#include "airfl/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace airfl::kernels {
namespace {

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i)
        y[i] += a * x[i];
}

void caxpy_neon(double c_re, double c_im, const double* x, double* y_re, double* y_im,
                std::size_t n) {
    const float64x2_t vr = vdupq_n_f64(c_re);
    const float64x2_t vi = vdupq_n_f64(c_im);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t vx = vld1q_f64(x + i);
        vst1q_f64(y_re + i, vfmaq_f64(vld1q_f64(y_re + i), vr, vx));
        vst1q_f64(y_im + i, vfmaq_f64(vld1q_f64(y_im + i), vi, vx));
    }
    for (; i < n; ++i) {
        y_re[i] += c_re * x[i];
        y_im[i] += c_im * x[i];
    }
}

void real_cmul_acc_neon(double g_re, double g_im, const double* y_re, const double* y_im,
                        double* out, std::size_t n) {
    const float64x2_t vr = vdupq_n_f64(g_re);
    const float64x2_t vi = vdupq_n_f64(g_im);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t acc = vld1q_f64(out + i);
        acc = vfmaq_f64(acc, vr, vld1q_f64(y_re + i));
        acc = vfmsq_f64(acc, vi, vld1q_f64(y_im + i));
        vst1q_f64(out + i, acc);
    }
    for (; i < n; ++i)
        out[i] += g_re * y_re[i] - g_im * y_im[i];
}

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
    double total = vaddvq_f64(acc);
    for (; i < n; ++i)
        total += x[i] * y[i];
    return total;
}

double sq_dist_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double total = vaddvq_f64(acc);
    for (; i < n; ++i) {
        const double d = x[i] - y[i];
        total += d * d;
    }
    return total;
}

void affine_neon(double a, double b, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    const float64x2_t vb = vdupq_n_f64(b);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vfmaq_f64(vb, va, vld1q_f64(x + i)));
    for (; i < n; ++i)
        y[i] = a * x[i] + b;
}

} // namespace

const KernelTable& neon_table() {
    static const KernelTable table{Backend::Neon,     "neon",        &axpy_neon,
                                   &caxpy_neon,       &real_cmul_acc_neon,
                                   &dot_neon,         &sq_dist_neon, &affine_neon};
    return table;
}

} // namespace airfl::kernels

#endif
