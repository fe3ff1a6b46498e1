#include "airfl/kernels.hpp"

namespace airfl::kernels {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

void caxpy_scalar(double c_re, double c_im, const double* x, double* y_re, double* y_im,
                  std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y_re[i] += c_re * x[i];
        y_im[i] += c_im * x[i];
    }
}

void real_cmul_acc_scalar(double g_re, double g_im, const double* y_re, const double* y_im,
                          double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        out[i] += g_re * y_re[i] - g_im * y_im[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i] * y[i];
    return acc;
}

double sq_dist_scalar(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    return acc;
}

void affine_scalar(double a, double b, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] = a * x[i] + b;
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{Backend::Scalar,     "scalar",        &axpy_scalar,
                                   &caxpy_scalar,       &real_cmul_acc_scalar,
                                   &dot_scalar,         &sq_dist_scalar, &affine_scalar};
    return table;
}

} // namespace airfl::kernels
