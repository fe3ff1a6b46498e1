#pragma once

// Data-parallel inner loops shared by the channel simulation, the receivers
// and local SGD. Every kernel has a scalar reference implementation and, where
// the CPU supports it, a vectorized variant; the active table is picked once
// at startup from the detected instruction set.

#include <cstddef>
#include <span>
#include <string_view>

namespace airfl::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
    Backend backend;
    const char* name;

    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // (y_re, y_im) += (c_re + j c_im) * x   for real x
    void (*caxpy)(double c_re, double c_im, const double* x, double* y_re, double* y_im,
                  std::size_t n);
    // out += Re{(g_re + j g_im) * (y_re + j y_im)}
    void (*real_cmul_acc)(double g_re, double g_im, const double* y_re, const double* y_im,
                          double* out, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum (x - y)^2
    double (*sq_dist)(const double* x, const double* y, std::size_t n);
    // y = a * x + b
    void (*affine)(double a, double b, const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_table();
#endif
#if defined(__aarch64__)
const KernelTable& neon_table();
#endif

/// Whether the running CPU can execute the given backend.
bool backend_available(Backend b);

/// The table used by the library. Selected on first use: AVX2+FMA on x86-64
/// when the CPU reports it, NEON on aarch64, scalar otherwise. Setting the
/// environment variable AIRFL_KERNELS=scalar forces the reference path.
const KernelTable& active();

/// Override the active backend (tests and benchmarks). Throws if unavailable.
void set_backend(Backend b);

std::string_view backend_name(Backend b);

/// The backend behind active().
Backend active_backend();

// Span conveniences over the active table.

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    active().axpy(a, x.data(), y.data(), x.size());
}
inline void caxpy(double c_re, double c_im, std::span<const double> x, std::span<double> y_re,
                  std::span<double> y_im) {
    active().caxpy(c_re, c_im, x.data(), y_re.data(), y_im.data(), x.size());
}
inline void real_cmul_acc(double g_re, double g_im, std::span<const double> y_re,
                          std::span<const double> y_im, std::span<double> out) {
    active().real_cmul_acc(g_re, g_im, y_re.data(), y_im.data(), out.data(), out.size());
}
inline double dot(std::span<const double> x, std::span<const double> y) {
    return active().dot(x.data(), y.data(), x.size());
}
inline double sq_dist(std::span<const double> x, std::span<const double> y) {
    return active().sq_dist(x.data(), y.data(), x.size());
}
inline double sq_norm(std::span<const double> x) {
    return active().dot(x.data(), x.data(), x.size());
}
inline void affine(double a, double b, std::span<const double> x, std::span<double> y) {
    active().affine(a, b, x.data(), y.data(), x.size());
}

} // namespace airfl::kernels
