#include "airfl/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace airfl::kernels {
namespace {

const KernelTable* detect() {
    if (const char* forced = std::getenv("AIRFL_KERNELS"); forced && std::string(forced) == "scalar")
        return &scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
    if (backend_available(Backend::Avx2))
        return &avx2_table();
#elif defined(__aarch64__)
    return &neon_table();
#endif
    return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> table{detect()};
    return table;
}

} // namespace

bool backend_available(Backend b) {
    switch (b) {
    case Backend::Scalar:
        return true;
    case Backend::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
        return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
        return true;
#else
        return false;
#endif
    }
    return false;
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void set_backend(Backend b) {
    if (!backend_available(b))
        throw std::runtime_error("kernel backend not available on this CPU: " +
                                 std::string(backend_name(b)));
    const KernelTable* table = &scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
    if (b == Backend::Avx2)
        table = &avx2_table();
#endif
#if defined(__aarch64__)
    if (b == Backend::Neon)
        table = &neon_table();
#endif
    slot().store(table, std::memory_order_release);
}

Backend active_backend() {
    const KernelTable* table = &active();
#if defined(__x86_64__) || defined(_M_X64)
    if (table == &avx2_table())
        return Backend::Avx2;
#endif
#if defined(__aarch64__)
    if (table == &neon_table())
        return Backend::Neon;
#endif
    return Backend::Scalar;
}

std::string_view backend_name(Backend b) {
    switch (b) {
    case Backend::Scalar:
        return "scalar";
    case Backend::Avx2:
        return "avx2";
    case Backend::Neon:
        return "neon";
    }
    return "unknown";
}

} // namespace airfl::kernels
