#include <atomic>
#include <stdexcept>
#include <string>

#include "washdet/kernels.hpp"

namespace washdet::kern {

namespace {

#if defined(__x86_64__) || defined(_M_X64)
bool cpu_has_avx2() { return __builtin_cpu_supports("avx2"); }
#else
bool cpu_has_avx2() { return false; }
#endif

std::atomic<Backend> g_backend{cpu_has_avx2() ? Backend::avx2 : Backend::scalar};

}  // namespace

std::string_view backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "?";
}

bool backend_available(Backend b) {
    if (b == Backend::scalar) return true;
    return cpu_has_avx2();
}

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void force_backend(Backend b) {
    if (!backend_available(b))
        throw std::runtime_error("kernel backend not available on this CPU: " +
                                 std::string(backend_name(b)));
    g_backend.store(b, std::memory_order_relaxed);
}

Summary summarize(std::span<const double> xs) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::avx2) return summarize_avx2(xs);
#endif
    return summarize_scalar(xs);
}

std::size_t count_mean_crossings(std::span<const double> xs, double mean) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::avx2) return count_mean_crossings_avx2(xs, mean);
#endif
    return count_mean_crossings_scalar(xs, mean);
}

}  // namespace washdet::kern
