// AVX2 variants of the series reduction kernels. Compiled with -mavx2 in
// its own translation unit; callers reach it through the dispatch table
// only after a CPUID check. Lane arithmetic uses the same mul/add sequence
// as the scalar kernel so the two differ only in accumulation order.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "washdet/kernels.hpp"

namespace washdet::kern {

Summary summarize_avx2(std::span<const double> xs) {
    const std::size_t n = xs.size();
    Summary s;
    s.n = n;
    if (n == 0) return s;
    const double* p = xs.data();
    const std::size_t vec_end = (n / 4) * 4;

    double sum = 0.0;
    double mn = p[0];
    double mx = p[0];
    if (vec_end > 0) {
        __m256d vsum = _mm256_setzero_pd();
        __m256d vmin = _mm256_loadu_pd(p);
        __m256d vmax = vmin;
        vsum = vmin;
        for (std::size_t i = 4; i < vec_end; i += 4) {
            const __m256d v = _mm256_loadu_pd(p + i);
            vsum = _mm256_add_pd(vsum, v);
            vmin = _mm256_min_pd(vmin, v);
            vmax = _mm256_max_pd(vmax, v);
        }
        double lanes[4];
        _mm256_storeu_pd(lanes, vsum);
        sum = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
        _mm256_storeu_pd(lanes, vmin);
        mn = lanes[0];
        for (int k = 1; k < 4; ++k) mn = lanes[k] < mn ? lanes[k] : mn;
        _mm256_storeu_pd(lanes, vmax);
        mx = lanes[0];
        for (int k = 1; k < 4; ++k) mx = lanes[k] > mx ? lanes[k] : mx;
    }
    for (std::size_t i = vec_end; i < n; ++i) {
        const double x = p[i];
        sum += x;
        if (x < mn) mn = x;
        if (x > mx) mx = x;
    }
    if (mn == mx) {
        // constant series: exact degenerate values (same rule as scalar)
        s.mean = mn;
        s.min = mn;
        s.max = mx;
        return s;
    }
    const double mean = sum / static_cast<double>(n);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    if (vec_end > 0) {
        const __m256d vmean = _mm256_set1_pd(mean);
        __m256d vm2 = _mm256_setzero_pd();
        __m256d vm3 = _mm256_setzero_pd();
        __m256d vm4 = _mm256_setzero_pd();
        for (std::size_t i = 0; i < vec_end; i += 4) {
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + i), vmean);
            const __m256d d2 = _mm256_mul_pd(d, d);
            vm2 = _mm256_add_pd(vm2, d2);
            vm3 = _mm256_add_pd(vm3, _mm256_mul_pd(d2, d));
            vm4 = _mm256_add_pd(vm4, _mm256_mul_pd(d2, d2));
        }
        double lanes[4];
        _mm256_storeu_pd(lanes, vm2);
        m2 = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
        _mm256_storeu_pd(lanes, vm3);
        m3 = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
        _mm256_storeu_pd(lanes, vm4);
        m4 = ((lanes[0] + lanes[1]) + lanes[2]) + lanes[3];
    }
    for (std::size_t i = vec_end; i < n; ++i) {
        const double d = p[i] - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    s.mean = mean;
    s.min = mn;
    s.max = mx;
    s.m2 = m2;
    s.m3 = m3;
    s.m4 = m4;
    return s;
}

std::size_t count_mean_crossings_avx2(std::span<const double> xs, double mean) {
    const std::size_t n = xs.size();
    const double* p = xs.data();
    std::size_t crossings = 0;
    int prev_sign = +1;
    const __m256d vmean = _mm256_set1_pd(mean);
    const __m256d vzero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(p + i), vmean);
        const unsigned zero = static_cast<unsigned>(
            _mm256_movemask_pd(_mm256_cmp_pd(d, vzero, _CMP_EQ_OQ)));
        if (zero != 0) {
            // exact-mean samples inherit the previous sign; resolve this
            // block sequentially
            for (std::size_t j = i; j < i + 4; ++j) {
                const double dj = p[j] - mean;
                if (dj == 0.0) continue;
                const int sign = dj < 0.0 ? -1 : +1;
                if (sign != prev_sign && j != 0) ++crossings;
                prev_sign = sign;
            }
            continue;
        }
        unsigned neg = static_cast<unsigned>(
            _mm256_movemask_pd(_mm256_cmp_pd(d, vzero, _CMP_LT_OQ)));
        const unsigned prev_bit = prev_sign < 0 ? 1u : 0u;
        unsigned trans = (neg ^ ((neg << 1) | prev_bit)) & 0xFu;
        if (i == 0) trans &= ~1u;  // lane 0 has no predecessor pair
        crossings += static_cast<std::size_t>(__builtin_popcount(trans));
        prev_sign = (neg & 8u) ? -1 : +1;
    }
    for (; i < n; ++i) {
        const double d = p[i] - mean;
        if (d == 0.0) continue;
        const int sign = d < 0.0 ? -1 : +1;
        if (sign != prev_sign && i != 0) ++crossings;
        prev_sign = sign;
    }
    return crossings;
}

}  // namespace washdet::kern

#endif  // x86_64
