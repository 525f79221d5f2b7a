#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace washdet::kern {

// One-series reduction: count, mean, extrema and the 2nd..4th central power
// sums (sum of (x - mean)^k). Everything the 12-feature block needs except
// the order statistics.
struct Summary {
    std::size_t n = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
};

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);
bool backend_available(Backend b);
Backend active_backend();
// Overrides auto-detection; throws std::runtime_error if unavailable.
void force_backend(Backend b);

// Dispatched entry points. The backend is picked once per process from
// CPUID; the choice never depends on thread count or call order.
Summary summarize(std::span<const double> xs);

// Number of strict sign alternations of (x - mean). A sample exactly equal
// to the mean inherits the sign of the previous non-zero deviation; leading
// zero deviations count as positive.
std::size_t count_mean_crossings(std::span<const double> xs, double mean);

// Direct entry points for the scalar/SIMD equivalence tests.
Summary summarize_scalar(std::span<const double> xs);
std::size_t count_mean_crossings_scalar(std::span<const double> xs, double mean);
#if defined(__x86_64__) || defined(_M_X64)
Summary summarize_avx2(std::span<const double> xs);
std::size_t count_mean_crossings_avx2(std::span<const double> xs, double mean);
#endif

// Quantile of an ascending-sorted series: linear interpolation at p*(n-1).
// Shared by feature extraction, duration statistics and the bootstrap so
// the whole project pins one quantile definition.
double quantile_sorted(std::span<const double> sorted, double p);

}  // namespace washdet::kern
