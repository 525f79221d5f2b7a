#include <cmath>
#include <stdexcept>

#include "washdet/kernels.hpp"

namespace washdet::kern {

// Reference implementations. Two passes: plain left-to-right sum for the
// mean, then centered power sums. Centering before the higher powers keeps
// skewness/kurtosis stable under large constant offsets.
Summary summarize_scalar(std::span<const double> xs) {
    Summary s;
    s.n = xs.size();
    if (xs.empty()) return s;
    double sum = 0.0;
    double mn = xs[0];
    double mx = xs[0];
    for (const double x : xs) {
        sum += x;
        if (x < mn) mn = x;
        if (x > mx) mx = x;
    }
    if (mn == mx) {
        // constant series: pin the exact degenerate values instead of
        // letting summation round the mean off by an ulp
        s.mean = mn;
        s.min = mn;
        s.max = mx;
        return s;
    }
    const double mean = sum / static_cast<double>(xs.size());
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (const double x : xs) {
        const double d = x - mean;
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

std::size_t count_mean_crossings_scalar(std::span<const double> xs, double mean) {
    std::size_t crossings = 0;
    int prev_sign = +1;  // leading zero deviations count as positive
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - mean;
        if (d == 0.0) continue;  // inherits prev_sign
        const int sign = d < 0.0 ? -1 : +1;
        if (sign != prev_sign && i != 0) ++crossings;
        prev_sign = sign;
    }
    return crossings;
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty series");
    if (sorted.size() == 1) return sorted[0];
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted[sorted.size() - 1];
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace washdet::kern
