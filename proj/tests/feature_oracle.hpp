#pragma once

// Direct-definition oracle for the 12 window features, written from the
// textbook formulas. Test-side code only: independent of the kernel and
// feature-extraction paths it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "washdet/features.hpp"

namespace oracle {

inline double quantile(std::vector<double> sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = p * static_cast<double>(n - 1);
    const double lo_idx = std::floor(pos);
    const double hi_idx = std::ceil(pos);
    const double lo = sorted[static_cast<std::size_t>(lo_idx)];
    const double hi = sorted[static_cast<std::size_t>(hi_idx)];
    return lo + (pos - lo_idx) * (hi - lo);
}

struct Block {
    double v[washdet::feat::kFeatureCount];
};

inline Block features(const std::vector<double>& xs) {
    using washdet::feat::Feature;
    const auto n = static_cast<double>(xs.size());
    long double sum = 0.0L;
    for (const double x : xs) sum += x;
    const double mean = static_cast<double>(sum / static_cast<long double>(xs.size()));

    long double s2 = 0.0L, s3 = 0.0L, s4 = 0.0L;
    for (const double x : xs) {
        const long double d = static_cast<long double>(x) - mean;
        s2 += d * d;
        s3 += d * d * d;
        s4 += d * d * d * d;
    }
    const double variance = static_cast<double>(s2) / n;

    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());

    int prev = +1;
    std::size_t crossings = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - mean;
        int sign = prev;
        if (d != 0.0) sign = d < 0.0 ? -1 : +1;
        if (i > 0 && sign != prev) ++crossings;
        prev = sign;
    }

    const bool constant = sorted.front() == sorted.back();

    Block o{};
    o.v[static_cast<int>(Feature::mean)] = constant ? sorted.front() : mean;
    o.v[static_cast<int>(Feature::std_dev)] =
        constant ? 0.0 : std::sqrt(variance);
    o.v[static_cast<int>(Feature::min)] = sorted.front();
    o.v[static_cast<int>(Feature::max)] = sorted.back();
    o.v[static_cast<int>(Feature::slope)] = xs.back() - xs.front();
    o.v[static_cast<int>(Feature::median)] = quantile(sorted, 0.5);
    o.v[static_cast<int>(Feature::q1)] = quantile(sorted, 0.25);
    o.v[static_cast<int>(Feature::q3)] = quantile(sorted, 0.75);
    o.v[static_cast<int>(Feature::iqr)] =
        o.v[static_cast<int>(Feature::q3)] - o.v[static_cast<int>(Feature::q1)];
    o.v[static_cast<int>(Feature::avg_crossings)] =
        constant ? 0.0 : static_cast<double>(crossings);
    if (constant || variance < 1e-12) {
        o.v[static_cast<int>(Feature::skewness)] = 0.0;
        o.v[static_cast<int>(Feature::kurtosis)] = 0.0;
    } else {
        o.v[static_cast<int>(Feature::skewness)] =
            (static_cast<double>(s3) / n) / std::pow(variance, 1.5);
        o.v[static_cast<int>(Feature::kurtosis)] =
            (static_cast<double>(s4) / n) / (variance * variance) - 3.0;
    }
    return o;
}

}  // namespace oracle
