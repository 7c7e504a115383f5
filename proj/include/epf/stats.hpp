#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace epf {

// Percentile with linear interpolation between order statistics,
// plotting position (k-1)/(n-1). `sorted` must be ascending and non-empty.
inline double percentile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("percentile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    const double r = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(r));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = r - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    return percentile_sorted(values, q);
}

}  // namespace epf
