#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ead/time_series.hpp"

namespace ead {

/// Match tolerance for the fuzzy subsequence comparison. Same unit as the
/// compared series.
struct Epsilon {
    double value = 0.0;

    explicit Epsilon(double v) : value(v) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("Epsilon: value must be finite and >= 0");
        }
    }
};

/// The data-adaptive tolerance: the smaller of the two population
/// standard deviations.
inline Epsilon adaptive_epsilon(const TimeSeries& x, const TimeSeries& y) {
    return Epsilon(std::min(population_std(x), population_std(y)));
}

/// Fuzzy scalar equality. A zero tolerance degenerates to exact equality
/// so that identical constant series still match.
inline bool fuzzy_match(double a, double b, const Epsilon& eps) {
    if (eps.value == 0.0) return a == b;
    return std::abs(a - b) < eps.value;
}

/// Length of the longest common subsequence of x and y under the fuzzy
/// match rule. Two-row rolling table, O(min(len)) memory.
inline std::size_t lcs_length(const TimeSeries& x, const TimeSeries& y, const Epsilon& eps) {
    if (x.empty() || y.empty()) {
        throw std::invalid_argument("lcs_length: empty series");
    }
    // roll over the shorter series
    const TimeSeries& longer = x.length() >= y.length() ? x : y;
    const TimeSeries& shorter = x.length() >= y.length() ? y : x;
    const std::size_t m = shorter.length();

    std::vector<std::size_t> prev(m + 1, 0);
    std::vector<std::size_t> curr(m + 1, 0);
    for (std::size_t i = 1; i <= longer.length(); ++i) {
        const double a = longer[i - 1];
        for (std::size_t j = 1; j <= m; ++j) {
            if (fuzzy_match(a, shorter[j - 1], eps)) {
                curr[j] = prev[j - 1] + 1;
            } else {
                curr[j] = std::max(curr[j - 1], prev[j]);
            }
        }
        std::swap(prev, curr);
    }
    return prev[m];
}

/// Normalized similarity 2*lcs / (len(x) + len(y)), in [0, 1].
inline double sim(const TimeSeries& x, const TimeSeries& y) {
    const Epsilon eps = adaptive_epsilon(x, y);
    const auto lcs = static_cast<double>(lcs_length(x, y, eps));
    return 2.0 * lcs / static_cast<double>(x.length() + y.length());
}

/// Lower and upper bounds of sim: lcs/max(len) and lcs/min(len).
inline std::pair<double, double> sim_bounds(const TimeSeries& x, const TimeSeries& y) {
    const Epsilon eps = adaptive_epsilon(x, y);
    const auto lcs = static_cast<double>(lcs_length(x, y, eps));
    const auto lmax = static_cast<double>(std::max(x.length(), y.length()));
    const auto lmin = static_cast<double>(std::min(x.length(), y.length()));
    return {lcs / lmax, lcs / lmin};
}

/// The upper bound lcs/min(len); 1 whenever x embeds into y under the
/// tolerance. Less sensitive to length differences than sim, which makes
/// it the preferred dataset metric.
inline double usm(const TimeSeries& x, const TimeSeries& y) {
    const Epsilon eps = adaptive_epsilon(x, y);
    const auto lcs = static_cast<double>(lcs_length(x, y, eps));
    return lcs / static_cast<double>(std::min(x.length(), y.length()));
}

}  // namespace ead
