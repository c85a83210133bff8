#pragma once

// Test-only reference implementations. These deliberately avoid the
// library's code paths so they can act as independent oracles.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

inline bool match(double a, double b, double eps) {
    if (eps == 0.0) return a == b;
    return std::abs(a - b) < eps;
}

// Is the index-masked subsequence of `small` embeddable into `big`?
// Greedy leftmost matching is exact for subsequence containment.
inline bool embeds(const std::vector<double>& small, std::uint32_t mask,
                   const std::vector<double>& big, double eps) {
    std::size_t j = 0;
    for (std::size_t k = 0; k < small.size(); ++k) {
        if (!(mask & (1u << k))) continue;
        while (j < big.size() && !match(small[k], big[j], eps)) ++j;
        if (j == big.size()) return false;
        ++j;
    }
    return true;
}

/// Longest common subsequence by exhaustive enumeration of all
/// subsequences of the shorter series. Lengths must stay small (<= ~16).
inline std::size_t exhaustive_lcs(const std::vector<double>& x, const std::vector<double>& y,
                                  double eps) {
    const std::vector<double>& small = x.size() <= y.size() ? x : y;
    const std::vector<double>& big = x.size() <= y.size() ? y : x;
    const auto n = static_cast<std::uint32_t>(small.size());
    std::size_t best = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
        if (size <= best) continue;
        if (embeds(small, mask, big, eps)) best = size;
    }
    return best;
}

/// Population standard deviation computed the long way.
inline double population_std(const std::vector<double>& v) {
    double mu = 0.0;
    for (double s : v) mu += s;
    mu /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double s : v) ss += (s - mu) * (s - mu);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

/// Symmetric relative error. Differences below the central-difference
/// resolution (~1e-10 at step 1e-5 on O(1) objectives) count as
/// agreement: such gradients cannot be resolved any further numerically.
inline double relative_error(double a, double b) {
    const double diff = std::abs(a - b);
    if (diff < 1e-8) return 0.0;
    return diff / std::max(std::abs(a), std::abs(b));
}

/// Central finite difference of f around *param.
template <typename F>
double central_difference(F&& f, double* param, double h = 1e-5) {
    const double saved = *param;
    *param = saved + h;
    const double plus = f();
    *param = saved - h;
    const double minus = f();
    *param = saved;
    return (plus - minus) / (2.0 * h);
}

}  // namespace oracle
