#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ead {

/// One physical quantity sampled at a fixed rate. Samples are raw meter
/// readings; the unit depends on the quantity the series was taken from.
struct TimeSeries {
    std::vector<double> samples;
    double sample_rate_hz = 5.0;

    TimeSeries() = default;
    explicit TimeSeries(std::vector<double> s, double rate_hz = 5.0)
        : samples(std::move(s)), sample_rate_hz(rate_hz) {}

    std::size_t length() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double operator[](std::size_t i) const { return samples[i]; }
};

inline bool all_finite(const TimeSeries& ts) {
    for (double v : ts.samples) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

inline double mean(const TimeSeries& ts) {
    if (ts.empty()) throw std::invalid_argument("mean: empty series");
    double sum = 0.0;
    for (double v : ts.samples) sum += v;
    return sum / static_cast<double>(ts.length());
}

/// Population standard deviation (divide by n).
inline double population_std(const TimeSeries& ts) {
    if (ts.length() < 2) {
        throw std::invalid_argument("population_std: need at least 2 samples");
    }
    const double mu = mean(ts);
    double ss = 0.0;
    for (double v : ts.samples) {
        const double d = v - mu;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(ts.length()));
}

/// Zero mean, unit population std. A constant series maps to all zeros.
inline TimeSeries z_normalize(const TimeSeries& ts) {
    const double mu = mean(ts);
    const double sd = population_std(ts);
    TimeSeries out;
    out.sample_rate_hz = ts.sample_rate_hz;
    out.samples.reserve(ts.length());
    for (double v : ts.samples) {
        out.samples.push_back(sd > 0.0 ? (v - mu) / sd : 0.0);
    }
    return out;
}

}  // namespace ead
