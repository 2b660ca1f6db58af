#pragma once

// Small numeric helpers shared by calibration and the test suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "core.hpp"

namespace touchsim {

inline double mean(const std::vector<double>& v) {
    if (v.empty()) throw InsufficientData("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double q = 0.0;
    for (double x : v) q += (x - m) * (x - m);
    return std::sqrt(q / static_cast<double>(v.size() - 1));
}

inline double standard_error(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
}

inline double binomial_se(double p_hat, std::int64_t n) {
    if (n <= 0) return 0.0;
    return std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) /
                     static_cast<double>(n));
}

// sup_x |F_n(x) - F(x)| against a reference CDF.
inline double ks_statistic_vs_cdf(std::vector<double> sample,
                                  const std::function<double(double)>& cdf) {
    if (sample.empty()) throw InsufficientData("KS on empty sample");
    std::sort(sample.begin(), sample.end());
    const auto n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

// sup_x |F_n(x) - G_m(x)| by merging the two sorted samples.
inline double ks_statistic_two_sample(std::vector<double> a,
                                      std::vector<double> b) {
    if (a.empty() || b.empty()) throw InsufficientData("KS on empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto n = static_cast<double>(a.size());
    const auto m = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n -
                                 static_cast<double>(j) / m));
    }
    return d;
}

// c(alpha) in the large-sample KS rejection rule D > c(alpha) / sqrt(n)
// (one-sample) or D > c(alpha) * sqrt((n+m)/(n m)) (two-sample).
inline double ks_critical_coefficient(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidParams("alpha must lie in (0,1)");
    return std::sqrt(-std::log(alpha / 2.0) / 2.0);
}

inline double ks_two_sample_threshold(double alpha, std::int64_t n,
                                      std::int64_t m) {
    if (n <= 0 || m <= 0) throw InvalidParams("KS sample sizes must be positive");
    return ks_critical_coefficient(alpha) *
           std::sqrt(static_cast<double>(n + m) /
                     (static_cast<double>(n) * static_cast<double>(m)));
}

struct Histogram {
    double lo{0.0};
    double hi{1.0};
    std::vector<std::int64_t> counts{};

    double bin_width() const {
        return (hi - lo) / static_cast<double>(counts.size());
    }
};

// Fixed-range histogram; values outside [lo, hi] land in the edge bins.
inline Histogram histogram(const std::vector<double>& data, double lo,
                           double hi, std::size_t n_bins) {
    if (!(hi > lo) || n_bins == 0) throw InvalidParams("bad histogram range");
    Histogram h{lo, hi, std::vector<std::int64_t>(n_bins, 0)};
    const double w = (hi - lo) / static_cast<double>(n_bins);
    for (double x : data) {
        auto k = static_cast<std::int64_t>(std::floor((x - lo) / w));
        k = std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(n_bins) - 1);
        ++h.counts[static_cast<std::size_t>(k)];
    }
    return h;
}

}  // namespace touchsim
