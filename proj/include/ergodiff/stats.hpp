#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace ergodiff {

/// Kolmogorov-Smirnov distance between a sample and a reference CDF.
inline double ks_distance(std::span<const double> sample,
                          const std::function<double(double)>& cdf) {
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double c = cdf(s[i]);
        d = std::max(d, std::abs((i + 1) / n - c));
        d = std::max(d, std::abs(i / n - c));
    }
    return d;
}

inline double sample_mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_variance(std::span<const double> v) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

/// Weighted least squares of y = a + b u on a handful of points; returns the
/// intercept estimate and its standard error computed from the supplied
/// per-point standard errors.
struct InterceptFit {
    double a = 0.0, b = 0.0, se_a = 0.0;
};

inline InterceptFit wls_intercept(std::span<const double> u, std::span<const double> y,
                                  std::span<const double> se) {
    double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = 1.0 / (se[i] * se[i]);
        s0 += w;
        s1 += w * u[i];
        s2 += w * u[i] * u[i];
        t0 += w * y[i];
        t1 += w * u[i] * y[i];
    }
    const double det = s0 * s2 - s1 * s1;
    InterceptFit fit;
    fit.a = (s2 * t0 - s1 * t1) / det;
    fit.b = (s0 * t1 - s1 * t0) / det;
    fit.se_a = std::sqrt(s2 / det);
    return fit;
}

} // namespace ergodiff
