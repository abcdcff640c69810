#pragma once

#include <vector>

namespace ergodiff {

/// Piecewise-cubic Hermite interpolant. Built either with shape-preserving
/// Fritsch-Butland slopes (pchip, monotone on monotone data) or with
/// caller-supplied node derivatives (hermite, fourth-order accurate).
class CubicInterpolant {
public:
    CubicInterpolant() = default;

    static CubicInterpolant pchip(std::vector<double> xs, std::vector<double> ys);
    static CubicInterpolant hermite(std::vector<double> xs, std::vector<double> ys,
                                    std::vector<double> slopes);

    double operator()(double x) const;
    double derivative(double x) const;

    double x_min() const { return xs_.front(); }
    double x_max() const { return xs_.back(); }
    const std::vector<double>& nodes() const { return xs_; }
    const std::vector<double>& values() const { return ys_; }

    /// True if node values are strictly monotone and every panel of the
    /// interpolant is monotone (sampled check).
    bool strictly_monotone() const;

private:
    std::vector<double> xs_, ys_, ms_;
    std::size_t locate(double x) const;
};

} // namespace ergodiff
