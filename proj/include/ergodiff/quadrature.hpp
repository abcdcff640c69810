#pragma once

#include <functional>
#include <vector>

#include "ergodiff/errors.hpp"

namespace ergodiff {

using RealFn = std::function<double(double)>;

struct QuadratureOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_intervals = 4000;
    std::vector<double> breakpoints; // interior points the integrand is not smooth at
};

/// Adaptive Gauss–Kronrod (7,15) with interval bisection over [a, b].
/// Throws QuadratureFailure if the tolerance is not met within the
/// interval budget.
double integrate(const RealFn& f, double a, double b, const QuadratureOptions& opts = {});

/// Fixed 15-point Gauss–Legendre panel; exact for polynomials up to degree 29.
double gauss15(const RealFn& f, double a, double b);

/// Tabulated running integral x -> int_{grid.front()}^{x} g dv. Values at
/// grid nodes are sums of per-panel Gauss panels; off-node evaluation adds a
/// local panel from the nearest node below, so the tabulation stays exact
/// for smooth integrands.
class CumulativeTable {
public:
    CumulativeTable() = default;
    CumulativeTable(RealFn g, std::vector<double> grid);

    double operator()(double x) const;

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& node_values() const { return cum_; }
    double front() const { return cum_.front(); }
    double back() const { return cum_.back(); }

private:
    RealFn g_;
    std::vector<double> grid_;
    std::vector<double> cum_;
};

} // namespace ergodiff
