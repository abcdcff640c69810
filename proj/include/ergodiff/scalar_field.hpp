#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace ergodiff {

enum class Smoothness { Continuous, C1, CInf };

/// Declared envelope |f(x)| <= scale * (1 + |x|^power).
struct GrowthBound {
    double scale = 1.0;
    double power = 0.0;
    double operator()(double x) const;
};

/// An evaluable real function of one real variable with metadata used by the
/// quadrature layer (growth envelope, smoothness, discontinuity points).
struct ScalarField {
    std::function<double(double)> eval;
    GrowthBound growth;
    Smoothness smoothness = Smoothness::CInf;
    std::string name;
    std::vector<double> breakpoints; // jump locations (adaptive panels split here)

    double operator()(double x) const { return eval(x); }

    /// True if the declared growth bound holds on the given grid.
    bool growth_bound_holds(const std::vector<double>& grid, double slack = 1.0 + 1e-12) const;
};

ScalarField constant_field(double c, std::string name = "const");

/// Built-in moment functions addressable by name: "x", "x2", "x4",
/// "indicator(x0)". Throws InvalidConfig for unknown names.
ScalarField make_moment_function(const std::string& name);

} // namespace ergodiff
