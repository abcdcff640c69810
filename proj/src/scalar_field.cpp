#include "ergodiff/scalar_field.hpp"

#include <cmath>

#include "ergodiff/errors.hpp"

namespace ergodiff {

double GrowthBound::operator()(double x) const {
    return scale * (1.0 + std::pow(std::abs(x), power));
}

bool ScalarField::growth_bound_holds(const std::vector<double>& grid, double slack) const {
    for (double x : grid)
        if (std::abs(eval(x)) > slack * growth(x)) return false;
    return true;
}

ScalarField constant_field(double c, std::string name) {
    return {[c](double) { return c; }, {std::abs(c), 0.0}, Smoothness::CInf, std::move(name), {}};
}

ScalarField make_moment_function(const std::string& name) {
    if (name == "x")
        return {[](double x) { return x; }, {1.0, 1.0}, Smoothness::CInf, "x", {}};
    if (name == "x2")
        return {[](double x) { return x * x; }, {1.0, 2.0}, Smoothness::CInf, "x2", {}};
    if (name == "x4")
        return {[](double x) { return x * x * x * x; }, {1.0, 4.0}, Smoothness::CInf, "x4", {}};
    if (name.rfind("indicator(", 0) == 0 && name.back() == ')') {
        const std::string arg = name.substr(10, name.size() - 11);
        std::size_t pos = 0;
        const double x0 = std::stod(arg, &pos);
        if (pos != arg.size()) throw InvalidConfig("bad indicator threshold: " + arg);
        return {[x0](double x) { return x < x0 ? 1.0 : 0.0; },
                {1.0, 0.0},
                Smoothness::Continuous,
                name,
                {x0}};
    }
    throw InvalidConfig("unknown moment function: " + name);
}

} // namespace ergodiff
