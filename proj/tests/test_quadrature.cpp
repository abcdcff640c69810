#include <doctest.h>

#include <cmath>

#include "ergodiff/interp.hpp"
#include "ergodiff/quadrature.hpp"

using namespace ergodiff;

TEST_CASE("adaptive quadrature reproduces Gaussian and polynomial integrals") {
    QuadratureOptions qo;
    qo.abs_tol = 1e-12;
    qo.rel_tol = 1e-12;
    const double g = integrate([](double x) { return std::exp(-x * x); }, -12.0, 12.0, qo);
    CHECK(g == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));

    const double p = integrate([](double x) { return 3 * x * x; }, -1.0, 2.0, qo);
    CHECK(p == doctest::Approx(9.0).epsilon(1e-13));

    // Orientation flip.
    const double back = integrate([](double x) { return 3 * x * x; }, 2.0, -1.0, qo);
    CHECK(back == doctest::Approx(-9.0).epsilon(1e-13));
}

TEST_CASE("breakpoints make kinked integrands cheap and exact") {
    QuadratureOptions qo;
    qo.abs_tol = 1e-13;
    qo.rel_tol = 1e-13;
    qo.breakpoints = {0.0};
    const double v = integrate([](double x) { return std::abs(x); }, -1.0, 3.0, qo);
    CHECK(v == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("quadrature failure surfaces instead of returning junk") {
    QuadratureOptions qo;
    qo.abs_tol = 1e-300; // below the roundoff floor: cannot be met
    qo.rel_tol = 1e-300;
    qo.max_intervals = 8;
    CHECK_THROWS_AS(integrate([](double x) { return std::exp(-x * x); }, -3.0, 3.0, qo),
                    QuadratureFailure);
}

TEST_CASE("gauss15 panel is exact for high-degree polynomials") {
    const double v = gauss15([](double x) { return std::pow(x, 13) + x * x; }, -2.0, 2.0);
    CHECK(v == doctest::Approx(2.0 * std::pow(2.0, 3) / 3.0).epsilon(1e-13));
}

TEST_CASE("cumulative table matches direct quadrature off the nodes") {
    std::vector<double> grid;
    for (int i = 0; i <= 64; ++i) grid.push_back(-2.0 + 4.0 * i / 64.0);
    CumulativeTable cum([](double x) { return std::cos(x); }, grid);
    for (double x : {-1.7, -0.3, 0.123456, 1.999}) {
        CHECK(cum(x) == doctest::Approx(std::sin(x) - std::sin(-2.0)).epsilon(1e-13));
    }
    CHECK(cum(grid.front()) == 0.0);
}

TEST_CASE("pchip interpolation is monotone and interpolates knots") {
    std::vector<double> xs, ys;
    for (int i = 0; i <= 20; ++i) {
        xs.push_back(0.1 * i);
        ys.push_back(std::tanh(xs.back() - 1.0));
    }
    auto c = CubicInterpolant::pchip(xs, ys);
    CHECK(c.strictly_monotone());
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(c(xs[i]) == doctest::Approx(ys[i]));
    double prev = c(0.0);
    for (int k = 1; k <= 200; ++k) {
        const double v = c(2.0 * k / 200.0);
        CHECK(v >= prev - 1e-14);
        prev = v;
    }
}

TEST_CASE("hermite interpolation with exact slopes is fourth-order accurate") {
    std::vector<double> xs, ys, ms;
    for (int i = 0; i <= 40; ++i) {
        const double x = 0.05 * i;
        xs.push_back(x);
        ys.push_back(std::exp(-x));
        ms.push_back(-std::exp(-x));
    }
    auto c = CubicInterpolant::hermite(xs, ys, ms);
    double worst = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double x = 2.0 * k / 1000.0;
        worst = std::max(worst, std::abs(c(x) - std::exp(-x)));
    }
    // h = 0.05: error bound h^4 max|f''''|/384 ~ 1.6e-8.
    CHECK(worst < 5e-8);
}
