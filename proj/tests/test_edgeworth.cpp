#include <doctest.h>

#include <cmath>

#include "ergodiff/edgeworth.hpp"
#include "ergodiff/errors.hpp"
#include "ergodiff/nonparam.hpp"
#include "ergodiff/rng.hpp"

using namespace ergodiff;

namespace {

std::shared_ptr<const InvariantLaw> ou_law() {
    static auto law =
        std::make_shared<const InvariantLaw>(build_law(make_ou_family().model_at(1.0)));
    return law;
}

/// Finite-difference oracle for h_k: (-1)^k phi^(k)(z)/phi(z) via central
/// differences of the normal density.
double hermite_fd(int k, double z, double variance) {
    const double h = 1e-2;
    auto phi = [variance](double t) { return normal_pdf(t, variance); };
    double d;
    switch (k) {
        case 0: d = phi(z); break;
        case 1: d = (phi(z + h) - phi(z - h)) / (2 * h); break;
        case 2: d = (phi(z + h) - 2 * phi(z) + phi(z - h)) / (h * h); break;
        case 3:
            d = (phi(z + 2 * h) - 2 * phi(z + h) + 2 * phi(z - h) - phi(z - 2 * h)) /
                (2 * h * h * h);
            break;
        case 4:
            d = (phi(z + 2 * h) - 4 * phi(z + h) + 6 * phi(z) - 4 * phi(z - h) + phi(z - 2 * h)) /
                (h * h * h * h);
            break;
        default: throw std::runtime_error("bad order");
    }
    return (k % 2 == 0 ? 1.0 : -1.0) * d / phi(z);
}

} // namespace

TEST_CASE("hermite closed forms match the derivative definition") {
    CHECK(hermite(0, 1.7, 2.0) == 1.0);
    CHECK(hermite(3, 0.0, 0.7) == 0.0);
    CHECK(hermite(3, 1.0, 1.0) == doctest::Approx(-2.0).epsilon(1e-14));
    // Central differences with h = 1e-2 carry O(h^2) truncation error.
    for (int k = 0; k <= 4; ++k)
        for (double z : {-1.5, -0.4, 0.9, 2.0})
            for (double s : {0.5, 1.0, 2.5})
                CHECK(hermite(k, z, s) == doctest::Approx(hermite_fd(k, z, s)).epsilon(2e-3));
    CHECK_THROWS_AS(hermite(5, 0.0, 1.0), InvalidConfig);
    CHECK_THROWS_AS(hermite(3, 0.0, -1.0), InvalidConfig);
}

TEST_CASE("bracket of zero is zero") {
    const BracketedFunction z = bracket(ou_law(), constant_field(0.0, "zero"));
    for (double x : {-5.0, -1.0, 0.0, 2.0, 6.0}) {
        CHECK(z.bracket(x) == 0.0);
        CHECK(z.green(x) == 0.0);
    }
}

TEST_CASE("bracket centers its argument") {
    const BracketedFunction k = bracket(ou_law(), make_moment_function("x2"));
    CHECK(k.mean() == doctest::Approx(0.5).epsilon(1e-9));
    // <centered, f> = 0: the running integral dies at the right edge.
    CHECK(std::abs(k.running_integral(ou_law()->domain().hi)) < 1e-9);
}

TEST_CASE("closed forms on OU: [x2 - 1/2] = x and the green function is -x^2/2 + C") {
    const BracketedFunction k = bracket(ou_law(), make_moment_function("x2"));
    for (double x : {-4.0, -1.2, -0.3, 0.9, 3.5})
        CHECK(k.bracket(x) == doctest::Approx(x).epsilon(1e-8));
    // grad G = -[a]/sigma = -x, so G(b) - G(a) = (a^2 - b^2)/2.
    CHECK(k.green(2.0) - k.green(1.0) == doctest::Approx(-1.5).epsilon(1e-7));
}

TEST_CASE("bracket matches -Q from the efficiency bound (keystone)") {
    const auto law = ou_law();
    const ScalarField F = make_moment_function("x4");
    const BracketedFunction k = bracket(law, F);
    const NonparamBound b = build_bound(law, F);
    double sup = 0.0;
    for (double x : law->grid()) sup = std::max(sup, std::abs(k.bracket(x) + b.Q(x)));
    CHECK(sup < 1e-6);
}

TEST_CASE("parity: odd F on a symmetric law gives an even bracket") {
    const BracketedFunction k = bracket(ou_law(), make_moment_function("x"));
    for (double x : {0.5, 1.0, 2.0, 3.5})
        CHECK(k.bracket(x) == doctest::Approx(k.bracket(-x)).epsilon(1e-9));
}

TEST_CASE("variance coefficient equals the nonparametric avar") {
    const auto law = ou_law();
    CHECK(variance_coefficient(law, make_moment_function("x2")) ==
          doctest::Approx(0.5).epsilon(1e-6));
    CHECK(variance_coefficient(law, make_moment_function("x")) ==
          doctest::Approx(1.0).epsilon(1e-6));
    for (const char* name : {"x", "x2", "x4"}) {
        const ScalarField F = make_moment_function(name);
        const double lhs = variance_coefficient(law, F);
        const double rhs = build_bound(law, F).avar();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }
}

TEST_CASE("skewness coefficient: bracket-algebra oracle and parity zero") {
    // Oracle for OU gamma=1, F=x^2 by iterating the closed-form bracket:
    // [q] = 2 v x, [[q]^2 centered] = 8 v^3 x, so c3 = E[8 v^3 x * 2 v x]
    // = 16 v^5 with v = 1/(2 gamma).
    const double v = 0.5;
    const double oracle = 16.0 * std::pow(v, 5);
    CHECK(oracle == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(skewness_coefficient(ou_law(), make_moment_function("x2")) ==
          doctest::Approx(oracle).epsilon(1e-6));

    // Odd F, symmetric law: the integrand is odd, c3 = 0.
    CHECK(std::abs(skewness_coefficient(ou_law(), make_moment_function("x"))) < 1e-8);

    // Constant F: q = 0 identically.
    CHECK(std::abs(skewness_coefficient(ou_law(), constant_field(4.0, "four"))) < 1e-12);
}

TEST_CASE("class-C proxy rejects super-polynomial growth") {
    ScalarField nasty{[](double x) { return std::exp(0.9 * x * x); },
                      {1.0, 4.0},
                      Smoothness::CInf,
                      "exp09x2",
                      {}};
    CHECK_THROWS_AS(bracket(ou_law(), nasty), NotInClassC);
}

TEST_CASE("edgeworth density: zero skew reduces to the normal") {
    const EdgeworthDensity d = EdgeworthDensity::asymptotic(0.5, 0.0, 25.0);
    for (double z : {-2.0, 0.0, 1.3})
        CHECK(d.pdf(z) == doctest::Approx(normal_pdf(z, 0.5)).epsilon(1e-15));
}

TEST_CASE("edgeworth density integrates to one and matches its CDF") {
    const EdgeworthDensity d = EdgeworthDensity::asymptotic(0.5, 0.5, 25.0);
    QuadratureOptions qo;
    qo.abs_tol = 1e-10;
    qo.rel_tol = 1e-10;
    const double total = integrate([&](double z) { return d.pdf(z); }, -12.0, 12.0, qo);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    for (double z : {-1.5, 0.0, 0.7, 2.2}) {
        const double by_quad = integrate([&](double t) { return d.pdf(t); }, -12.0, z, qo);
        CHECK(d.cdf(z) == doctest::Approx(by_quad).epsilon(1e-8));
    }
    // At T = 25 the signed density dips negative beyond ~2.5 sd: the guard
    // must say so, while the bulk stays safe and long horizons recover.
    CHECK(d.correction_bounded(-1.0, 1.0));
    CHECK_FALSE(d.correction_bounded(-4.0, 4.0));
    CHECK(EdgeworthDensity::asymptotic(0.5, 0.5, 40000.0).correction_bounded(-4.0, 4.0));
}

TEST_CASE("asymptotic and empirical-cumulant forms coincide at matched cumulants") {
    const double avar = 0.5, c3 = 0.5, T = 25.0;
    const EdgeworthDensity a = EdgeworthDensity::asymptotic(avar, c3, T);
    const EdgeworthDensity b = EdgeworthDensity::from_cumulants(avar, 3.0 * c3 / std::sqrt(T));
    for (double z : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
        CHECK(a.pdf(z) == doctest::Approx(b.pdf(z)).epsilon(1e-14));
        CHECK(a.cdf(z) == doctest::Approx(b.cdf(z)).epsilon(1e-14));
    }
}

TEST_CASE("k-statistics: normal band, constants, shift invariance, size guard") {
    RngStream rng(654321);
    const int n = 100000;
    std::vector<double> sample(n);
    for (int i = 0; i < n; ++i) sample[i] = rng.normal();
    const Cumulants c = mc_cumulants(sample);
    CHECK(std::abs(c.k1) < 3.0 / std::sqrt(double(n)));
    CHECK(c.k2 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(c.k3) < 3.0 * std::sqrt(6.0 / n));

    std::vector<double> constant(2000, 3.3);
    const Cumulants cc = mc_cumulants(constant);
    CHECK(cc.k2 == 0.0);
    CHECK(cc.k3 == 0.0);

    std::vector<double> shifted = sample;
    for (double& v : shifted) v += 100.0;
    const Cumulants cs = mc_cumulants(shifted);
    CHECK(cs.k2 == doctest::Approx(c.k2).epsilon(1e-9));
    CHECK(std::abs(cs.k3 - c.k3) < 1e-8);

    std::vector<double> tiny(10, 1.0);
    CHECK_THROWS_AS(mc_cumulants(tiny), InsufficientReplicates);
}
