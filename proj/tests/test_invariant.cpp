#include <doctest.h>

#include <cmath>

#include "ergodiff/errors.hpp"
#include "ergodiff/invariant.hpp"
#include "ergodiff/stats.hpp"

using namespace ergodiff;

namespace {

DiffusionModel custom_model(std::function<double(double)> drift,
                            std::function<double(double)> sigma, const std::string& name) {
    return {{std::move(drift), {10.0, 3.0}, Smoothness::CInf, name + "-drift", {}},
            {std::move(sigma), {2.0, 0.0}, Smoothness::CInf, name + "-sigma", {}},
            std::nullopt,
            name};
}

const InvariantLaw& ou_law(double gamma = 1.0) {
    static const InvariantLaw law1 = build_law(make_ou_family().model_at(1.0));
    static const InvariantLaw law05 = build_law(make_ou_family().model_at(0.5));
    if (gamma == 1.0) return law1;
    REQUIRE(gamma == 0.5);
    return law05;
}

double ou_density(double x, double gamma) {
    const double v = 0.5 / gamma;
    return std::exp(-x * x / (2 * v)) / std::sqrt(2 * M_PI * v);
}

} // namespace

TEST_CASE("ergodicity probe: OU passes, explosive and null drifts fail") {
    const auto ou = check_ergodicity(make_ou_family().model_at(1.0));
    CHECK(ou.ergodic);
    CHECK(ou.scale_diverges);
    CHECK(ou.g_integrand_decays);

    const auto exploding =
        check_ergodicity(custom_model([](double x) { return x; }, [](double) { return 1.0; },
                                      "explosive"));
    CHECK_FALSE(exploding.ergodic);
    CHECK_FALSE(exploding.g_integrand_decays);

    const auto brownian = check_ergodicity(
        custom_model([](double) { return 0.0; }, [](double) { return 1.0; }, "bm"));
    CHECK_FALSE(brownian.ergodic);
    CHECK_FALSE(brownian.g_integrand_decays);
}

TEST_CASE("non-positive sigma is reported") {
    CHECK_THROWS_AS(check_ergodicity(custom_model([](double x) { return -x; },
                                                  [](double x) { return x; }, "bad-sigma")),
                    NonPositiveSigma);
}

TEST_CASE("normalizer: Gaussian closed forms") {
    CHECK(ou_law(1.0).normalizer() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-9));
    CHECK(ou_law(0.5).normalizer() == doctest::Approx(std::sqrt(2.0 * M_PI)).epsilon(1e-9));
}

TEST_CASE("density ratios depend only on exponent differences (base-point shift)") {
    const InvariantLaw& law = ou_law();
    RngStream rng(99);
    for (int i = 0; i < 20; ++i) {
        const double x = -3.0 + 6.0 * rng.uniform01();
        const double y = -3.0 + 6.0 * rng.uniform01();
        const double lhs = law.density(x) / law.density(y);
        const double rhs = std::exp(law.scale_exponent(x) - law.scale_exponent(y));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    }
}

TEST_CASE("OU law tabulation matches the N(0, 1/(2 gamma)) closed form") {
    const InvariantLaw& law = ou_law();
    CHECK(law.density(0.0) == doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-9));
    CHECK(law.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(std::abs(law.quantile(0.5)) < 1e-8);

    double sup = 0.0;
    for (double x : law.grid()) sup = std::max(sup, std::abs(law.density(x) - ou_density(x, 1.0)));
    CHECK(sup < 1e-8);

    CHECK(law.mass() > 1.0 - 2e-12);
    CHECK(law.mass() < 1.0 + 1e-9);
}

TEST_CASE("pointwise density equals the analytic formula via fresh quadrature") {
    const InvariantLaw& law = ou_law();
    RngStream rng(7);
    QuadratureOptions qo;
    qo.abs_tol = 1e-13;
    qo.rel_tol = 1e-13;
    for (int i = 0; i < 20; ++i) {
        const double x = -4.0 + 8.0 * rng.uniform01();
        const double expnt = integrate([](double v) { return 2.0 * (-v); }, 0.0, x, qo);
        const double direct = std::exp(expnt) / law.normalizer();
        CHECK(law.density(x) == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("density identity G sigma^2 p f = 1 on random points") {
    const InvariantLaw& law = ou_law();
    RngStream rng(11);
    for (int i = 0; i < 20; ++i) {
        const double x = -5.0 + 10.0 * rng.uniform01();
        const double log_lhs = std::log(law.normalizer()) + law.log_scale_integrand(x) +
                               law.log_density(x); // sigma = 1
        CHECK(std::abs(log_lhs) < 1e-9);
    }
}

TEST_CASE("cdf is nondecreasing and quantile round-trips on the grid") {
    const InvariantLaw& law = ou_law();
    double prev = -1.0;
    for (double x : law.grid()) {
        const double c = law.cdf(x);
        CHECK(c >= prev - 1e-15);
        prev = c;
    }
    for (double x : law.grid()) {
        const double c = law.cdf(x);
        if (c < 1e-10 || c > law.mass() - 1e-10) continue; // flat tail spots are clamped
        CHECK(law.quantile(c) == doctest::Approx(x).epsilon(1e-8));
    }
}

TEST_CASE("stationary moments: Gaussian oracle values") {
    const InvariantLaw& law = ou_law();
    CHECK(stationary_moment(law, make_moment_function("x2")) ==
          doctest::Approx(0.5).epsilon(1e-9));
    CHECK(std::abs(stationary_moment(law, make_moment_function("x"))) < 1e-9);
    CHECK(stationary_moment(law, make_moment_function("x4")) ==
          doctest::Approx(0.75).epsilon(1e-9));
    // gamma = 0.5: variance of N(0, 1) is 1.
    CHECK(stationary_moment(ou_law(0.5), make_moment_function("x2")) ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("tail divergence is detected for explosive integrands") {
    ScalarField nasty{[](double x) { return std::exp(x * x); },
                      {1.0, 200.0},
                      Smoothness::CInf,
                      "exp_x2",
                      {}};
    CHECK_THROWS_AS(stationary_moment(ou_law(), nasty), TailDivergence);
}

TEST_CASE("inverse-CDF sampling matches the tabulated law") {
    const InvariantLaw& law = ou_law();
    RngStream rng(20240817);
    const int n = 100000;
    std::vector<double> sample(n);
    for (int i = 0; i < n; ++i) sample[i] = sample_stationary(law, rng);
    const double mean = sample_mean(sample);
    CHECK(std::abs(mean) < 0.01); // 3 sd band: 3 sqrt(0.5/1e5) = 0.0067
    const double ks = ks_distance(sample, [&](double x) { return law.cdf(x); });
    CHECK(ks < 0.01); // KS critical value at n = 1e5 is ~0.0043

    // Extreme quantiles stay clamped inside the domain.
    const double q = law.quantile(1e-9);
    CHECK(std::isfinite(q));
    CHECK(q >= law.domain().lo);
    CHECK(q <= law.domain().hi);
}

TEST_CASE("both families are ergodic across their whole parameter range") {
    for (const auto& fam : {make_ou_family(), make_nonlinear_family()}) {
        for (double g : {0.100001, 0.2, 0.7, 1.0, 3.0, 7.0, 9.99999}) {
            const auto rep = check_ergodicity(fam.model_at(g));
            CHECK(rep.ergodic);
        }
    }
}

TEST_CASE("nonlinear family law integrates to one and passes ergodicity") {
    const DiffusionModel m = make_nonlinear_family().model_at(1.0);
    CHECK(check_ergodicity(m).ergodic);
    const InvariantLaw law = build_law(m);
    CHECK(law.mass() == doctest::Approx(1.0).epsilon(1e-9));
    // Symmetric drift and sigma: the law is symmetric.
    CHECK(law.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-8));
}
