#include <doctest.h>

#include <cmath>

#include "ergodiff/errors.hpp"
#include "ergodiff/nonparam.hpp"
#include "ergodiff/quadrature.hpp"
#include "ergodiff/rng.hpp"

using namespace ergodiff;

namespace {

std::shared_ptr<const InvariantLaw> ou_law() {
    static auto law = std::make_shared<const InvariantLaw>(build_law(make_ou_family().model_at(1.0)));
    return law;
}

/// Long-run-variance oracle for the OU process: 2 int_0^inf cov(F(X_0), F(X_t)) dt,
/// from the Gaussian autocovariances (Isserlis), integrated numerically.
double ou_long_run_variance_oracle(double gamma, int moment_power) {
    const double v = 0.5 / gamma;
    RealFn cov;
    switch (moment_power) {
        case 1: cov = [=](double t) { return v * std::exp(-gamma * t); }; break;
        case 2:
            cov = [=](double t) {
                const double r = std::exp(-gamma * t);
                return 2.0 * v * v * r * r;
            };
            break;
        case 4:
            cov = [=](double t) {
                const double r2 = std::exp(-2.0 * gamma * t);
                return (72.0 * r2 + 24.0 * r2 * r2) * v * v * v * v;
            };
            break;
        default: throw std::runtime_error("unsupported moment");
    }
    QuadratureOptions qo;
    qo.abs_tol = 1e-13;
    qo.rel_tol = 1e-13;
    return 2.0 * integrate(cov, 0.0, 80.0 / gamma, qo);
}

} // namespace

TEST_CASE("empirical moment of a constant path is F(c)") {
    Path p;
    p.dt = 0.1;
    p.values.assign(11, 2.0);
    CHECK(empirical_moment(p, make_moment_function("x2")) == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("bound avar matches the long-run-variance oracle") {
    // Closed forms behind the oracle: 1/gamma^2 for x, 1/(2 gamma^3) for x2,
    // 84 v^4 / gamma for x4.
    const auto law = ou_law();
    const NonparamBound bx = build_bound(law, make_moment_function("x"));
    CHECK(ou_long_run_variance_oracle(1.0, 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(bx.avar() == doctest::Approx(1.0).epsilon(1e-6));

    const NonparamBound bx2 = build_bound(law, make_moment_function("x2"));
    CHECK(ou_long_run_variance_oracle(1.0, 2) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(bx2.avar() == doctest::Approx(0.5).epsilon(1e-6));

    const NonparamBound bx4 = build_bound(law, make_moment_function("x4"));
    CHECK(bx4.avar() == doctest::Approx(ou_long_run_variance_oracle(1.0, 4)).epsilon(1e-6));

    CHECK(bx2.info() * bx2.avar() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("M vanishes at both domain edges") {
    const NonparamBound b = build_bound(ou_law(), make_moment_function("x2"));
    CHECK(std::abs(b.M(b.law().domain().lo)) < 1e-8);
    CHECK(std::abs(b.M(b.law().domain().hi)) < 1e-8);
}

TEST_CASE("Q is 2M/(sigma f) pointwise") {
    const NonparamBound b = build_bound(ou_law(), make_moment_function("x2"));
    RngStream rng(4);
    for (int i = 0; i < 20; ++i) {
        const double x = -4.0 + 8.0 * rng.uniform01();
        const double direct = 2.0 * b.M(x) / (1.0 * b.law().density(x));
        CHECK(b.Q(x) == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("closed-form check: Q = -x for the OU x2 bound") {
    const NonparamBound b = build_bound(ou_law(), make_moment_function("x2"));
    for (double x : {-3.0, -1.0, -0.25, 0.5, 2.0, 4.0})
        CHECK(b.Q(x) == doctest::Approx(-x).epsilon(1e-8));
    // H = -x^2/2 up to the anchor at zero.
    CHECK(b.H(2.0) == doctest::Approx(-2.0).epsilon(1e-8));
    CHECK(b.H(0.0) == 0.0);
}

TEST_CASE("constant F is flagged degenerate, not an error") {
    const NonparamBound b = build_bound(ou_law(), constant_field(3.0, "three"));
    CHECK(b.degenerate());
    CHECK(b.avar() == 0.0);
    CHECK(std::isinf(b.info()));
    CHECK(b.M(1.0) == 0.0);
}

TEST_CASE("adding a constant to F shifts theta and nothing else") {
    const auto law = ou_law();
    const NonparamBound base = build_bound(law, make_moment_function("x2"));
    ScalarField shifted{[](double x) { return x * x + 7.0; }, {8.0, 2.0}, Smoothness::CInf,
                        "x2+7", {}};
    const NonparamBound moved = build_bound(law, shifted);
    CHECK(moved.theta() == doctest::Approx(base.theta() + 7.0).epsilon(1e-10));
    CHECK(moved.avar() == doctest::Approx(base.avar()).epsilon(1e-10));
    for (double x : {-2.0, 0.3, 1.7}) {
        CHECK(moved.M(x) == doctest::Approx(base.M(x)).epsilon(1e-9));
        CHECK(moved.Q(x) == doctest::Approx(base.Q(x)).epsilon(1e-9));
        CHECK(moved.H(x) == doctest::Approx(base.H(x)).epsilon(1e-9));
    }
}

TEST_CASE("moment-condition diagnostics are finite and reported") {
    const NonparamBound b = build_bound(ou_law(), make_moment_function("x2"));
    CHECK(std::isfinite(b.moment_H_p4));
    CHECK(std::isfinite(b.moment_Q_p4));
    CHECK(std::isfinite(b.moment_H_p6));
    CHECK(std::isfinite(b.moment_Q_p6));
    CHECK(b.moment_H_p4 > 0.0);
}

TEST_CASE("Ito decomposition residual: small, exact for constants, shift-invariant") {
    const DiffusionModel model = make_ou_family().model_at(1.0);
    const auto law = ou_law();
    const NonparamBound b = build_bound(law, make_moment_function("x2"));

    // The residual carries an irreducible quadratic-variation fluctuation of
    // order sqrt(dt/2) per path on top of the O(dt sqrt(T)) bias; at
    // dt = 0.005 the seed-averaged magnitude sits near 0.044.
    double acc = 0.0;
    const int seeds = 20;
    for (int r = 0; r < seeds; ++r) {
        SimConfig cfg;
        cfg.dt = 0.005;
        cfg.T = 50.0;
        cfg.seed = RngStream::substream_seed(1234, r);
        const Path p = simulate_path(model, cfg, law.get());
        acc += ito_decomposition_check(p, model, b);
    }
    CHECK(acc / seeds < 0.08);

    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 20.0;
    cfg.seed = 5;
    const Path p = simulate_path(model, cfg, law.get());

    const NonparamBound bc = build_bound(law, constant_field(2.0, "two"));
    CHECK(ito_decomposition_check(p, model, bc) == 0.0);

    ScalarField shifted{[](double x) { return x * x + 3.0; }, {4.0, 2.0}, Smoothness::CInf,
                        "x2+3", {}};
    const NonparamBound bs = build_bound(law, shifted);
    const double r1 = ito_decomposition_check(p, model, b);
    const double r2 = ito_decomposition_check(p, model, bs);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-8));
}

TEST_CASE("empirical distribution function at 0 is near one half") {
    const DiffusionModel model = make_ou_family().model_at(1.0);
    const auto law = ou_law();
    const ScalarField ind = make_moment_function("indicator(0)");
    const NonparamBound b = build_bound(law, ind);
    CHECK(b.theta() == doctest::Approx(0.5).epsilon(1e-8));

    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.T = 100.0;
    cfg.seed = 321;
    const Path p = simulate_path(model, cfg, law.get());
    const double est = empirical_moment(p, ind);
    CHECK(std::abs(est - 0.5) < 3.0 * std::sqrt(b.avar() / 100.0));
}
