// Distributional Monte Carlo checks at reduced scale; the full-scale versions
// live in the acceptance suite. Everything here is deterministic given the
// hard-coded seeds.

#include <doctest.h>

#include <cmath>

#include "ergodiff/edgeworth.hpp"
#include "ergodiff/harness.hpp"
#include "ergodiff/stats.hpp"

using namespace ergodiff;

namespace {

const ParametricFamily& ou() {
    static const ParametricFamily fam = make_ou_family();
    return fam;
}

const InvariantLaw& ou_law() {
    static const InvariantLaw law = build_law(ou().model_at(1.0));
    return law;
}

Path ou_path(double T, double dt, std::uint64_t seed) {
    SimConfig cfg;
    cfg.dt = dt;
    cfg.T = T;
    cfg.seed = seed;
    return simulate_path(ou().model_at(1.0), cfg, &ou_law());
}

} // namespace

TEST_CASE("empirical estimator CLT at reduced scale") {
    StudyConfig cfg;
    cfg.family = "ou";
    cfg.gamma_true = 1.0;
    cfg.F = "x2";
    cfg.T_list = {50.0};
    cfg.dt = 0.01;
    cfg.replicates = 800;
    cfg.master_seed = 1001;
    cfg.estimators = {Estimator::Empirical};
    cfg.threads = 1;
    const StudyResult res = run_study(cfg);
    const auto& col = res.columns.front();
    CHECK(std::abs(col.summary.var - 0.5) < 0.15 * 0.5);
    CHECK(col.summary.ks_normal < 0.08);
    CHECK(std::abs(col.summary.mean) < 3.0 * std::sqrt(0.5 / 800.0) + 0.05);
}

TEST_CASE("smooth score has mean near zero with variance near the information") {
    const int reps = 2000;
    std::vector<double> scores(reps);
    for (int r = 0; r < reps; ++r)
        scores[r] = smooth_score(ou_path(50.0, 0.01, RngStream::substream_seed(77001, r)), ou(),
                                 1.0);
    const double info = 0.5;
    // Mean band 3 sqrt(I/R) with slack for the O(dt sqrt(T)) trapezoid bias.
    CHECK(std::abs(sample_mean(scores)) < 3.0 * std::sqrt(info / reps) + 0.01);
    CHECK(std::abs(sample_variance(scores) - info) < 0.15 * info);
}

TEST_CASE("Kullback-Leibler sign: wrong parameter loses log-likelihood on average") {
    const int reps = 400;
    double acc = 0.0;
    for (int r = 0; r < reps; ++r) {
        const Path p = ou_path(100.0, 0.01, RngStream::substream_seed(31415, r));
        acc += log_likelihood_ratio(p, ou(), 1.2, 1.0);
    }
    CHECK(acc / reps < 0.0);
}

TEST_CASE("MLE variance scales like 1/T") {
    const int reps = 600;
    std::vector<double> g50(reps), g100(reps);
    for (int r = 0; r < reps; ++r) {
        g50[r] = mle(ou_path(50.0, 0.01, RngStream::substream_seed(60001, r)), ou()).gamma_hat;
        g100[r] = mle(ou_path(100.0, 0.01, RngStream::substream_seed(60002, r)), ou()).gamma_hat;
    }
    const double ratio = sample_variance(g100) / sample_variance(g50);
    CHECK(ratio > 0.4);
    CHECK(ratio < 0.6);
}

TEST_CASE("MLE and one-step gamma share their first-order term") {
    static const ParamContext ctx = build_param_context(ou(), make_moment_function("x2"));
    const int reps = 300;
    std::vector<double> mle_vals(reps);
    double mean_abs_diff = 0.0;
    for (int r = 0; r < reps; ++r) {
        const Path p = ou_path(100.0, 0.01, RngStream::substream_seed(50005, r));
        const double ghat = mle(p, ou()).gamma_hat;
        const double gtilde = one_step(p, ctx).gamma_tilde;
        mle_vals[r] = ghat;
        mean_abs_diff += std::abs(ghat - gtilde);
    }
    mean_abs_diff /= reps;
    CHECK(mean_abs_diff < 0.2 * std::sqrt(sample_variance(mle_vals)));
}

TEST_CASE("theta_tilde coincides with theta(gamma_tilde) to first order") {
    // Needs a genuinely nonzero correction, so use F = x^4: for F = x^2 the
    // empirical moment already zeroes the score and the two quantities agree
    // to inversion tolerance.
    static const ParamContext ctx = build_param_context(ou(), make_moment_function("x4"));
    const int reps = 300;
    std::vector<double> mean_gap;
    for (double T : {50.0, 100.0, 200.0}) {
        double acc = 0.0;
        for (int r = 0; r < reps; ++r) {
            const Path p = ou_path(T, 0.01, RngStream::substream_seed(90000 + (int)T, r));
            const OneStepResult os = one_step(p, ctx);
            acc += std::abs(os.theta_tilde - ctx.theta_of(os.gamma_tilde));
        }
        mean_gap.push_back(acc / reps);
    }
    // O(1/T): halving per doubling of T, within loose Monte Carlo bands.
    CHECK(mean_gap[1] / mean_gap[0] > 0.3);
    CHECK(mean_gap[1] / mean_gap[0] < 0.75);
    CHECK(mean_gap[2] / mean_gap[1] > 0.3);
    CHECK(mean_gap[2] / mean_gap[1] < 0.75);
}

TEST_CASE("one-step correction is identically zero in the degenerate x2 case") {
    static const ParamContext ctx = build_param_context(ou(), make_moment_function("x2"));
    for (int r = 0; r < 5; ++r) {
        const Path p = ou_path(50.0, 0.01, RngStream::substream_seed(91000, r));
        const OneStepResult os = one_step(p, ctx);
        // Exact-score fixed point: Delta_T(gamma*) = sqrt(T)(1/2 - gamma* theta*) = 0
        // because gamma* inverts theta* exactly; the correction collapses.
        CHECK(std::abs(os.gamma_tilde - os.gamma_star) < 1e-7);
        CHECK(std::abs(os.theta_tilde - os.theta_star) < 1e-7);
    }
}

TEST_CASE("one-step distribution function does not lose efficiency at x = 0.5") {
    static const ParamContext ctx =
        build_param_context(ou(), make_moment_function("indicator(0.5)"), 96);
    const int reps = 2000;
    std::vector<double> d_hat(reps), d_tilde(reps);
    std::size_t clamped = 0;
    for (int r = 0; r < reps; ++r) {
        const Path p = ou_path(100.0, 0.01, RngStream::substream_seed(70707, r));
        const DistFnResult d = one_step_distribution_function(p, ctx, 0.5);
        d_hat[r] = d.d_hat;
        d_tilde[r] = d.d_tilde;
        if (d.clamped) ++clamped;
    }
    CHECK(clamped < reps / 100);
    CHECK(sample_variance(d_tilde) <= sample_variance(d_hat));
}

TEST_CASE("one-step reduces the x4 variance toward the parametric bound") {
    // Ordering version of the efficiency gap: paired paths make the variance
    // difference a low-noise statistic even at moderate replicate counts.
    StudyConfig cfg;
    cfg.family = "ou";
    cfg.gamma_true = 1.0;
    cfg.F = "x4";
    cfg.T_list = {100.0};
    cfg.dt = 0.01;
    cfg.replicates = 800;
    cfg.master_seed = 606;
    cfg.estimators = {Estimator::Empirical, Estimator::OneStep};
    cfg.threads = 1;
    const StudyResult res = run_study(cfg);
    double var_emp = 0.0, var_one = 0.0;
    for (const auto& c : res.columns) {
        if (c.name == "theta_empirical") var_emp = c.summary.var;
        if (c.name == "theta_one_step") var_one = c.summary.var;
    }
    CHECK(res.avar_param_theta == doctest::Approx(4.5).epsilon(1e-4));
    CHECK(res.avar_nonparam == doctest::Approx(5.25).epsilon(1e-6));
    CHECK(var_one < var_emp);
}

TEST_CASE("study with the MLE estimator fills all columns") {
    StudyConfig cfg;
    cfg.family = "ou";
    cfg.gamma_true = 1.0;
    cfg.F = "x2";
    cfg.T_list = {25.0};
    cfg.dt = 0.01;
    cfg.replicates = 100;
    cfg.master_seed = 505;
    cfg.estimators = {Estimator::Empirical, Estimator::Mle};
    cfg.threads = 1;
    const StudyResult res = run_study(cfg);
    REQUIRE(res.columns.size() == 3); // theta_empirical, theta_mle, gamma_mle
    for (const auto& c : res.columns) {
        CHECK(c.standardized.size() == 100);
        CHECK(std::isfinite(c.summary.var));
        CHECK(c.summary.var > 0.0);
    }
    // gamma_mle is standardized against the gamma truth with variance near
    // 1/I = 2 (loose band at T = 25, R = 100).
    for (const auto& c : res.columns)
        if (c.name == "gamma_mle") CHECK(std::abs(c.summary.var - 2.0) < 1.2);
    const std::string csv = res.replicate_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 100 * 1 * 2);
}

TEST_CASE("empirical third cumulant tracks the quadrature coefficient") {
    // kappa3 of sqrt(T)(theta* - theta) is approximately 3 c3 / sqrt(T); at
    // T = 25 with 20000 replicates the Monte Carlo noise is well below the
    // signal (0.3 vs se ~ 0.009).
    const double c3 = skewness_coefficient(
        std::make_shared<const InvariantLaw>(build_law(ou().model_at(1.0))),
        make_moment_function("x2"));
    StudyConfig cfg;
    cfg.family = "ou";
    cfg.gamma_true = 1.0;
    cfg.F = "x2";
    cfg.T_list = {25.0};
    cfg.dt = 0.01;
    cfg.replicates = 20000;
    cfg.master_seed = 88001;
    cfg.estimators = {Estimator::Empirical};
    cfg.threads = 1;
    const StudyResult res = run_study(cfg);
    const double k3 = res.columns.front().summary.k3;
    const double target = 3.0 * c3 / std::sqrt(25.0);
    CHECK(std::abs(k3 - target) < 0.25 * target);
}
