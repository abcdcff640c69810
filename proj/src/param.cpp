#include "ergodiff/param.hpp"

#include <algorithm>
#include <cmath>

#include "ergodiff/errors.hpp"
#include "ergodiff/nonparam.hpp"
#include "ergodiff/quadrature.hpp"

namespace ergodiff {

namespace {

struct NodeValues {
    double theta, theta_dot, info;
};

/// theta, theta_dot and I at one gamma, all from the same freshly built law.
NodeValues node_values(const ParametricFamily& family, const ScalarField& F, double gamma) {
    const InvariantLaw law = build_law(family.model_at(gamma));
    NodeValues out{};
    out.theta = stationary_moment(law, F);

    const auto S_dot = family.S_dot;
    const auto sig = family.sigma.eval;
    CumulativeTable a_cum([S_dot, sig, gamma](double v) {
                              const double s = sig(v);
                              return S_dot(gamma, v) / (s * s);
                          },
                          law.grid());
    const double a0 = a_cum(0.0);

    QuadratureOptions qo;
    qo.abs_tol = 1e-10;
    qo.rel_tol = 1e-10;
    qo.breakpoints = law.seed_breakpoints();
    qo.breakpoints.insert(qo.breakpoints.end(), F.breakpoints.begin(), F.breakpoints.end());
    const double lo = law.domain().lo, hi = law.domain().hi;
    const double e_fa = integrate(
        [&](double x) { return F(x) * (a_cum(x) - a0) * law.density(x); }, lo, hi, qo);
    const double e_a =
        integrate([&](double x) { return (a_cum(x) - a0) * law.density(x); }, lo, hi, qo);
    out.theta_dot = 2.0 * (e_fa - out.theta * e_a);

    out.info = integrate(
        [&](double x) {
            const double r = S_dot(gamma, x) / sig(x);
            return r * r * law.density(x);
        },
        lo, hi, qo);
    return out;
}

double golden_section_max(const std::function<double(double)>& g, double a, double b,
                          double tol) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double g1 = g(x1), g2 = g(x2);
    while (b - a > tol) {
        if (g1 < g2) {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + phi * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - phi * (b - a);
            g1 = g(x1);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

ParamContext build_param_context(const ParametricFamily& family, const ScalarField& F,
                                 std::size_t nodes) {
    if (nodes < 8) throw InvalidConfig("need at least 8 gamma nodes");
    ParamContext ctx;
    ctx.family_ = family;
    ctx.F_ = F;

    const double width = family.gamma_hi - family.gamma_lo;
    const double margin = 1e-6 * width;
    const double g_lo = family.gamma_lo + margin, g_hi = family.gamma_hi - margin;
    ctx.gamma_nodes_.resize(nodes);
    if (g_lo > 0.0) {
        const double llo = std::log(g_lo), lhi = std::log(g_hi);
        for (std::size_t i = 0; i < nodes; ++i)
            ctx.gamma_nodes_[i] = std::exp(llo + (lhi - llo) * i / double(nodes - 1));
    } else {
        for (std::size_t i = 0; i < nodes; ++i)
            ctx.gamma_nodes_[i] = g_lo + (g_hi - g_lo) * i / double(nodes - 1);
    }
    ctx.gamma_nodes_.front() = g_lo;
    ctx.gamma_nodes_.back() = g_hi;

    std::vector<double> theta(nodes), tdot(nodes), info(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const NodeValues nv = node_values(family, F, ctx.gamma_nodes_[i]);
        theta[i] = nv.theta;
        tdot[i] = nv.theta_dot;
        info[i] = nv.info;
    }

    double max_dot = 0.0;
    ctx.eps_dot_ = INFINITY;
    ctx.eps_info_ = INFINITY;
    for (std::size_t i = 0; i < nodes; ++i) {
        ctx.eps_dot_ = std::min(ctx.eps_dot_, std::abs(tdot[i]));
        max_dot = std::max(max_dot, std::abs(tdot[i]));
        ctx.eps_info_ = std::min(ctx.eps_info_, info[i]);
    }
    ctx.non_identifiable_ = ctx.eps_dot_ < 1e-6 * std::max(1.0, max_dot);
    if (ctx.eps_info_ <= 0.0) throw InvalidConfig("Fisher information vanishes on the grid");

    ctx.theta_curve_ = CubicInterpolant::hermite(ctx.gamma_nodes_, theta, tdot);
    ctx.theta_dot_curve_ = CubicInterpolant::pchip(ctx.gamma_nodes_, tdot);
    ctx.info_curve_ = CubicInterpolant::pchip(ctx.gamma_nodes_, info);

    if (!ctx.non_identifiable_) {
        ctx.increasing_ = theta.back() > theta.front();
        if (!ctx.theta_curve_.strictly_monotone())
            throw InvalidConfig("theta(gamma) tabulation is not strictly monotone");
    }
    return ctx;
}

GammaSolution ParamContext::gamma_of_theta(double theta) const {
    if (non_identifiable_)
        throw InvalidConfig("theta(gamma) is flat for this F; gamma is not identifiable");
    const double t_lo = theta_curve_(gamma_nodes_.front());
    const double t_hi = theta_curve_(gamma_nodes_.back());
    const double t_min = std::min(t_lo, t_hi), t_max = std::max(t_lo, t_hi);
    GammaSolution sol;
    if (theta <= t_min || theta >= t_max) {
        sol.clamped = true;
        const bool at_front = increasing_ ? theta <= t_min : theta >= t_max;
        sol.gamma = at_front ? gamma_nodes_.front() : gamma_nodes_.back();
        return sol;
    }
    double a = gamma_nodes_.front(), b = gamma_nodes_.back();
    for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
        const double mid = 0.5 * (a + b);
        const bool below = theta_curve_(mid) < theta;
        if (below == increasing_)
            a = mid;
        else
            b = mid;
    }
    sol.gamma = 0.5 * (a + b);
    return sol;
}

double theta_dot(const ParamContext& ctx, double gamma) {
    const ParametricFamily& fam = ctx.family();
    if (!(gamma > fam.gamma_lo && gamma < fam.gamma_hi))
        throw InvalidConfig("gamma outside the family range");
    const double value = node_values(fam, ctx.F(), gamma).theta_dot;

    const double h = 1e-4;
    if (gamma - h > ctx.gamma_grid_lo() && gamma + h < ctx.gamma_grid_hi()) {
        const double fd = (ctx.theta_of(gamma + h) - ctx.theta_of(gamma - h)) / (2.0 * h);
        if (std::abs(fd - value) > 1e-4 * (1.0 + std::abs(value)))
            throw DerivativeMismatch("theta_dot quadrature " + std::to_string(value) +
                                     " vs finite difference " + std::to_string(fd));
    }
    return value;
}

double fisher_info(const ParametricFamily& family, double gamma) {
    const InvariantLaw law = build_law(family.model_at(gamma));
    const auto S_dot = family.S_dot;
    const auto sig = family.sigma.eval;
    QuadratureOptions qo;
    qo.abs_tol = 1e-10;
    qo.rel_tol = 1e-9;
    qo.breakpoints = law.seed_breakpoints();
    return integrate(
        [&](double x) {
            const double r = S_dot(gamma, x) / sig(x);
            return r * r * law.density(x);
        },
        law.domain().lo, law.domain().hi, qo);
}

double log_likelihood_ratio(const Path& path, const ParametricFamily& family, double gamma,
                            double gamma1) {
    const auto& S = family.S;
    const auto& sig = family.sigma.eval;
    const std::size_t n = path.steps();
    double ito_part = 0.0;
    double quad_part = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double x = path.values[i];
        const double s2 = sig(x) * sig(x);
        const double sa = S(gamma, x), sb = S(gamma1, x);
        const double q = (sa * sa - sb * sb) / s2;
        if (i < n) ito_part += (sa - sb) / s2 * (path.values[i + 1] - x);
        quad_part += (i == 0 || i == n) ? 0.5 * q : q;
    }
    return ito_part - 0.5 * quad_part * path.dt;
}

MleResult mle(const Path& path, const ParametricFamily& family, std::optional<double> gamma1) {
    const double g1 = gamma1.value_or(0.5 * (family.gamma_lo + family.gamma_hi));
    const double margin = 1e-6 * (family.gamma_hi - family.gamma_lo);
    const double lo = family.gamma_lo + margin, hi = family.gamma_hi - margin;
    auto target = [&](double g) { return log_likelihood_ratio(path, family, g, g1); };

    const int coarse = 64;
    int best = 0;
    double best_val = -INFINITY;
    std::vector<double> gs(coarse);
    for (int i = 0; i < coarse; ++i) {
        gs[i] = lo + (hi - lo) * i / double(coarse - 1);
        const double v = target(gs[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double a = gs[std::max(0, best - 1)];
    const double b = gs[std::min(coarse - 1, best + 1)];
    MleResult res;
    res.gamma_hat = golden_section_max(target, a, b, 1e-8);
    res.boundary = res.gamma_hat - family.gamma_lo < 1e-4 || family.gamma_hi - res.gamma_hat < 1e-4;
    return res;
}

double smooth_score(const Path& path, const ParametricFamily& family, double gamma) {
    const auto& S = family.S;
    const auto& S_dot = family.S_dot;
    const auto& S_dot_prime = family.S_dot_prime;
    const auto& sig = family.sigma.eval;
    const auto& sig_prime = family.sigma_prime.eval;
    auto integrand = [&](double x) {
        const double s = sig(x);
        const double sd = S_dot(gamma, x);
        return (sd * sig_prime(x) * s - sd * S(gamma, x) - 0.5 * S_dot_prime(gamma, x) * s * s) /
               (s * s);
    };
    const std::size_t n = path.steps();
    double acc = 0.5 * (integrand(path.values[0]) + integrand(path.values[n]));
    for (std::size_t i = 1; i < n; ++i) acc += integrand(path.values[i]);
    return acc * path.dt / std::sqrt(path.horizon());
}

double ito_score(const Path& path, const ParametricFamily& family, double gamma) {
    const auto& S = family.S;
    const auto& S_dot = family.S_dot;
    const auto& sig = family.sigma.eval;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < path.values.size(); ++i) {
        const double x = path.values[i];
        const double s2 = sig(x) * sig(x);
        acc += S_dot(gamma, x) / s2 * (path.values[i + 1] - x - S(gamma, x) * path.dt);
    }
    return acc / std::sqrt(path.horizon());
}

double score_primitive(const ParametricFamily& family, double gamma, double x) {
    const auto& S_dot = family.S_dot;
    const auto& sig = family.sigma.eval;
    QuadratureOptions qo;
    qo.abs_tol = 1e-11;
    qo.rel_tol = 1e-11;
    return integrate(
        [&](double v) {
            const double s = sig(v);
            return S_dot(gamma, v) / (s * s);
        },
        0.0, x, qo);
}

double score_identity_residual(const Path& path, const ParametricFamily& family, double gamma) {
    const double sqrt_T = std::sqrt(path.horizon());
    const double dp = (score_primitive(family, gamma, path.values.back()) -
                       score_primitive(family, gamma, path.values.front())) /
                      sqrt_T;
    return std::abs(ito_score(path, family, gamma) - smooth_score(path, family, gamma) - dp);
}

OneStepResult one_step(const Path& path, const ParamContext& ctx) {
    OneStepResult res;
    res.theta_star = empirical_moment(path, ctx.F());
    const GammaSolution gs = ctx.gamma_of_theta(res.theta_star);
    res.gamma_star = gs.gamma;
    res.clamped = gs.clamped;
    const double delta = smooth_score(path, ctx.family(), res.gamma_star);
    const double info = ctx.info_of(res.gamma_star);
    const double sqrt_T = std::sqrt(path.horizon());
    res.gamma_tilde = res.gamma_star + delta / (info * sqrt_T);
    res.theta_tilde = res.theta_star + ctx.theta_dot_of(res.gamma_star) * delta / (info * sqrt_T);
    return res;
}

DistFnResult one_step_distribution_function(const Path& path, const ParamContext& ctx, double x) {
    if (ctx.F().breakpoints.size() != 1 || ctx.F().breakpoints[0] != x)
        throw InvalidConfig("context was not built with F = indicator(" + std::to_string(x) + ")");
    DistFnResult res;
    res.d_hat = empirical_moment(path, ctx.F());
    if (ctx.non_identifiable()) {
        res.non_identifiable = true;
        res.d_tilde = res.d_hat; // dD/dgamma = 0: the correction vanishes
        return res;
    }
    const GammaSolution gs = ctx.gamma_of_theta(res.d_hat);
    res.clamped = gs.clamped;
    const double delta = smooth_score(path, ctx.family(), gs.gamma);
    const double info = ctx.info_of(gs.gamma);
    res.d_tilde =
        res.d_hat + ctx.theta_dot_of(gs.gamma) * delta / (info * std::sqrt(path.horizon()));
    return res;
}

} // namespace ergodiff
