#include "ergodiff/nonparam.hpp"

#include <algorithm>
#include <cmath>

#include "ergodiff/errors.hpp"

namespace ergodiff {

namespace {

constexpr double kUnderflowCut = 1e-280;

std::vector<double> merged_grid(const InvariantLaw& law, const ScalarField& F) {
    std::vector<double> grid = law.grid();
    for (double b : F.breakpoints)
        if (b > law.domain().lo && b < law.domain().hi) grid.push_back(b);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

} // namespace

double NonparamBound::M(double x) const {
    if (degenerate_) return 0.0;
    return Ff_cum_(x) - theta_ * f_cum_(x);
}

double NonparamBound::Q(double x) const {
    if (degenerate_) return 0.0;
    const double m = M(x);
    const double f = law_->density(x);
    const double s = law_->model().diffusion(x);
    if (f > kUnderflowCut) return 2.0 * m / (s * f);
    if (std::abs(m) <= kUnderflowCut) return 0.0;
    // Both tiny: evaluate through logs to dodge the underflow.
    const double lq = std::log(2.0 * std::abs(m)) - std::log(s) - law_->log_density(x);
    return std::copysign(std::exp(lq), m);
}

double NonparamBound::H(double x) const {
    if (degenerate_) return 0.0;
    return q_over_sigma_cum_(x) - h_anchor_;
}

ScalarField NonparamBound::Q_field() const {
    // Self-contained closure (copies of the tables), safe to outlive the bound.
    CumulativeTable Ff = Ff_cum_, f = f_cum_;
    const double theta = theta_;
    const bool degenerate = degenerate_;
    const std::shared_ptr<const InvariantLaw> lptr = law_;
    auto eval = [Ff, f, theta, degenerate, lptr](double x) {
        if (degenerate) return 0.0;
        const double m = Ff(x) - theta * f(x);
        const double fx = lptr->density(x);
        const double s = lptr->model().diffusion(x);
        if (fx > kUnderflowCut) return 2.0 * m / (s * fx);
        if (std::abs(m) <= kUnderflowCut) return 0.0;
        const double lq = std::log(2.0 * std::abs(m)) - std::log(s) - lptr->log_density(x);
        return std::copysign(std::exp(lq), m);
    };
    return {eval,
            {1.0 + std::abs(theta_), F_.growth.power + 2.0},
            Smoothness::C1,
            "Q[" + F_.name + "]",
            {}};
}

double empirical_moment(const Path& path, const ScalarField& F) {
    return time_integral(path, F) / path.horizon();
}

NonparamBound build_bound(std::shared_ptr<const InvariantLaw> law, const ScalarField& F) {
    NonparamBound b;
    b.law_ = std::move(law);
    b.F_ = F;
    const InvariantLaw& L = *b.law_;
    const std::vector<double> grid = merged_grid(L, F);

    // The tables outlive this call: capture the law by shared_ptr and F by
    // value, never by reference.
    {
        const std::shared_ptr<const InvariantLaw> lptr = b.law_;
        const ScalarField Fv = F;
        b.f_cum_ = CumulativeTable([lptr](double x) { return lptr->density(x); }, grid);
        b.Ff_cum_ =
            CumulativeTable([lptr, Fv](double x) { return Fv(x) * lptr->density(x); }, grid);
    }

    const double mass = b.f_cum_.back();
    b.theta_ = b.Ff_cum_.back() / mass;

    // Degenerate-F guard: centered variance indistinguishable from zero.
    double var_F = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        var_F += gauss15(
            [&](double x) {
                const double q = F(x) - b.theta_;
                return q * q * L.density(x);
            },
            grid[i], grid[i + 1]);
    if (var_F <= 1e-12 * (1.0 + b.theta_ * b.theta_)) {
        b.degenerate_ = true;
        b.avar_ = 0.0;
        b.info_ = INFINITY;
        b.q_over_sigma_cum_ = CumulativeTable([](double) { return 0.0; }, grid);
        b.h_anchor_ = 0.0;
        return b;
    }

    // H primitive: cumulative of Q/sigma, anchored at zero.
    {
        CumulativeTable Ff = b.Ff_cum_, f = b.f_cum_;
        const double theta = b.theta_;
        const std::shared_ptr<const InvariantLaw> lptr = b.law_;
        auto q_over_sigma = [Ff, f, theta, lptr](double x) {
            const double m = Ff(x) - theta * f(x);
            const double fx = lptr->density(x);
            const double s = lptr->model().diffusion(x);
            if (fx > kUnderflowCut) return 2.0 * m / (s * s * fx);
            if (std::abs(m) <= kUnderflowCut) return 0.0;
            const double lq =
                std::log(2.0 * std::abs(m)) - 2.0 * std::log(s) - lptr->log_density(x);
            return std::copysign(std::exp(lq), m);
        };
        b.q_over_sigma_cum_ = CumulativeTable(q_over_sigma, grid);
        b.h_anchor_ = b.q_over_sigma_cum_(0.0);
    }

    // avar = E[Q^2] by adaptive quadrature of Q^2 f.
    auto q2f = [&b, &L](double x) {
        const double q = b.Q(x);
        return q * q * L.density(x);
    };
    QuadratureOptions qo;
    qo.abs_tol = 1e-13;
    qo.rel_tol = 1e-10;
    qo.breakpoints = L.seed_breakpoints();
    qo.breakpoints.insert(qo.breakpoints.end(), F.breakpoints.begin(), F.breakpoints.end());
    b.avar_ = integrate(q2f, L.domain().lo, L.domain().hi, qo);
    b.info_ = 1.0 / b.avar_;

    // p* = 4 moment conditions (plus p = 6, reported only). The integrals are
    // finite by construction on the truncated domain; the actual check is that
    // the integrands have died off at the edges.
    auto abs_moment = [&](auto&& g, double p) {
        return integrate([&](double x) { return std::pow(std::abs(g(x)), p) * L.density(x); },
                         L.domain().lo, L.domain().hi, qo);
    };
    auto edge_dead = [&](auto&& g, double p) {
        const double lo = L.domain().lo, hi = L.domain().hi;
        double peak = 0.0;
        for (double x : grid)
            peak = std::max(peak, std::pow(std::abs(g(x)), p) * L.density(x));
        const double e = std::max(std::pow(std::abs(g(lo)), p) * L.density(lo),
                                  std::pow(std::abs(g(hi)), p) * L.density(hi));
        return e <= 1e-8 * peak;
    };
    auto Hf = [&b](double x) { return b.H(x); };
    auto Q2 = [&b](double x) { return 0.5 * b.Q(x); };
    if (!edge_dead(Hf, 4.0)) throw MomentConditionViolated("E|H_S(xi)|^4 diverges");
    if (!edge_dead(Q2, 4.0)) throw MomentConditionViolated("E|M_S/(sigma f_S)|^4 diverges");
    b.moment_H_p4 = abs_moment(Hf, 4.0);
    b.moment_Q_p4 = abs_moment(Q2, 4.0);
    b.moment_H_p6 = abs_moment(Hf, 6.0);
    b.moment_Q_p6 = abs_moment(Q2, 6.0);
    return b;
}

double ito_decomposition_check(const Path& path, const DiffusionModel& model,
                               const NonparamBound& bound) {
    const double T = path.horizon();
    const double sqrt_T = std::sqrt(T);
    const double theta_star = empirical_moment(path, bound.F());
    const double lhs = sqrt_T * (theta_star - bound.theta());
    const double dh = (bound.H(path.values.back()) - bound.H(path.values.front())) / sqrt_T;
    const double ito = ito_integral(path, model, bound.Q_field()) / sqrt_T;
    return std::abs(lhs - (dh - ito));
}

} // namespace ergodiff
