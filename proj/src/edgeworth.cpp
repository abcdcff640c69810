#include "ergodiff/edgeworth.hpp"

#include <algorithm>
#include <cmath>

#include "ergodiff/errors.hpp"

namespace ergodiff {

namespace {

constexpr double kUnderflowCut = 1e-280;

std::vector<double> merged_grid(const InvariantLaw& law, const ScalarField& a) {
    std::vector<double> grid = law.grid();
    for (double b : a.breakpoints)
        if (b > law.domain().lo && b < law.domain().hi) grid.push_back(b);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

/// Polynomial-growth proxy: the scaled magnitude |v|/(1+|x|^k) on the outer
/// 10% of the grid must not exceed 10x its maximum over the inner 80%.
bool polynomial_growth_ok(const std::vector<double>& grid,
                          const std::function<double(double)>& v, double power) {
    const double lo = grid.front(), hi = grid.back();
    const double inner_lo = lo + 0.1 * (hi - lo), inner_hi = hi - 0.1 * (hi - lo);
    double inner_max = 0.0, outer_max = 0.0;
    for (double x : grid) {
        const double r = std::abs(v(x)) / (1.0 + std::pow(std::abs(x), power));
        if (x >= inner_lo && x <= inner_hi)
            inner_max = std::max(inner_max, r);
        else
            outer_max = std::max(outer_max, r);
    }
    return outer_max <= 10.0 * inner_max + 1e-300;
}

} // namespace

double BracketedFunction::running_integral(double x) const {
    if (degenerate_) return 0.0;
    return af_cum_(x) - mean_ * f_cum_(x);
}

double BracketedFunction::bracket(double x) const {
    if (degenerate_) return 0.0;
    const double r = running_integral(x);
    const double f = law_->density(x);
    const double s = law_->model().diffusion(x);
    if (f > kUnderflowCut) return -2.0 * r / (s * f);
    if (std::abs(r) <= kUnderflowCut) return 0.0;
    const double lv = std::log(2.0 * std::abs(r)) - std::log(s) - law_->log_density(x);
    return -std::copysign(std::exp(lv), r);
}

double BracketedFunction::green(double x) const {
    return degenerate_ ? 0.0 : green_cum_(x);
}

ScalarField BracketedFunction::bracket_field() const {
    if (degenerate_)
        return constant_field(0.0, "[" + a_.name + "]");
    // Self-contained closure, safe to outlive this object.
    CumulativeTable af = af_cum_, f = f_cum_;
    const double mean = mean_;
    const std::shared_ptr<const InvariantLaw> lptr = law_;
    auto eval = [af, f, mean, lptr](double x) {
        const double r = af(x) - mean * f(x);
        const double fx = lptr->density(x);
        const double s = lptr->model().diffusion(x);
        if (fx > kUnderflowCut) return -2.0 * r / (s * fx);
        if (std::abs(r) <= kUnderflowCut) return 0.0;
        const double lv = std::log(2.0 * std::abs(r)) - std::log(s) - lptr->log_density(x);
        return -std::copysign(std::exp(lv), r);
    };
    return {eval,
            {1.0 + std::abs(mean_), a_.growth.power + 2.0},
            Smoothness::C1,
            "[" + a_.name + "]",
            {}};
}

BracketedFunction bracket(std::shared_ptr<const InvariantLaw> law, const ScalarField& a) {
    BracketedFunction b;
    b.law_ = std::move(law);
    b.a_ = a;
    const InvariantLaw& L = *b.law_;
    const std::vector<double> grid = merged_grid(L, a);

    if (!a.growth_bound_holds(grid))
        throw NotInClassC("declared growth bound of " + a.name + " fails on the grid");

    // Tables outlive this call: capture the law by shared_ptr and a by value.
    {
        const std::shared_ptr<const InvariantLaw> lptr = b.law_;
        const ScalarField av = a;
        b.f_cum_ = CumulativeTable([lptr](double x) { return lptr->density(x); }, grid);
        b.af_cum_ =
            CumulativeTable([lptr, av](double x) { return av(x) * lptr->density(x); }, grid);
    }
    b.mean_ = b.af_cum_.back() / b.f_cum_.back();

    // A centered function that is zero in L2(f) has a zero bracket; skip the
    // tabulations, whose pure cancellation noise would otherwise be blown up
    // by the 1/f factor in the tails.
    double var_a = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        var_a += gauss15(
            [&](double x) {
                const double d = a(x) - b.mean_;
                return d * d * L.density(x);
            },
            grid[i], grid[i + 1]);
    if (var_a <= 1e-12 * (1.0 + b.mean_ * b.mean_)) {
        b.degenerate_ = true;
        b.green_cum_ = CumulativeTable([](double) { return 0.0; }, grid);
        return b;
    }

    // |a| f must have died out at the domain edges (integrability of a).
    {
        double peak = 0.0;
        for (double x : grid) peak = std::max(peak, std::abs(a(x)) * L.density(x));
        const double lo = L.domain().lo, hi = L.domain().hi;
        const double edge =
            std::max(std::abs(a(lo)) * L.density(lo), std::abs(a(hi)) * L.density(hi));
        if (edge > 1e-8 * peak) throw NotInClassC("|" + a.name + "| f is not negligible at edges");
    }

    // The L1 condition on p(y) int_-inf^y (a - mean) f: through the density
    // identity the integrand is R/(G sigma^2 f), which stays finite.
    {
        const double G = L.normalizer();
        auto t = [&](double y) {
            const double r = b.af_cum_(y) - b.mean_ * b.f_cum_(y);
            const double s = L.model().diffusion(y);
            const double f = L.density(y);
            if (f > kUnderflowCut) return std::abs(r) / (G * s * s * f);
            if (std::abs(r) <= kUnderflowCut) return 0.0;
            return std::exp(std::log(std::abs(r)) - std::log(G) - 2.0 * std::log(s) -
                            L.log_density(y));
        };
        double peak = 0.0;
        for (double x : grid)
            if (x <= 0.0) peak = std::max(peak, t(x));
        if (t(L.domain().lo) > 1e-6 * peak + 1e-300)
            throw NotInClassC("p * running integral of " + a.name + " is not L1 near -inf");
    }

    // G_a via grad G_a = -[a]/sigma, anchored at the lower edge.
    {
        CumulativeTable af = b.af_cum_, f = b.f_cum_;
        const double mean = b.mean_;
        const std::shared_ptr<const InvariantLaw> lptr = b.law_;
        auto grad = [af, f, mean, lptr](double x) {
            const double r = af(x) - mean * f(x);
            const double s = lptr->model().diffusion(x);
            const double fx = lptr->density(x);
            if (fx > kUnderflowCut) return 2.0 * r / (s * s * fx);
            if (std::abs(r) <= kUnderflowCut) return 0.0;
            const double lv =
                std::log(2.0 * std::abs(r)) - 2.0 * std::log(s) - lptr->log_density(x);
            return std::copysign(std::exp(lv), r);
        };
        b.green_cum_ = CumulativeTable(grad, grid);
    }

    if (!polynomial_growth_ok(grid, [&b](double x) { return b.bracket(x); },
                              a.growth.power + 2.0))
        throw NotInClassC("[" + a.name + "] grows faster than polynomially");
    if (!polynomial_growth_ok(grid, [&b](double x) { return b.green(x); }, a.growth.power + 3.0))
        throw NotInClassC("G_" + a.name + " grows faster than polynomially");
    return b;
}

double variance_coefficient(std::shared_ptr<const InvariantLaw> law, const ScalarField& F) {
    const BracketedFunction k = bracket(law, F);
    const InvariantLaw& L = k.law();
    QuadratureOptions qo;
    qo.abs_tol = 1e-12;
    qo.rel_tol = 1e-8;
    qo.breakpoints = L.seed_breakpoints();
    qo.breakpoints.insert(qo.breakpoints.end(), F.breakpoints.begin(), F.breakpoints.end());
    return integrate(
        [&](double x) {
            const double v = k.bracket(x);
            return v * v * L.density(x);
        },
        L.domain().lo, L.domain().hi, qo);
}

double skewness_coefficient(std::shared_ptr<const InvariantLaw> law, const ScalarField& F) {
    const BracketedFunction k = bracket(law, F);
    ScalarField b_field = k.bracket_field();
    const double power = 2.0 * b_field.growth.power;
    const double scale = 2.0 * b_field.growth.scale * b_field.growth.scale;
    ScalarField k2_field{[k](double x) {
                             const double v = k.bracket(x);
                             return v * v;
                         },
                         {scale, power},
                         Smoothness::C1,
                         "[" + F.name + "]^2",
                         F.breakpoints};
    const BracketedFunction kb = bracket(law, k2_field);
    const InvariantLaw& L = k.law();
    QuadratureOptions qo;
    qo.abs_tol = 1e-12;
    qo.rel_tol = 1e-8;
    qo.breakpoints = L.seed_breakpoints();
    qo.breakpoints.insert(qo.breakpoints.end(), F.breakpoints.begin(), F.breakpoints.end());
    return integrate(
        [&](double x) { return kb.bracket(x) * k.bracket(x) * L.density(x); }, L.domain().lo,
        L.domain().hi, qo);
}

double hermite(int k, double z, double variance) {
    if (variance <= 0.0) throw InvalidConfig("hermite: variance must be positive");
    const double s = variance;
    switch (k) {
        case 0: return 1.0;
        case 1: return z / s;
        case 2: return z * z / (s * s) - 1.0 / s;
        case 3: return z * z * z / (s * s * s) - 3.0 * z / (s * s);
        case 4:
            return z * z * z * z / (s * s * s * s) - 6.0 * z * z / (s * s * s) + 3.0 / (s * s);
        default: throw InvalidConfig("hermite: order must be 0..4");
    }
}

double normal_pdf(double z, double variance) {
    return std::exp(-0.5 * z * z / variance) / std::sqrt(2.0 * M_PI * variance);
}

double normal_cdf(double z, double variance) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0 * variance));
}

EdgeworthDensity EdgeworthDensity::asymptotic(double avar, double c3, double T) {
    if (!(avar > 0.0) || !(T > 0.0))
        throw InvalidConfig("EdgeworthDensity: avar and T must be positive");
    EdgeworthDensity d;
    d.variance_ = avar;
    d.coef_ = c3 / (2.0 * std::sqrt(T));
    return d;
}

EdgeworthDensity EdgeworthDensity::from_cumulants(double k2, double k3) {
    if (!(k2 > 0.0)) throw InvalidConfig("EdgeworthDensity: k2 must be positive");
    EdgeworthDensity d;
    d.variance_ = k2;
    d.coef_ = k3 / 6.0;
    return d;
}

double EdgeworthDensity::pdf(double z) const {
    return normal_pdf(z, variance_) * (1.0 + coef_ * hermite(3, z, variance_));
}

double EdgeworthDensity::cdf(double z) const {
    // int_-inf^z phi h3 = -h2(z) phi(z), so the correction integrates away.
    return normal_cdf(z, variance_) - coef_ * hermite(2, z, variance_) * normal_pdf(z, variance_);
}

bool EdgeworthDensity::correction_bounded(double z_lo, double z_hi) const {
    for (int i = 0; i <= 400; ++i) {
        const double z = z_lo + (z_hi - z_lo) * i / 400.0;
        if (std::abs(coef_ * hermite(3, z, variance_)) >= 1.0) return false;
    }
    return true;
}

Cumulants mc_cumulants(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 1000) throw InsufficientReplicates(n);
    const double dn = static_cast<double>(n);
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    if (*mn == *mx) return {*mn, 0.0, 0.0}; // constant sample: cumulants vanish exactly
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= dn;
    double m2 = 0.0, m3 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    Cumulants c;
    c.k1 = mean;
    c.k2 = m2 / (dn - 1.0);
    c.k3 = dn * m3 / ((dn - 1.0) * (dn - 2.0));
    return c;
}

} // namespace ergodiff
