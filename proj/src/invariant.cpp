#include "ergodiff/invariant.hpp"

#include <algorithm>
#include <cmath>

#include "ergodiff/errors.hpp"

namespace ergodiff {

namespace {

RealFn exponent_integrand(const DiffusionModel& model) {
    const auto S = model.drift.eval;
    const auto sig = model.diffusion.eval;
    return [S, sig](double v) {
        const double s = sig(v);
        if (!(s > 0.0)) throw NonPositiveSigma(v);
        return 2.0 * S(v) / (s * s);
    };
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t nodes) {
    std::vector<double> g(nodes);
    for (std::size_t i = 0; i < nodes; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nodes - 1);
    g.front() = lo;
    g.back() = hi;
    return g;
}

/// log of int exp(e(y)) dy over [a, b] via max-shift on a fixed panel grid.
double log_integral_of_exp(const std::function<double(double)>& e, double a, double b,
                           int panels = 512) {
    const double h = (b - a) / panels;
    std::vector<double> vals(panels + 1);
    double m = -INFINITY;
    for (int i = 0; i <= panels; ++i) {
        vals[i] = e(a + h * i);
        if (!std::isfinite(vals[i]) && vals[i] > 0)
            throw OverflowInExponent("scale exponent overflowed; shrink probe_bound");
        m = std::max(m, vals[i]);
    }
    if (!std::isfinite(m)) return -INFINITY; // integrand underflows everywhere
    double acc = 0.0;
    for (int i = 0; i < panels; ++i)
        acc += 0.5 * (std::exp(vals[i] - m) + std::exp(vals[i + 1] - m)) * h;
    return m + std::log(acc);
}

} // namespace

ErgodicityReport check_ergodicity(const DiffusionModel& model, double probe_bound) {
    if (!(probe_bound > 1.0)) throw InvalidConfig("probe_bound must exceed 1");
    ErgodicityReport rep;
    rep.probe_bound = probe_bound;

    auto integrand = exponent_integrand(model);
    CumulativeTable expnt_cum(integrand, uniform_grid(-probe_bound, probe_bound, 2049));
    const double e0 = expnt_cum(0.0);
    auto expnt = [&](double x) {
        const double e = expnt_cum(x) - e0;
        if (!std::isfinite(e))
            throw OverflowInExponent("scale exponent overflowed; shrink probe_bound");
        return e;
    };

    // V(x) = int_0^x exp(-expnt) dy, carried as log|V|.
    auto log_abs_v = [&](double x) {
        const double a = std::min(0.0, x), b = std::max(0.0, x);
        return log_integral_of_exp([&](double y) { return -expnt(y); }, a, b);
    };
    rep.log_abs_v_pos = log_abs_v(probe_bound);
    rep.log_abs_v_neg = log_abs_v(-probe_bound);
    rep.log_abs_v_pos1 = log_abs_v(1.0);
    rep.log_abs_v_neg1 = log_abs_v(-1.0);
    const double log_abs_v_pos_half = log_abs_v(0.5 * probe_bound);
    const double log_abs_v_neg_half = log_abs_v(-0.5 * probe_bound);

    const double need = std::log(1e3);
    rep.scale_diverges = rep.log_abs_v_pos >= rep.log_abs_v_pos1 + need &&
                         rep.log_abs_v_neg >= rep.log_abs_v_neg1 + need &&
                         rep.log_abs_v_pos > log_abs_v_pos_half &&
                         rep.log_abs_v_neg > log_abs_v_neg_half;

    auto log_g_integrand = [&](double y) {
        const double s = model.diffusion(y);
        if (!(s > 0.0)) throw NonPositiveSigma(y);
        return expnt(y) - 2.0 * std::log(s);
    };
    const double lg0 = log_g_integrand(0.0);
    rep.log_g_ratio_pos = log_g_integrand(probe_bound) - lg0;
    rep.log_g_ratio_neg = log_g_integrand(-probe_bound) - lg0;
    rep.g_integrand_decays =
        rep.log_g_ratio_pos < std::log(1e-10) && rep.log_g_ratio_neg < std::log(1e-10);

    rep.ergodic = rep.scale_diverges && rep.g_integrand_decays;
    return rep;
}

std::vector<double> InvariantLaw::seed_breakpoints(std::size_t count) const {
    std::vector<double> out;
    if (grid_.size() < 3 || count < 1) return out;
    const std::size_t stride = std::max<std::size_t>(1, grid_.size() / count);
    for (std::size_t i = stride; i + 1 < grid_.size(); i += stride) out.push_back(grid_[i]);
    return out;
}

double InvariantLaw::scale_exponent(double x) const {
    return exponent_(x) - exponent_at_zero_;
}

double InvariantLaw::log_density(double x) const {
    const double s = model_.diffusion(x);
    if (!(s > 0.0)) throw NonPositiveSigma(x);
    return exponent_(x) - exponent_at_zero_ - shift_ - 2.0 * std::log(s) - log_g_shifted_;
}

double InvariantLaw::density(double x) const { return std::exp(log_density(x)); }

double InvariantLaw::cdf(double x) const {
    if (x <= domain_.lo) return 0.0;
    if (x >= domain_.hi) return mass_;
    return cdf_(x);
}

double InvariantLaw::quantile(double u) const {
    const double lo = cdf_.front(), hi = mass_;
    u = std::clamp(u, lo, hi);
    return std::clamp(quantile_(u), domain_.lo, domain_.hi);
}

InvariantLaw build_law(const DiffusionModel& model, const LawOptions& opts) {
    InvariantLaw law;
    law.model_ = model;
    law.domain_.tail_tol = opts.tail_tol;

    auto integrand = exponent_integrand(model);

    // Domain search: double [-L, L] until the one-sided extension integrals of
    // (1 + |x|^w) * unnormalized density drop below tail_tol of the interior.
    double L = 10.0;
    const int max_doublings = 9;
    bool certified = false;
    for (int round = 0; round <= max_doublings; ++round) {
        const double ext = 0.5 * L;
        CumulativeTable coarse(integrand, uniform_grid(-L - ext, L + ext, 1025));
        const double e0 = coarse(0.0);
        double shift = -INFINITY;
        for (std::size_t i = 0; i < coarse.grid().size(); ++i) {
            const double x = coarse.grid()[i];
            if (x >= -L && x <= L) shift = std::max(shift, coarse(x) - e0);
        }
        if (!std::isfinite(shift))
            throw OverflowInExponent("scale exponent overflowed during domain search");
        auto weighted = [&](double x) {
            const double s = model.diffusion(x);
            if (!(s > 0.0)) throw NonPositiveSigma(x);
            const double e = coarse(x) - e0 - shift;
            const double w = 1.0 + std::pow(std::abs(x), opts.weight_power);
            return w * std::exp(e) / (s * s);
        };
        double interior = 0.0, tail_lo = 0.0, tail_hi = 0.0;
        const int panels = 256;
        for (int i = 0; i < panels; ++i) {
            const double a = -L + 2.0 * L * i / panels;
            const double b = -L + 2.0 * L * (i + 1) / panels;
            interior += gauss15(weighted, a, b);
        }
        for (int i = 0; i < 64; ++i) {
            tail_lo += gauss15(weighted, -L - ext + ext * i / 64.0, -L - ext + ext * (i + 1) / 64.0);
            tail_hi += gauss15(weighted, L + ext * i / 64.0, L + ext * (i + 1) / 64.0);
        }
        if (std::max(tail_lo, tail_hi) < opts.tail_tol * interior &&
            weighted(L) < opts.tail_tol * interior && weighted(-L) < opts.tail_tol * interior) {
            certified = true;
            break;
        }
        L *= 2.0;
    }
    if (!certified)
        throw TailDivergence("could not certify truncation domain; density tails decay too slowly");
    law.domain_.lo = -L;
    law.domain_.hi = L;

    // Base grid, then curvature-equidistributed refinement of the density.
    std::vector<double> base = uniform_grid(-L, L, 1025);
    CumulativeTable coarse_exp(integrand, base);
    const double ce0 = coarse_exp(0.0);
    double shift0 = -INFINITY;
    std::vector<double> dens_coarse(base.size());
    for (std::size_t i = 0; i < base.size(); ++i)
        shift0 = std::max(shift0, coarse_exp(base[i]) - ce0);
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double s = model.diffusion(base[i]);
        dens_coarse[i] = std::exp(coarse_exp(base[i]) - ce0 - shift0) / (s * s);
    }
    std::vector<double> weight(base.size() - 1, 0.0);
    double wsum = 0.0;
    for (std::size_t i = 0; i + 1 < base.size(); ++i) {
        const double mid = (i + 1 < base.size() - 1)
                               ? std::abs(dens_coarse[i + 1] - 2 * dens_coarse[i] +
                                          (i > 0 ? dens_coarse[i - 1] : dens_coarse[i]))
                               : 0.0;
        weight[i] = std::sqrt(mid) + 1e-12;
        wsum += weight[i];
    }
    const std::size_t extra_total = opts.min_nodes > base.size() ? opts.min_nodes - base.size() : 0;
    std::vector<double> grid;
    grid.reserve(opts.min_nodes + base.size());
    for (std::size_t i = 0; i + 1 < base.size(); ++i) {
        grid.push_back(base[i]);
        const std::size_t extra =
            static_cast<std::size_t>(std::floor(extra_total * weight[i] / wsum));
        for (std::size_t k = 1; k <= extra; ++k)
            grid.push_back(base[i] + (base[i + 1] - base[i]) * k / (extra + 1.0));
    }
    grid.push_back(base.back());
    if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) grid.push_back(0.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    law.grid_ = grid;
    law.exponent_ = CumulativeTable(integrand, grid);
    law.exponent_at_zero_ = law.exponent_(0.0);

    double shift = -INFINITY;
    for (double x : grid) shift = std::max(shift, law.exponent_(x) - law.exponent_at_zero_);
    law.shift_ = shift;

    auto unnorm = [&law, &model](double x) {
        const double s = model.diffusion(x);
        if (!(s > 0.0)) throw NonPositiveSigma(x);
        return std::exp(law.exponent_(x) - law.exponent_at_zero_ - law.shift_) / (s * s);
    };
    QuadratureOptions qo;
    qo.abs_tol = 0.0;
    qo.rel_tol = opts.normalizer_tol;
    // Seed with interior grid nodes so a sharply peaked density cannot slip
    // between the nodes of one big first panel.
    const std::size_t stride = std::max<std::size_t>(1, grid.size() / 64);
    for (std::size_t i = stride; i + 1 < grid.size(); i += stride)
        qo.breakpoints.push_back(grid[i]);
    const double g_shifted = integrate(unnorm, -L, L, qo);
    law.log_g_shifted_ = std::log(g_shifted);
    law.normalizer_ = g_shifted * std::exp(law.shift_);
    if (!std::isfinite(law.normalizer_))
        throw OverflowInExponent("normalizer overflowed after exponent shift");

    // The CDF table needs a self-contained density closure (the law object is
    // returned by value, so capturing `this` would dangle).
    {
        const ScalarField sig = model.diffusion;
        CumulativeTable expnt = law.exponent_;
        const double e0 = law.exponent_at_zero_, sh = law.shift_, lg = law.log_g_shifted_;
        auto dens = [sig, expnt, e0, sh, lg](double x) {
            return std::exp(expnt(x) - e0 - sh - 2.0 * std::log(sig(x)) - lg);
        };
        law.cdf_ = CumulativeTable(dens, grid);
    }
    law.mass_ = law.cdf_.back();

    // Quantile knots: strictly increasing CDF values; ties (flat tail spots)
    // collapse to the midpoint of the tied run.
    const auto& cvals = law.cdf_.node_values();
    std::vector<double> qu, qx;
    std::size_t i = 0;
    while (i < cvals.size()) {
        std::size_t j = i;
        while (j + 1 < cvals.size() && cvals[j + 1] <= cvals[i]) ++j;
        qu.push_back(cvals[i]);
        qx.push_back(j == i ? grid[i] : 0.5 * (grid[i] + grid[j]));
        i = j + 1;
    }
    law.quantile_ = CubicInterpolant::pchip(std::move(qu), std::move(qx));
    return law;
}

double normalizer(const DiffusionModel& model) {
    LawOptions opts;
    return build_law(model, opts).normalizer();
}

double stationary_moment(const InvariantLaw& law, const ScalarField& F) {
    const double lo = law.domain().lo, hi = law.domain().hi;

    // Tail certificate: the density log-slope at the edges must point down
    // fast enough that the declared growth of F cannot outrun it.
    const double h = 1e-4 * (hi - lo);
    const double slope_hi = (law.log_density(hi) - law.log_density(hi - h)) / h;
    const double slope_lo = (law.log_density(lo + h) - law.log_density(lo)) / h;
    const double scale = 1.0 + std::abs(F(0.0));
    auto edge_mass = [&](double x, double slope_out) -> double {
        if (slope_out <= 0.0) return INFINITY; // no decay at the edge
        return F.growth(x) * law.density(x) / slope_out;
    };
    const double tail = std::max(edge_mass(hi, -slope_hi), edge_mass(lo, slope_lo));
    if (!(tail < 1e3 * law.domain().tail_tol * scale))
        throw TailDivergence("integrand " + F.name + " is not negligible at the domain edges");

    QuadratureOptions qo;
    qo.abs_tol = 1e-9;
    qo.rel_tol = 1e-9;
    qo.breakpoints = law.seed_breakpoints();
    qo.breakpoints.insert(qo.breakpoints.end(), F.breakpoints.begin(), F.breakpoints.end());
    return integrate([&](double x) { return F(x) * law.density(x); }, lo, hi, qo);
}

double sample_stationary(const InvariantLaw& law, RngStream& rng) {
    return law.quantile(rng.uniform01());
}

} // namespace ergodiff
