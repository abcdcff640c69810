#pragma once

#include <memory>
#include <vector>

#include "ergodiff/interp.hpp"
#include "ergodiff/model.hpp"
#include "ergodiff/quadrature.hpp"
#include "ergodiff/rng.hpp"
#include "ergodiff/scalar_field.hpp"

namespace ergodiff {

struct TruncationDomain {
    double lo = -10.0;
    double hi = 10.0;
    double tail_tol = 1e-12;
};

/// Probe values reported by check_ergodicity. V is the scale function
/// int_0^x exp(-2 int_0^y S/sigma^2) dy; the G integrand is
/// sigma^-2 exp(+2 int_0^y S/sigma^2). All magnitudes are carried in logs so
/// strongly confining drifts do not overflow.
struct ErgodicityReport {
    bool ergodic = false;
    bool scale_diverges = false;    // |V(+-probe)| >= 1e3 |V(+-1)|, growing outward
    bool g_integrand_decays = false; // g(+-probe) < 1e-10 g(0)
    double probe_bound = 0.0;
    double log_abs_v_pos = 0.0, log_abs_v_neg = 0.0;   // log|V| at +-probe
    double log_abs_v_pos1 = 0.0, log_abs_v_neg1 = 0.0; // log|V| at +-1
    double log_g_ratio_pos = 0.0, log_g_ratio_neg = 0.0; // log g(+-probe) - log g(0)
};

ErgodicityReport check_ergodicity(const DiffusionModel& model, double probe_bound = 50.0);

struct LawOptions {
    double tail_tol = 1e-12;
    std::size_t min_nodes = 2049;
    double weight_power = 8.0;   // tails certified against (1 + |x|^w) F-weights
    double normalizer_tol = 1e-11;
};

/// Tabulated invariant law of an ergodic diffusion: density, CDF, quantile,
/// the normalizer G and the scale-exponent helpers. Immutable after build and
/// safe to share across threads.
class InvariantLaw {
public:
    const DiffusionModel& model() const { return model_; }
    const TruncationDomain& domain() const { return domain_; }
    const std::vector<double>& grid() const { return grid_; }

    double normalizer() const { return normalizer_; }
    double mass() const { return mass_; } // integral of density over the domain

    double density(double x) const;
    double log_density(double x) const;
    double cdf(double x) const;
    /// Inverse CDF; u is clamped into [cdf(lo), cdf(hi)], so the result is
    /// always inside the truncation domain.
    double quantile(double u) const;

    /// Interior nodes (roughly `count` of them, taken from the tabulation
    /// grid) used to seed adaptive quadratures so that sharply concentrated
    /// densities are never missed by a first coarse panel.
    std::vector<double> seed_breakpoints(std::size_t count = 64) const;

    /// 2 int_0^x S/sigma^2 dv (the exponent of the density formula).
    double scale_exponent(double x) const;
    /// log p(x) with p(x) = exp(-2 int_0^x S/sigma^2 dv); satisfies
    /// G sigma^2 p density = 1.
    double log_scale_integrand(double x) const { return -scale_exponent(x); }

    friend InvariantLaw build_law(const DiffusionModel& model, const LawOptions& opts);

private:
    DiffusionModel model_;
    TruncationDomain domain_;
    std::vector<double> grid_;
    CumulativeTable exponent_;  // cumulative of 2 S/sigma^2 from domain.lo
    double exponent_at_zero_ = 0.0;
    double shift_ = 0.0;        // max exponent over the grid (overflow guard)
    double normalizer_ = 0.0;   // true G
    double log_g_shifted_ = 0.0;
    CumulativeTable cdf_;
    double mass_ = 0.0;
    CubicInterpolant quantile_;
};

InvariantLaw build_law(const DiffusionModel& model, const LawOptions& opts = {});

/// The normalizing constant G of the invariant density (adaptive quadrature,
/// tolerance 1e-10).
double normalizer(const DiffusionModel& model);

/// E_f[F] by quadrature of F * density over the truncation domain
/// (tolerance 1e-9). Throws TailDivergence when the declared growth of F
/// outruns the density decay at the domain edges.
double stationary_moment(const InvariantLaw& law, const ScalarField& F);

/// Inverse-CDF draw from the tabulated law.
double sample_stationary(const InvariantLaw& law, RngStream& rng);

} // namespace ergodiff
