#pragma once

#include <optional>

#include "ergodiff/interp.hpp"
#include "ergodiff/invariant.hpp"
#include "ergodiff/model.hpp"
#include "ergodiff/simulate.hpp"

namespace ergodiff {

struct GammaSolution {
    double gamma = 0.0;
    bool clamped = false; // theta fell outside the attainable range
};

/// Per-(family, F) tabulations: theta(gamma), its derivative, the Fisher
/// information, and the inverse map gamma(theta). theta is tabulated on a
/// 256-node gamma grid (log-spaced when the range is positive) as a cubic
/// Hermite curve with exact node derivatives; the inverse is bisection on
/// that curve, so round-trips are exact to the bisection tolerance.
class ParamContext {
public:
    const ParametricFamily& family() const { return family_; }
    const ScalarField& F() const { return F_; }

    double theta_of(double gamma) const { return theta_curve_(gamma); }
    double theta_dot_of(double gamma) const { return theta_dot_curve_(gamma); }
    double info_of(double gamma) const { return info_curve_(gamma); }

    /// Solve theta(gamma) = theta. Out-of-range values are clamped to the
    /// grid ends (gamma range shrunk by margin 1e-6 |Gamma|) and flagged.
    GammaSolution gamma_of_theta(double theta) const;

    bool non_identifiable() const { return non_identifiable_; }
    double eps_dot() const { return eps_dot_; }   // min |theta_dot| over the grid
    double eps_info() const { return eps_info_; } // min info over the grid
    double gamma_grid_lo() const { return gamma_nodes_.front(); }
    double gamma_grid_hi() const { return gamma_nodes_.back(); }

    friend ParamContext build_param_context(const ParametricFamily& family, const ScalarField& F,
                                            std::size_t nodes);

private:
    ParametricFamily family_;
    ScalarField F_;
    std::vector<double> gamma_nodes_;
    CubicInterpolant theta_curve_, theta_dot_curve_, info_curve_;
    double eps_dot_ = 0.0, eps_info_ = 0.0;
    bool non_identifiable_ = false;
    bool increasing_ = true;
};

ParamContext build_param_context(const ParametricFamily& family, const ScalarField& F,
                                 std::size_t nodes = 256);

/// d theta / d gamma at gamma, evaluated as the covariance form
/// 2 (E[F A] - E[F] E[A]) with A(x) = int_0^x S_dot/sigma^2, and cross-checked
/// against a finite difference of the tabulated theta curve.
double theta_dot(const ParamContext& ctx, double gamma);

/// Fisher information I(gamma) = E[(S_dot/sigma)^2] under the invariant law.
double fisher_info(const ParametricFamily& family, double gamma);

/// log dP_gamma/dP_gamma1 of the observed path: left-point Ito sum for the dX
/// integral minus a trapezoid for the quadratic compensator.
double log_likelihood_ratio(const Path& path, const ParametricFamily& family, double gamma,
                            double gamma1);

struct MleResult {
    double gamma_hat = 0.0;
    bool boundary = false; // maximizer within 1e-4 of the range ends
};

/// Likelihood maximizer: 64-point coarse grid plus golden-section refinement
/// to 1e-8 in gamma. gamma1 defaults to the midpoint of the range.
MleResult mle(const Path& path, const ParametricFamily& family,
              std::optional<double> gamma1 = std::nullopt);

/// Smooth score Delta_T: (1/sqrt(T)) times the trapezoid of
/// (S_dot sigma' sigma - S_dot S - 0.5 S_dot' sigma^2)/sigma^2 along the path.
double smooth_score(const Path& path, const ParametricFamily& family, double gamma);

/// Ito-sum score (1/sqrt(T)) sum S_dot/sigma^2 (dX - S dt); kept as a
/// diagnostic/oracle for the score identity, not used by estimators.
double ito_score(const Path& path, const ParametricFamily& family, double gamma);

/// p(x, gamma) = int_0^x S_dot(gamma, v)/sigma(v)^2 dv.
double score_primitive(const ParametricFamily& family, double gamma, double x);

/// | ito_score - smooth_score - (p(X_T)-p(X_0))/sqrt(T) |, the pathwise
/// discrepancy of the two score representations.
double score_identity_residual(const Path& path, const ParametricFamily& family, double gamma);

struct OneStepResult {
    double theta_star = 0.0; // empirical moment
    double gamma_star = 0.0; // gamma(theta_star)
    double gamma_tilde = 0.0;
    double theta_tilde = 0.0;
    bool clamped = false;
};

/// One-step correction of the empirical moment estimator:
/// gamma_tilde = gamma* + Delta_T(gamma*)/(I(gamma*) sqrt(T)), and the moment
/// version theta_tilde = theta* + theta_dot(gamma*) Delta_T/(I sqrt(T)).
OneStepResult one_step(const Path& path, const ParamContext& ctx);

struct DistFnResult {
    double d_hat = 0.0;   // empirical distribution function at x
    double d_tilde = 0.0; // one-step corrected value
    bool clamped = false;
    bool non_identifiable = false; // dD/dgamma vanishes at this x
};

/// One-step corrected invariant distribution function at x; ctx must be built
/// with F = indicator(x).
DistFnResult one_step_distribution_function(const Path& path, const ParamContext& ctx, double x);

} // namespace ergodiff
