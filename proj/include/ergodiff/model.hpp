#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ergodiff/scalar_field.hpp"

namespace ergodiff {

/// One-dimensional diffusion dX = S(X) dt + sigma(X) dW with known sigma.
struct DiffusionModel {
    ScalarField drift;
    ScalarField diffusion;
    std::optional<ScalarField> diffusion_prime; // needed by the Milstein scheme
    std::string name;
};

/// Drift family S(gamma, x) on an open parameter interval, with the analytic
/// derivatives the score machinery needs. All slots are author-supplied and
/// validated against finite differences (see consistency_check).
struct ParametricFamily {
    double gamma_lo = 0.0;
    double gamma_hi = 0.0;
    std::function<double(double, double)> S;           // (gamma, x)
    std::function<double(double, double)> S_dot;       // d/dgamma S
    std::function<double(double, double)> S_ddot;      // d2/dgamma2 S
    std::function<double(double, double)> S_dot_prime; // d/dx d/dgamma S
    ScalarField sigma;
    ScalarField sigma_prime;
    std::string name;

    DiffusionModel model_at(double gamma) const;

    /// Max relative finite-difference discrepancy of S_dot, S_dot_prime and
    /// sigma_prime over n random (gamma, x) probes.
    double consistency_check(std::uint64_t seed = 17, int n = 100) const;
};

/// Uniformly discretized trajectory; T = (values.size()-1) * dt exactly.
struct Path {
    double dt = 0.0;
    std::vector<double> values;
    std::uint64_t seed = 0;
    double horizon() const { return dt * static_cast<double>(values.size() - 1); }
    std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
};

/// Ornstein-Uhlenbeck family S(gamma, x) = -gamma x, sigma = 1,
/// Gamma = (0.1, 10).
ParametricFamily make_ou_family();

/// Family with state-dependent sigma so every term of the smooth score is
/// exercised: S(gamma, x) = -gamma x - x^3/(1+x^2),
/// sigma(x) = sqrt(1 + 0.5/(1+x^2)), Gamma = (0.1, 10).
ParametricFamily make_nonlinear_family();

/// Built-in families addressable by name: "ou", "nonlinear".
ParametricFamily make_family(const std::string& name);

} // namespace ergodiff
