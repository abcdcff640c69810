#include "ergodiff/model.hpp"

#include <cmath>

#include "ergodiff/errors.hpp"
#include "ergodiff/rng.hpp"

namespace ergodiff {

DiffusionModel DiffusionModel_from(const ParametricFamily& fam, double gamma) {
    const auto S = fam.S;
    ScalarField drift{[S, gamma](double x) { return S(gamma, x); },
                      {(std::abs(gamma) + 1.0) * 2.0, 3.0},
                      Smoothness::CInf,
                      fam.name + "-drift",
                      {}};
    return {drift, fam.sigma, fam.sigma_prime, fam.name + "@" + std::to_string(gamma)};
}

DiffusionModel ParametricFamily::model_at(double gamma) const {
    if (!(gamma > gamma_lo && gamma < gamma_hi))
        throw InvalidConfig("gamma outside the family range");
    return DiffusionModel_from(*this, gamma);
}

double ParametricFamily::consistency_check(std::uint64_t seed, int n) const {
    RngStream rng(seed);
    double worst = 0.0;
    const double h_g = 1e-5 * (gamma_hi - gamma_lo);
    for (int i = 0; i < n; ++i) {
        const double margin = 0.02 * (gamma_hi - gamma_lo);
        const double g = gamma_lo + margin + (gamma_hi - gamma_lo - 2 * margin) * rng.uniform01();
        const double x = -5.0 + 10.0 * rng.uniform01();
        const double h_x = 1e-6 * (1.0 + std::abs(x));

        const double fd_dot = (S(g + h_g, x) - S(g - h_g, x)) / (2 * h_g);
        worst = std::max(worst, std::abs(fd_dot - S_dot(g, x)) / (1.0 + std::abs(S_dot(g, x))));

        const double fd_dot_prime = (S_dot(g, x + h_x) - S_dot(g, x - h_x)) / (2 * h_x);
        worst = std::max(worst, std::abs(fd_dot_prime - S_dot_prime(g, x)) /
                                    (1.0 + std::abs(S_dot_prime(g, x))));

        const double fd_ddot = (S_dot(g + h_g, x) - S_dot(g - h_g, x)) / (2 * h_g);
        worst = std::max(worst, std::abs(fd_ddot - S_ddot(g, x)) / (1.0 + std::abs(S_ddot(g, x))));

        const double fd_sigma_prime = (sigma(x + h_x) - sigma(x - h_x)) / (2 * h_x);
        worst = std::max(worst, std::abs(fd_sigma_prime - sigma_prime(x)) /
                                    (1.0 + std::abs(sigma_prime(x))));
    }
    return worst;
}

ParametricFamily make_ou_family() {
    ParametricFamily fam;
    fam.gamma_lo = 0.1;
    fam.gamma_hi = 10.0;
    fam.S = [](double gamma, double x) { return -gamma * x; };
    fam.S_dot = [](double, double x) { return -x; };
    fam.S_ddot = [](double, double) { return 0.0; };
    fam.S_dot_prime = [](double, double) { return -1.0; };
    fam.sigma = constant_field(1.0, "sigma");
    fam.sigma_prime = constant_field(0.0, "sigma_prime");
    fam.name = "ou";
    return fam;
}

ParametricFamily make_nonlinear_family() {
    ParametricFamily fam;
    fam.gamma_lo = 0.1;
    fam.gamma_hi = 10.0;
    fam.S = [](double gamma, double x) { return -gamma * x - x * x * x / (1.0 + x * x); };
    fam.S_dot = [](double, double x) { return -x; };
    fam.S_ddot = [](double, double) { return 0.0; };
    fam.S_dot_prime = [](double, double) { return -1.0; };
    fam.sigma = {[](double x) { return std::sqrt(1.0 + 0.5 / (1.0 + x * x)); },
                 {1.3, 0.0},
                 Smoothness::CInf,
                 "sigma",
                 {}};
    // sigma' = (sigma^2)' / (2 sigma), (sigma^2)' = -x / (1+x^2)^2
    fam.sigma_prime = {[](double x) {
                           const double one_px2 = 1.0 + x * x;
                           const double s = std::sqrt(1.0 + 0.5 / one_px2);
                           return -x / (one_px2 * one_px2) / (2.0 * s);
                       },
                       {0.5, 0.0},
                       Smoothness::CInf,
                       "sigma_prime",
                       {}};
    fam.name = "nonlinear";
    return fam;
}

ParametricFamily make_family(const std::string& name) {
    if (name == "ou") return make_ou_family();
    if (name == "nonlinear") return make_nonlinear_family();
    throw InvalidConfig("unknown family: " + name);
}

} // namespace ergodiff
