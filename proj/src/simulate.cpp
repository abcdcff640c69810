#include "ergodiff/simulate.hpp"

#include <cmath>
#include <cstdio>

#include "ergodiff/errors.hpp"
#include "ergodiff/rng.hpp"

namespace ergodiff {

Path simulate_path(const DiffusionModel& model, const SimConfig& cfg, const InvariantLaw* law) {
    if (!(cfg.dt > 0.0) || cfg.dt > 0.05)
        throw InvalidConfig("dt must lie in (0, 0.05]");
    if (!(cfg.T > 0.0)) throw InvalidConfig("horizon T must be positive");
    const auto n = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
    if (n < 1) throw InvalidConfig("horizon shorter than one step");
    if (std::abs(cfg.T / cfg.dt - static_cast<double>(n)) > 1e-9 * static_cast<double>(n))
        std::fprintf(stderr, "warning: T = %g is not a multiple of dt = %g; using T = %g\n",
                     cfg.T, cfg.dt, static_cast<double>(n) * cfg.dt);

    RngStream rng(cfg.seed);
    double x;
    if (cfg.fixed_init) {
        x = *cfg.fixed_init;
    } else {
        if (law == nullptr)
            throw InvalidConfig("stationary initialization requires an invariant law");
        x = sample_stationary(*law, rng);
    }

    const double blowup =
        law != nullptr ? 10.0 * std::max(std::abs(law->domain().lo), std::abs(law->domain().hi))
                       : 1e8;

    const auto& S = model.drift.eval;
    const auto& sig = model.diffusion.eval;
    const bool milstein = cfg.scheme == Scheme::Milstein;
    if (milstein && !model.diffusion_prime)
        throw InvalidConfig("Milstein scheme needs the diffusion derivative");
    const auto sig_prime = milstein ? model.diffusion_prime->eval : nullptr;

    Path path;
    path.dt = cfg.dt;
    path.seed = cfg.seed;
    path.values.resize(n + 1);
    path.values[0] = x;
    const double sqrt_dt = std::sqrt(cfg.dt);
    for (std::size_t i = 0; i < n; ++i) {
        const double dw = sqrt_dt * rng.normal();
        const double s = sig(x);
        double next = x + S(x) * cfg.dt + s * dw;
        if (milstein) next += 0.5 * s * sig_prime(x) * (dw * dw - cfg.dt);
        if (!(std::abs(next) < blowup) || !std::isfinite(next)) throw BlowUp(i + 1, next);
        x = next;
        path.values[i + 1] = x;
    }
    return path;
}

double time_integral(const Path& path, const ScalarField& g) {
    if (path.values.empty()) throw InvalidConfig("empty path");
    double acc = 0.0;
    double prev = g(path.values[0]);
    for (std::size_t i = 1; i < path.values.size(); ++i) {
        const double cur = g(path.values[i]);
        acc += 0.5 * (prev + cur);
        prev = cur;
    }
    return acc * path.dt;
}

double ito_integral(const Path& path, const DiffusionModel& model, const ScalarField& g) {
    if (path.values.size() < 2) throw InvalidConfig("path too short");
    const auto& S = model.drift.eval;
    const auto& sig = model.diffusion.eval;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < path.values.size(); ++i) {
        const double xi = path.values[i];
        const double s = sig(xi);
        if (!(s > 0.0)) throw NonPositiveSigma(xi);
        const double dw = (path.values[i + 1] - xi - S(xi) * path.dt) / s;
        acc += g(xi) * dw;
    }
    return acc;
}

double increment_variance_ratio(const Path& path, const DiffusionModel& model) {
    const auto& S = model.drift.eval;
    const auto& sig = model.diffusion.eval;
    const std::size_t n = path.steps();
    if (n < 2) throw InvalidConfig("path too short");
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = path.values[i];
        const double s = sig(xi);
        if (!(s > 0.0)) throw NonPositiveSigma(xi);
        const double dw = (path.values[i + 1] - xi - S(xi) * path.dt) / s;
        sum += dw;
        sum2 += dw * dw;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum2 / static_cast<double>(n) - mean * mean;
    return var / path.dt;
}

} // namespace ergodiff
