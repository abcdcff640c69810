#pragma once

#include <memory>
#include <span>

#include "ergodiff/invariant.hpp"

namespace ergodiff {

/// A centered function a - <a,f> with its Green function G_a and the
/// martingale integrand [a] = -sigma grad G_a. Built by bracket(); immutable.
class BracketedFunction {
public:
    double mean() const { return mean_; } // <a, f>
    double centered(double x) const { return a_(x) - mean_; }

    /// [a](x), evaluated through the density identity as -2 R(x)/(sigma f)
    /// with R the running integral of the centered function against f.
    double bracket(double x) const;

    /// G_a(x), tabulated as the running integral of -[a]/sigma from the lower
    /// domain edge (grad G_a = -[a]/sigma).
    double green(double x) const;

    double running_integral(double x) const; // R(x) = int_lo^x (a - mean) f

    const InvariantLaw& law() const { return *law_; }
    ScalarField bracket_field() const;

    /// True when a - <a,f> vanishes in L2(f); all evaluators return 0.
    bool degenerate() const { return degenerate_; }

    friend BracketedFunction bracket(std::shared_ptr<const InvariantLaw> law,
                                     const ScalarField& a);

private:
    std::shared_ptr<const InvariantLaw> law_;
    ScalarField a_;
    double mean_ = 0.0;
    bool degenerate_ = false;
    CumulativeTable af_cum_, f_cum_, green_cum_;
};

/// Center a against the law and build ([a], G_a). Throws NotInClassC when the
/// numeric admissibility proxies fail (growth of a/[a]/G_a on the grid, decay
/// of |a| f, the L1 tail of p * running integral).
BracketedFunction bracket(std::shared_ptr<const InvariantLaw> law, const ScalarField& a);

/// E[[q]^2] with q = F - theta: the leading variance coefficient of the
/// standardized time-average (equals the nonparametric avar).
double variance_coefficient(std::shared_ptr<const InvariantLaw> law, const ScalarField& F);

/// c3 = E[[b][q]] with b = [q]^2 (centered inside the bracket): the skewness
/// coefficient driving the 1/sqrt(T) term of the expansion.
double skewness_coefficient(std::shared_ptr<const InvariantLaw> law, const ScalarField& F);

/// Hermite polynomial h_k(z; Sigma) = (-1)^k phi^-1 d^k/dz^k phi(z; 0, Sigma),
/// closed-form for k = 0..4.
double hermite(int k, double z, double variance);

double normal_pdf(double z, double variance);
double normal_cdf(double z, double variance);

/// Skew-corrected normal density phi(z;0,Sigma)(1 + coef h3(z;Sigma)) with the
/// matching closed-form CDF. Two entry points: the asymptotic-coefficient
/// form (coef = c3/(2 sqrt(T))) and the empirical-cumulant form
/// (coef = k3/6, Sigma = k2). The two coincide when k2 = avar and
/// k3 = 3 c3/sqrt(T).
class EdgeworthDensity {
public:
    static EdgeworthDensity asymptotic(double avar, double c3, double T);
    static EdgeworthDensity from_cumulants(double k2, double k3);

    double pdf(double z) const;
    double cdf(double z) const;
    double variance() const { return variance_; }
    double correction_coef() const { return coef_; }

    /// True when |coef h3| < 1 on [z_lo, z_hi] (density positive there).
    bool correction_bounded(double z_lo, double z_hi) const;

private:
    double variance_ = 1.0;
    double coef_ = 0.0;
};

struct Cumulants {
    double k1 = 0.0, k2 = 0.0, k3 = 0.0;
};

/// Unbiased sample cumulants (k-statistics) of a replicate ensemble.
/// Requires at least 1000 values.
Cumulants mc_cumulants(std::span<const double> values);

} // namespace ergodiff
