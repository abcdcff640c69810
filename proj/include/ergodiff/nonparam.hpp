#pragma once

#include <memory>

#include "ergodiff/invariant.hpp"
#include "ergodiff/simulate.hpp"

namespace ergodiff {

/// Efficiency machinery of the time-average estimator for a moment function
/// F: the running centered integral M, the influence function Q = 2M/(sigma f),
/// its primitive H, and the variance bound avar = E[Q^2] with info = 1/avar.
///
/// Immutable after build_bound; all evaluators are thread-safe.
class NonparamBound {
public:
    double theta() const { return theta_; }
    double info() const { return info_; }
    double avar() const { return avar_; }
    bool degenerate() const { return degenerate_; } // F is a.s. constant under the law

    double M(double x) const;
    double Q(double x) const;
    double H(double x) const;

    ScalarField Q_field() const;

    const InvariantLaw& law() const { return *law_; }
    const ScalarField& F() const { return F_; }

    // Reported (not enforced) absolute-moment diagnostics E|H|^p, E|Q/2|^p.
    double moment_H_p4 = 0.0, moment_Q_p4 = 0.0;
    double moment_H_p6 = 0.0, moment_Q_p6 = 0.0;

    friend NonparamBound build_bound(std::shared_ptr<const InvariantLaw> law,
                                     const ScalarField& F);

private:
    std::shared_ptr<const InvariantLaw> law_;
    ScalarField F_;
    double theta_ = 0.0, info_ = 0.0, avar_ = 0.0;
    bool degenerate_ = false;
    CumulativeTable Ff_cum_, f_cum_, q_over_sigma_cum_;
    double h_anchor_ = 0.0; // cumulative value at x = 0
};

/// Time-average estimator (1/T) int_0^T F(X_t) dt.
double empirical_moment(const Path& path, const ScalarField& F);

/// Build the bound objects for (law, F). Throws MomentConditionViolated when
/// the p* = 4 moment integrals fail to converge on the truncation domain.
NonparamBound build_bound(std::shared_ptr<const InvariantLaw> law, const ScalarField& F);

/// | sqrt(T)(theta* - theta) - [ (H(X_T)-H(X_0))/sqrt(T) - (1/sqrt(T)) Ito(Q) ] |
/// on a path generated under `model`. Small up to discretization error.
double ito_decomposition_check(const Path& path, const DiffusionModel& model,
                               const NonparamBound& bound);

} // namespace ergodiff
