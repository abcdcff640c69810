#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ergodiff {

struct QuadratureFailure : std::runtime_error {
    explicit QuadratureFailure(const std::string& what) : std::runtime_error(what) {}
};

struct NonPositiveSigma : std::runtime_error {
    explicit NonPositiveSigma(double x)
        : std::runtime_error("diffusion coefficient is non-positive at x = " + std::to_string(x)),
          where(x) {}
    double where;
};

struct OverflowInExponent : std::runtime_error {
    explicit OverflowInExponent(const std::string& what) : std::runtime_error(what) {}
};

struct TailDivergence : std::runtime_error {
    explicit TailDivergence(const std::string& what) : std::runtime_error(what) {}
};

struct MomentConditionViolated : std::runtime_error {
    explicit MomentConditionViolated(const std::string& which)
        : std::runtime_error("moment condition violated: " + which), condition(which) {}
    std::string condition;
};

struct NotInClassC : std::runtime_error {
    explicit NotInClassC(const std::string& which)
        : std::runtime_error("function is not in the admissible class: " + which), condition(which) {}
    std::string condition;
};

struct DerivativeMismatch : std::runtime_error {
    explicit DerivativeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct BlowUp : std::runtime_error {
    BlowUp(std::size_t step, double value)
        : std::runtime_error("trajectory blew up at step " + std::to_string(step) +
                             " (|X| = " + std::to_string(value) + ")"),
          step_index(step), state(value) {}
    std::size_t step_index;
    double state;
};

struct InsufficientReplicates : std::runtime_error {
    explicit InsufficientReplicates(std::size_t n)
        : std::runtime_error("need at least 1000 replicate values, got " + std::to_string(n)) {}
};

struct InvalidConfig : std::runtime_error {
    explicit InvalidConfig(const std::string& what) : std::runtime_error(what) {}
};

struct IOFailure : std::runtime_error {
    explicit IOFailure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ergodiff
