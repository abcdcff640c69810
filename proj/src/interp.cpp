#include "ergodiff/interp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ergodiff {

namespace {

std::vector<double> fritsch_butland_slopes(const std::vector<double>& xs,
                                           const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    std::vector<double> h(n - 1), d(n - 1), m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = xs[i + 1] - xs[i];
        d[i] = (ys[i + 1] - ys[i]) / h[i];
    }
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0.0) != (d[i] > 0.0)) {
            m[i] = 0.0;
        } else {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    return m;
}

} // namespace

CubicInterpolant CubicInterpolant::pchip(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() < 2 || xs.size() != ys.size())
        throw std::invalid_argument("CubicInterpolant: need >= 2 nodes");
    CubicInterpolant c;
    c.ms_ = fritsch_butland_slopes(xs, ys);
    c.xs_ = std::move(xs);
    c.ys_ = std::move(ys);
    return c;
}

CubicInterpolant CubicInterpolant::hermite(std::vector<double> xs, std::vector<double> ys,
                                           std::vector<double> slopes) {
    if (xs.size() < 2 || xs.size() != ys.size() || xs.size() != slopes.size())
        throw std::invalid_argument("CubicInterpolant: inconsistent node arrays");
    CubicInterpolant c;
    c.xs_ = std::move(xs);
    c.ys_ = std::move(ys);
    c.ms_ = std::move(slopes);
    return c;
}

std::size_t CubicInterpolant::locate(double x) const {
    if (x <= xs_.front()) return 0;
    if (x >= xs_.back()) return xs_.size() - 2;
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    return static_cast<std::size_t>(it - xs_.begin()) - 1;
}

double CubicInterpolant::operator()(double x) const {
    const std::size_t i = locate(x);
    const double h = xs_[i + 1] - xs_[i];
    const double t = (x - xs_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * ys_[i] + h10 * h * ms_[i] + h01 * ys_[i + 1] + h11 * h * ms_[i + 1];
}

double CubicInterpolant::derivative(double x) const {
    const std::size_t i = locate(x);
    const double h = xs_[i + 1] - xs_[i];
    const double t = (x - xs_[i]) / h;
    const double t2 = t * t;
    const double d00 = (6 * t2 - 6 * t) / h;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = (-6 * t2 + 6 * t) / h;
    const double d11 = 3 * t2 - 2 * t;
    return d00 * ys_[i] + d10 * ms_[i] + d01 * ys_[i + 1] + d11 * ms_[i + 1];
}

bool CubicInterpolant::strictly_monotone() const {
    const bool increasing = ys_.back() > ys_.front();
    const double sign = increasing ? 1.0 : -1.0;
    for (std::size_t i = 0; i + 1 < ys_.size(); ++i)
        if (sign * (ys_[i + 1] - ys_[i]) <= 0.0) return false;
    for (std::size_t i = 0; i + 1 < xs_.size(); ++i) {
        const double h = xs_[i + 1] - xs_[i];
        for (int k = 0; k <= 8; ++k)
            if (sign * derivative(xs_[i] + h * (k / 8.0) * 0.999999) < 0.0) return false;
    }
    return true;
}

} // namespace ergodiff
