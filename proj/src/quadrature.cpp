#include "ergodiff/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace ergodiff {

namespace {

// Gauss-Kronrod (7,15) nodes and weights on [-1,1] (QUADPACK constants).
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

// Gauss-Legendre 15-point nodes and weights on [-1,1].
constexpr double kXgl[8] = {
    0.0,               0.201194093997435, 0.394151347077563, 0.570972172608539,
    0.724417731360170, 0.848206583410427, 0.937273392400706, 0.987992518020485};
constexpr double kWgl[8] = {
    0.202578241925561, 0.198431485327112, 0.186161000015562, 0.166269205816994,
    0.139570677926154, 0.107159220467172, 0.070366047488108, 0.030753241996117};

struct PanelResult {
    double kronrod;
    double error;
};

PanelResult gauss_kronrod(const RealFn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double result_g = fc * kWg[3];
    double result_k = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const double fsum = f(c - dx) + f(c + dx);
        result_k += kWgk[j] * fsum;
        if (j % 2 == 1) result_g += kWg[j / 2] * fsum;
    }
    result_g *= h;
    result_k *= h;
    // QUADPACK-style error damping of |K15 - G7|.
    const double raw = std::abs(result_k - result_g);
    const double err = raw > 0.0 ? raw * std::min(1.0, std::pow(200.0 * raw / std::max(raw, 1e-300), 1.5))
                                 : 0.0;
    return {result_k, std::max(err, raw)};
}

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

} // namespace

double gauss15(const RealFn& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double acc = kWgl[0] * f(c);
    for (int j = 1; j < 8; ++j) {
        const double dx = h * kXgl[j];
        acc += kWgl[j] * (f(c - dx) + f(c + dx));
    }
    return acc * h;
}

double integrate(const RealFn& f, double a, double b, const QuadratureOptions& opts) {
    if (a == b) return 0.0;
    double sign = 1.0;
    double lo = a, hi = b;
    if (lo > hi) {
        std::swap(lo, hi);
        sign = -1.0;
    }

    std::vector<double> cuts{lo};
    for (double p : opts.breakpoints)
        if (p > lo && p < hi) cuts.push_back(p);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());

    std::priority_queue<Interval> heap;
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto r = gauss_kronrod(f, cuts[i], cuts[i + 1]);
        heap.push({cuts[i], cuts[i + 1], r.kronrod, r.error});
        total += r.kronrod;
        total_err += r.error;
    }

    int n = static_cast<int>(heap.size());
    while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
        if (n >= opts.max_intervals)
            throw QuadratureFailure("adaptive quadrature: interval budget exhausted (error " +
                                    std::to_string(total_err) + ")");
        Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b)
            throw QuadratureFailure("adaptive quadrature: interval underflow");
        auto left = gauss_kronrod(f, worst.a, mid);
        auto right = gauss_kronrod(f, mid, worst.b);
        total += left.kronrod + right.kronrod - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.kronrod, left.error});
        heap.push({mid, worst.b, right.kronrod, right.error});
        ++n;
    }
    if (!std::isfinite(total))
        throw QuadratureFailure("adaptive quadrature: non-finite result");
    return sign * total;
}

CumulativeTable::CumulativeTable(RealFn g, std::vector<double> grid)
    : g_(std::move(g)), grid_(std::move(grid)) {
    cum_.resize(grid_.size());
    cum_[0] = 0.0;
    for (std::size_t i = 0; i + 1 < grid_.size(); ++i)
        cum_[i + 1] = cum_[i] + gauss15(g_, grid_[i], grid_[i + 1]);
}

double CumulativeTable::operator()(double x) const {
    if (x <= grid_.front()) return cum_.front();
    if (x >= grid_.back()) return cum_.back();
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin()) - 1;
    if (x == grid_[i]) return cum_[i];
    return cum_[i] + gauss15(g_, grid_[i], x);
}

} // namespace ergodiff
