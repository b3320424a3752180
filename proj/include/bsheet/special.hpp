#pragma once

#include <bsheet/error.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

namespace bsheet {

struct QuadratureConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_subdivisions = 4000;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ConfigError("quadrature: tolerances must be positive");
        if (max_subdivisions < 1) throw ConfigError("quadrature: max_subdivisions must be >= 1");
    }
};

struct RootConfig {
    double lo = 0.0;
    double hi = 1.0;
    double tol = 1e-12;
    int max_iter = 200;

    void validate() const {
        if (!(lo < hi)) throw ConfigError("root: bracket must satisfy lo < hi");
        if (!(tol > 0.0)) throw ConfigError("root: tol must be positive");
        if (max_iter < 1) throw ConfigError("root: max_iter must be >= 1");
    }
};

/// Exponential integral E1(x) = int_x^inf e^{-s}/s ds for x > 0.
/// Power series up to x = 1, Lentz continued fraction above.
inline double exp_integral_e1(double x) {
    if (!(x > 0.0)) throw DomainError("E1 is defined for x > 0 only");
    if (std::isinf(x)) return 0.0;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (x <= 1.0) {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
        double sum = 0.0;
        double power_over_factorial = 1.0;
        for (int k = 1; k < 200; ++k) {
            power_over_factorial *= -x / k;
            const double term = -power_over_factorial / k;
            sum += term;
            if (std::abs(term) < eps * 0.25 * std::abs(sum)) break;
        }
        return -std::numbers::egamma - std::log(x) + sum;
    }
    constexpr double tiny = std::numeric_limits<double>::min() / eps;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return h * std::exp(-x);
}

namespace detail {

struct KronrodResult {
    double value;
    double error;
};

// 15-point Gauss-Kronrod rule with its embedded 7-point Gauss rule.
template <typename F>
KronrodResult gauss_kronrod_15(const F& f, double a, double b) {
    static constexpr std::array<double, 8> xgk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.0};
    static constexpr std::array<double, 8> wgk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = wgk[7] * fc;
    double gauss = wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * xgk[i];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += wgk[i] * pair;
        if (i % 2 == 1) gauss += wg[i / 2] * pair;
    }
    return {kronrod * half, std::abs((kronrod - gauss) * half)};
}

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

// Globally adaptive bisection on [a, b]; returns the estimate and consumes
// from the shared subdivision budget.
template <typename F>
KronrodResult adapt(const F& f, double a, double b, double abs_tol, double rel_tol, int& budget_left,
                    bool& exhausted) {
    std::priority_queue<Segment> heap;
    const auto first = gauss_kronrod_15(f, a, b);
    heap.push({a, b, first.value, first.error});
    double total = first.value;
    double total_error = first.error;
    while (total_error > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (budget_left <= 0) {
            exhausted = true;
            break;
        }
        const Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval cannot be split further in double precision.
            exhausted = true;
            heap.push(worst);
            break;
        }
        const auto left = gauss_kronrod_15(f, worst.a, mid);
        const auto right = gauss_kronrod_15(f, mid, worst.b);
        heap.push({worst.a, mid, left.value, left.error});
        heap.push({mid, worst.b, right.value, right.error});
        --budget_left;
        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
    }
    return {total, total_error};
}

}  // namespace detail

/// int_lower^inf f(u) du for integrands with eventually monotone decay.
/// The half-line is cut into geometrically growing panels, each integrated
/// adaptively; panels stop once one contributes less than abs_tol / 10.
template <typename F>
double integrate_semi_infinite(const F& f, double lower, const QuadratureConfig& cfg = {}) {
    cfg.validate();
    if (!std::isfinite(lower)) throw DomainError("integrate_semi_infinite: lower limit must be finite");
    int budget_left = cfg.max_subdivisions;
    bool exhausted = false;
    double total = 0.0;
    double width = 1.0;
    double a = lower;
    for (int panel = 0; panel < 1100; ++panel) {
        const double b = a + width;
        const double panel_tol = cfg.abs_tol * std::ldexp(1.0, -(panel + 2));
        const auto piece = detail::adapt(f, a, b, panel_tol, cfg.rel_tol, budget_left, exhausted);
        total += piece.value;
        if (exhausted)
            throw ConvergenceError("integrate_semi_infinite: subdivision budget exhausted", total);
        const bool decaying = std::abs(f(b)) <= std::abs(f(a));
        if (panel >= 2 && decaying && std::abs(piece.value) < cfg.abs_tol / 10.0) return total;
        a = b;
        width *= 2.0;
        if (!std::isfinite(a)) break;
    }
    throw ConvergenceError("integrate_semi_infinite: integrand did not decay", total);
}

/// Root of g on [cfg.lo, cfg.hi] by bisection with secant acceleration.
/// The returned z satisfies |g(z)| <= tol and lies in a final bracket of
/// width <= tol.
template <typename G>
double solve_bracketed(const G& g, const RootConfig& cfg) {
    cfg.validate();
    double lo = cfg.lo;
    double hi = cfg.hi;
    double glo = g(lo);
    double ghi = g(hi);
    if (std::isnan(glo) || std::isnan(ghi)) throw BracketError("root: g is NaN at a bracket end");
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo < 0.0) == (ghi < 0.0)) throw BracketError("root: no sign change on the bracket");

    double best = std::abs(glo) < std::abs(ghi) ? lo : hi;
    double gbest = std::min(std::abs(glo), std::abs(ghi));
    double last_width = hi - lo;
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
        const double width = hi - lo;
        if (width <= cfg.tol && gbest <= cfg.tol) return best;

        double candidate = hi - ghi * (hi - lo) / (ghi - glo);
        // Fall back to bisection when the secant leaves the bracket or the
        // previous step failed to halve it.
        const bool secant_ok = candidate > lo && candidate < hi && width <= 0.5 * last_width;
        if (!secant_ok || iter % 3 == 2) candidate = 0.5 * (lo + hi);
        last_width = width;

        const double gc = g(candidate);
        if (std::isnan(gc)) throw ConvergenceError("root: g returned NaN", best);
        if (std::abs(gc) < gbest) {
            gbest = std::abs(gc);
            best = candidate;
        }
        if (gc == 0.0) return candidate;
        if ((gc < 0.0) == (glo < 0.0)) {
            lo = candidate;
            glo = gc;
        } else {
            hi = candidate;
            ghi = gc;
        }
    }
    if (hi - lo <= cfg.tol && gbest <= cfg.tol) return best;
    throw ConvergenceError("root: iteration limit reached", best);
}

}  // namespace bsheet
