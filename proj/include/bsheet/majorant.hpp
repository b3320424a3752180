#pragma once

#include <bsheet/error.hpp>
#include <bsheet/rng.hpp>
#include <bsheet/stats.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace bsheet {

/// Nonnegative function values on a uniform, strictly increasing state grid.
struct GridFunction {
    std::vector<double> ys;
    std::vector<double> values;

    std::size_t size() const noexcept { return ys.size(); }
    double step() const noexcept { return ys.size() > 1 ? (ys.back() - ys.front()) / (ys.size() - 1) : 0.0; }
    double width() const noexcept { return ys.empty() ? 0.0 : ys.back() - ys.front(); }

    void validate() const {
        if (ys.size() != values.size()) throw ConfigError("grid function: ys and values differ in length");
        if (ys.size() < 2) throw ConfigError("grid function needs at least two nodes");
        const double h = step();
        if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid function: ys must be strictly increasing");
        for (std::size_t k = 0; k < ys.size(); ++k) {
            const double expected = ys.front() + h * static_cast<double>(k);
            if (std::abs(ys[k] - expected) > 1e-9 * std::max(1.0, std::abs(expected)) + 1e-9 * h)
                throw ConfigError("grid function: ys must be uniformly spaced");
            if (!std::isfinite(values[k]) || values[k] < 0.0)
                throw ConfigError("grid function: values must be finite and nonnegative");
        }
    }

    /// f sampled at `nodes` uniform points of [lo, hi].
    static GridFunction sample(double lo, double hi, std::size_t nodes, const std::function<double(double)>& f) {
        if (nodes < 2 || !(hi > lo)) throw ConfigError("grid function: need hi > lo and at least two nodes");
        GridFunction g;
        g.ys.resize(nodes);
        g.values.resize(nodes);
        for (std::size_t k = 0; k < nodes; ++k) {
            g.ys[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(nodes - 1);
            g.values[k] = f(g.ys[k]);
        }
        g.validate();
        return g;
    }
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (a.ys != b.ys) throw ConfigError("grid functions live on different grids");
}

/// Variance ladder {0} and 4^{-k} * width^2 for k = 12..0, increasing.
inline std::vector<double> default_variance_ladder(double width) {
    std::vector<double> ladder{0.0};
    for (int k = 12; k >= 0; --k) ladder.push_back(std::ldexp(width * width, -2 * k));
    return ladder;
}

/// Driftless state equation with constant diffusion coefficient sigma.
/// `variance_grid` lists the products t*x searched at each step; empty
/// selects default_variance_ladder of the domain width.
struct SdeConfig {
    double sigma = 1.0;
    std::vector<double> variance_grid;

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("sde: sigma must be positive");
        if (variance_grid.empty()) return;
        if (variance_grid.front() != 0.0) throw ConfigError("sde: variance grid must start at 0");
        for (std::size_t i = 1; i < variance_grid.size(); ++i)
            if (!(variance_grid[i] > variance_grid[i - 1]) || !std::isfinite(variance_grid[i]))
                throw ConfigError("sde: variance grid must be strictly increasing and finite");
    }

    std::vector<double> ladder_for(const GridFunction& g) const {
        return variance_grid.empty() ? default_variance_ladder(g.width()) : variance_grid;
    }
};

/// Least concave majorant on the grid (upper convex hull, monotone chain).
inline GridFunction least_concave_majorant(const GridFunction& g) {
    g.validate();
    const std::size_t n = g.size();
    const auto& v = g.values;
    // Hull in index coordinates; uniform spacing makes this equivalent.
    std::vector<std::size_t> hull;
    hull.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        while (hull.size() >= 2) {
            const std::size_t a = hull[hull.size() - 2];
            const std::size_t b = hull.back();
            // Drop b unless it lies strictly above the chord from a to k.
            const double cross = (v[b] - v[a]) * static_cast<double>(k - a) - (v[k] - v[a]) * static_cast<double>(b - a);
            if (cross > 0.0) break;
            hull.pop_back();
        }
        hull.push_back(k);
    }

    GridFunction out{g.ys, std::vector<double>(n)};
    for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
        const std::size_t i = hull[e];
        const std::size_t j = hull[e + 1];
        for (std::size_t k = i; k < j; ++k)
            out.values[k] = v[i] + (v[j] - v[i]) * static_cast<double>(k - i) / static_cast<double>(j - i);
    }
    out.values[n - 1] = v[n - 1];
    return out;
}

namespace detail {

// Transition operator of the absorbed process over variance s2 (in squared
// index units). A function f is split into the chord L through its end
// values and a remainder r vanishing at both ends; L is preserved and r is
// convolved after odd reflection about both ends (period 2(N-1)), which is
// the killed-Brownian-motion kernel. The result is the dense matrix acting
// on r.
inline std::vector<double> absorbed_kernel_matrix(std::size_t n, double s2) {
    std::vector<double> a(n * n, 0.0);
    const double s = std::sqrt(s2);
    const auto half = static_cast<long>(std::ceil(8.0 * s));
    std::vector<double> w(static_cast<std::size_t>(2 * half + 1));
    double total = 0.0;
    for (long m = -half; m <= half; ++m) {
        const double x = static_cast<double>(m);
        w[static_cast<std::size_t>(m + half)] = std::exp(-0.5 * x * x / s2);
        total += w[static_cast<std::size_t>(m + half)];
    }
    for (double& x : w) x /= total;

    const long period = 2 * static_cast<long>(n - 1);
    for (std::size_t k = 1; k + 1 < n; ++k) {
        for (long m = -half; m <= half; ++m) {
            long idx = (static_cast<long>(k) + m) % period;
            if (idx < 0) idx += period;
            double sign = 1.0;
            if (idx > static_cast<long>(n - 1)) {
                idx = period - idx;
                sign = -1.0;
            }
            a[k * n + static_cast<std::size_t>(idx)] += sign * w[static_cast<std::size_t>(m + half)];
        }
    }
    return a;
}

}  // namespace detail

/// g_0 = g and g_n(y) = max over v of E[g_{n-1}(y + sigma W(v))], W absorbed at
/// the domain ends. Returns g_0..g_{n_max}.
inline std::vector<GridFunction> iterate_gn(const GridFunction& g, const SdeConfig& sde, int n_max) {
    g.validate();
    sde.validate();
    if (n_max < 0) throw ConfigError("iterate_gn: n_max must be >= 0");
    const std::size_t n = g.size();
    const double h = g.step();

    std::vector<std::vector<double>> operators;
    for (double v : sde.ladder_for(g)) {
        if (v == 0.0) continue;
        operators.push_back(detail::absorbed_kernel_matrix(n, sde.sigma * sde.sigma * v / (h * h)));
    }

    std::vector<GridFunction> seq{g};
    seq.reserve(static_cast<std::size_t>(n_max) + 1);
    std::vector<double> rest(n);
    for (int it = 0; it < n_max; ++it) {
        const std::vector<double>& prev = seq.back().values;
        const double left = prev.front();
        const double slope = (prev.back() - prev.front()) / static_cast<double>(n - 1);
        for (std::size_t k = 0; k < n; ++k) rest[k] = prev[k] - (left + slope * static_cast<double>(k));
        rest.front() = 0.0;
        rest.back() = 0.0;

        GridFunction next{g.ys, prev}; // v = 0: the identity
        for (const auto& a : operators) {
            for (std::size_t k = 1; k + 1 < n; ++k) {
                const double* row = a.data() + k * n;
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += row[j] * rest[j];
                const double value = left + slope * static_cast<double>(k) + acc;
                if (value > next.values[k]) next.values[k] = value;
            }
        }
        seq.push_back(std::move(next));
    }
    return seq;
}

/// Nodes where g < ghat - epsilon.
struct ContinuationRegion {
    std::vector<bool> mask;
    double epsilon = 0.0;

    std::size_t count() const noexcept { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)); }
    bool empty() const noexcept { return count() == 0; }
};

inline ContinuationRegion continuation_region(const GridFunction& g, const GridFunction& ghat, double epsilon) {
    require_same_grid(g, ghat);
    if (g.values.size() != ghat.values.size()) throw ConfigError("grid functions differ in length");
    if (!(epsilon >= 0.0)) throw ConfigError("continuation region: epsilon must be >= 0");
    ContinuationRegion region;
    region.epsilon = epsilon;
    region.mask.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) region.mask[k] = g.values[k] < ghat.values[k] - epsilon;
    return region;
}

/// Maximal runs of true nodes, as (first, last) index pairs.
inline std::vector<std::pair<std::size_t, std::size_t>> region_intervals(const ContinuationRegion& region) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t k = 0; k < region.mask.size(); ++k) {
        if (!region.mask[k]) continue;
        if (!out.empty() && out.back().second + 1 == k)
            out.back().second = k;
        else
            out.emplace_back(k, k);
    }
    return out;
}

struct CheckReport {
    bool passed = true;
    std::optional<std::size_t> node; ///< first violating node
    std::string message;
};

/// Capped regions D_N of min(g, N): D_N within D_{N'} for N < N', within D,
/// and within {g < N}.
struct NestedRegionsReport : CheckReport {
    std::vector<ContinuationRegion> regions; ///< one per cap
    ContinuationRegion uncapped;
};

inline NestedRegionsReport nested_regions_check(const GridFunction& g, std::span<const double> caps) {
    g.validate();
    for (std::size_t i = 1; i < caps.size(); ++i)
        if (!(caps[i] > caps[i - 1])) throw ConfigError("nested regions: caps must be increasing");

    NestedRegionsReport report;
    report.uncapped = continuation_region(g, least_concave_majorant(g), 0.0);
    for (double cap : caps) {
        GridFunction capped = g;
        for (double& v : capped.values) v = std::min(v, cap);
        report.regions.push_back(continuation_region(capped, least_concave_majorant(capped), 0.0));
    }

    auto fail = [&](std::size_t k, const std::string& what) {
        if (!report.passed) return;
        report.passed = false;
        report.node = k;
        std::ostringstream os;
        os << what << " at node " << k << " (y = " << g.ys[k] << ")";
        report.message = os.str();
    };
    for (std::size_t c = 0; c < caps.size(); ++c) {
        const auto& mask = report.regions[c].mask;
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!mask[k]) continue;
            if (!report.uncapped.mask[k]) fail(k, "capped region leaves the uncapped region");
            if (!(g.values[k] < caps[c])) fail(k, "capped region meets {g >= N}");
            if (c + 1 < caps.size() && !report.regions[c + 1].mask[k]) fail(k, "capped regions are not nested");
        }
    }
    return report;
}

/// At every interior node ghat equals g or ghat is locally linear, both
/// within `tol` (scaled by the value range).
inline CheckReport trichotomy_check(const GridFunction& g, const GridFunction& ghat, double tol = 1e-12) {
    require_same_grid(g, ghat);
    const auto [lo, hi] = std::minmax_element(ghat.values.begin(), ghat.values.end());
    const double scale = std::max(1.0, *hi - *lo);
    CheckReport report;
    for (std::size_t k = 1; k + 1 < g.size(); ++k) {
        const bool touches = std::abs(ghat.values[k] - g.values[k]) <= tol * scale;
        const double second = ghat.values[k + 1] - 2.0 * ghat.values[k] + ghat.values[k - 1];
        const bool linear = std::abs(second) <= tol * scale;
        if (!touches && !linear) {
            report.passed = false;
            report.node = k;
            std::ostringstream os;
            os << "node " << k << " neither touches g nor is linear (second difference " << second << ")";
            report.message = os.str();
            return report;
        }
    }
    return report;
}

/// Largest |a - b| over nodes at least `margin` (fraction of the width)
/// away from both ends.
inline double interior_gap(const GridFunction& a, const GridFunction& b, double margin = 0.1) {
    require_same_grid(a, b);
    const double lo = a.ys.front() + margin * a.width();
    const double hi = a.ys.back() - margin * a.width();
    double gap = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a.ys[k] >= lo && a.ys[k] <= hi) gap = std::max(gap, std::abs(a.values[k] - b.values[k]));
    return gap;
}

/// Linear interpolation of g at y, clamped to the grid.
inline double interpolate(const GridFunction& g, double y) {
    if (y <= g.ys.front()) return g.values.front();
    if (y >= g.ys.back()) return g.values.back();
    const double pos = (y - g.ys.front()) / g.step();
    const auto k = std::min(static_cast<std::size_t>(pos), g.size() - 2);
    const double frac = pos - static_cast<double>(k);
    return g.values[k] + frac * (g.values[k + 1] - g.values[k]);
}

/// Monte Carlo E[g(X_v)] for X = y0 + sigma W absorbed at the domain ends,
/// simulated in `steps` Gaussian steps with a bridge test for excursions
/// past an end between steps.
inline McEstimate expected_reward_mc(const GridFunction& g, double sigma, double y0, double v, std::size_t n,
                                     std::uint64_t seed, unsigned workers = 0, int steps = 256) {
    g.validate();
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (!(v >= 0.0)) throw ConfigError("variance must be >= 0");
    if (y0 < g.ys.front() || y0 > g.ys.back()) throw DomainError("start state outside the grid");
    if (steps < 1) throw ConfigError("steps must be >= 1");
    const double lo = g.ys.front();
    const double hi = g.ys.back();
    const double step_var = sigma * sigma * v / steps;
    const double step_sd = std::sqrt(step_var);

    auto samples = run_replications<double>(n, workers, [&](std::size_t r) {
        CounterStream stream(seed, r, lane::kAuxiliary);
        double x = y0;
        if (v == 0.0) return interpolate(g, x);
        for (int s = 0; s < steps; ++s) {
            const double next = x + step_sd * stream.next_normal();
            if (next <= lo) return g.values.front();
            if (next >= hi) return g.values.back();
            const double u = stream.next_uniform();
            // Probability that the bridge touched either end between the nodes.
            const double p_lo = std::exp(-2.0 * (x - lo) * (next - lo) / step_var);
            const double p_hi = std::exp(-2.0 * (hi - x) * (hi - next) / step_var);
            if (u < p_lo) return g.values.front();
            if (u < p_lo + p_hi) return g.values.back();
            x = next;
        }
        return interpolate(g, x);
    });
    return summarize(samples, 0, seed);
}

}  // namespace bsheet
