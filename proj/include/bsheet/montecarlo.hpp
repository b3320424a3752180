#pragma once

#include <bsheet/analytics.hpp>
#include <bsheet/error.hpp>
#include <bsheet/hitting.hpp>
#include <bsheet/rng.hpp>
#include <bsheet/sheet.hpp>
#include <bsheet/stats.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bsheet {

/// Where hitting searches read the sheet from.
///  - exact: path-marginal sampling (ExactPath) on a growing step schedule.
///  - lattice: a materialized SheetGrid on the uniform lattice (SheetPath).
enum class PathMode { exact, lattice };

/// Replication value of the integrated functional.
///  - conditional: for axis rules, the x-integral is taken in conditional
///    expectation given the searched column, which is exact in x.
///  - lattice: left-endpoint quadrature over the full lattice rectangle.
///  - automatic: conditional for axis rules, lattice otherwise.
enum class IntegratedMethod { automatic, conditional, lattice };

struct McConfig {
    std::size_t n = 20000;
    GridSpec grid{1.0, 1.0, 64, 64};           ///< lattice for sheet-based identity checks
    HittingRule rule = HittingRule::axis(1.0); ///< budget 0 selects the estimator default
    RngPolicy rng;
    unsigned workers = 0; ///< 0: hardware concurrency
    bool antithetic = false;
    PathMode path = PathMode::exact;
    IntegratedMethod integrated = IntegratedMethod::automatic;
    PathSchedule schedule{1.0 / 1024.0, 1.0 / 1024.0}; ///< hitting searches (Laplace, discounted)
    int cells_per_unit = 256; ///< resolution of the integrated functional, and x-resolution in lattice mode

    void validate() const {
        if (n < 2) throw ConfigError("Monte Carlo needs n >= 2 replications");
        if (antithetic && n % 2 != 0) throw ConfigError("antithetic sampling needs an even replication count");
        grid.validate();
        rule.validate();
        schedule.validate();
        if (cells_per_unit < 1) throw ConfigError("cells_per_unit must be >= 1");
    }
};

/// Censored-fraction threshold above which an estimate carries a warning.
inline constexpr double kCensoringWarnFraction = 0.01;

/// Budget on tau1*tau2 that keeps both the discarded Laplace mass
/// e^{-beta^2 budget / 2} below 1e-10 and the censoring probability near
/// 0.2%. Under either rule tau1*tau2 is distributed as the first passage
/// time of a standard Brownian motion to |y|, whose tail is about
/// |y| sqrt(2 / (pi L)).
inline double default_hitting_budget(double beta, double y) {
    constexpr double target = 0.002;
    const double level_budget = 2.0 * y * y / (std::numbers::pi * target * target);
    const double mass_budget = beta > 0.0 ? 50.0 / (beta * beta) : 0.0;
    return std::max({mass_budget, level_budget, 1.0});
}

/// Default budget of the integrated functional: 200 / rho^2 or the level
/// budget, whichever is larger.
inline double default_integrated_budget(double rho, double y) {
    return std::max(200.0 / (rho * rho), default_hitting_budget(0.0, y));
}

namespace detail {

struct Sample {
    double value = 0.0;
    bool censored = false;
    double resolution = 0.0; ///< estimator-specific diagnostic, averaged
};

inline std::string censoring_warning(const McEstimate& est) {
    std::ostringstream os;
    os << "censored fraction " << est.censored_fraction() << " exceeds " << kCensoringWarnFraction
       << "; increase the budget";
    return os.str();
}

// Runs body(substream, antithetic) for every replication. Antithetic pairs
// share a substream and are averaged before summarizing, so the standard
// error accounts for their correlation.
template <typename Body>
McEstimate replicate(const McConfig& cfg, Body&& body, double* mean_resolution = nullptr) {
    const std::uint64_t seed = cfg.rng.seed;
    std::vector<Sample> samples = run_replications<Sample>(cfg.n, cfg.workers, [&](std::size_t r) {
        if (cfg.antithetic) return body(static_cast<std::uint64_t>(r / 2), r % 2 == 1);
        return body(static_cast<std::uint64_t>(r), false);
    });

    std::size_t censored = 0;
    double resolution = 0.0;
    for (const Sample& s : samples) {
        censored += s.censored ? 1 : 0;
        resolution += s.resolution;
    }
    if (mean_resolution) *mean_resolution = resolution / static_cast<double>(samples.size());

    std::vector<double> values;
    if (cfg.antithetic) {
        values.reserve(samples.size() / 2);
        for (std::size_t k = 0; k + 1 < samples.size(); k += 2)
            values.push_back(0.5 * (samples[k].value + samples[k + 1].value));
    } else {
        values.reserve(samples.size());
        for (const Sample& s : samples) values.push_back(s.value);
    }
    McEstimate est = summarize(values, censored, seed);
    est.n = cfg.n;
    if (est.censored_fraction() > kCensoringWarnFraction) est.warning = censoring_warning(est);
    return est;
}

inline McEstimate exact_estimate(double value, const McConfig& cfg) {
    McEstimate est;
    est.mean = value;
    est.std_error = 0.0;
    est.n = cfg.n;
    est.seed = cfg.rng.seed;
    return est;
}

// Hitting search for one replication; `visit` sees the path after the search.
template <typename Visit>
auto with_hit(const McConfig& cfg, const HittingRule& rule, const PathSchedule& schedule, double y,
              std::uint64_t substream, bool antithetic, Visit&& visit) {
    if (cfg.path == PathMode::exact) {
        ExactPath path(rule, schedule, cfg.rng.seed, substream, antithetic);
        const StoppingPoint sp = first_hit(path, y);
        return visit(path, sp);
    }
    SheetPath path(rule, schedule.dt, cfg.cells_per_unit, cfg.rng.seed, substream, antithetic);
    const StoppingPoint sp = first_hit(path, y);
    return visit(path, sp);
}

// m(t) = int_0^{x0} (x / x0) e^{-rho t x} dx.
inline double column_weight(double rho, double t, double x0) {
    const double a = rho * t * x0;
    if (a < 0.1) {
        // (1 - e^{-a}(1 + a)) / a^2 = sum_n (-1)^n a^n (n + 1) / (n + 2)!
        double sum = 0.0;
        double power_over_factorial = 0.5; // a^n / (n + 2)!
        for (int n = 0; n < 12; ++n) {
            sum += (n % 2 == 0 ? 1.0 : -1.0) * power_over_factorial * (n + 1);
            power_over_factorial *= a / (n + 3);
        }
        return x0 * sum;
    }
    return x0 * (1.0 - std::exp(-a) * (1.0 + a)) / (a * a);
}

// Sub-lattice of `grid` ending at the node at or below (t, x).
inline GridSpec corner_spec(const GridSpec& grid, double t, double x, int& i, int& j) {
    constexpr double slack = 1e-12;
    if (!(t >= 0.0) || !(x >= 0.0) || t > grid.t_max * (1.0 + slack) || x > grid.x_max * (1.0 + slack))
        throw DomainError("(t, x) lies outside the configured grid");
    i = std::min(grid.nt, static_cast<int>(std::floor(t / grid.dt() + 1e-9)));
    j = std::min(grid.nx, static_cast<int>(std::floor(x / grid.dx() + 1e-9)));
    return GridSpec{i * grid.dt(), j * grid.dx(), std::max(i, 1), std::max(j, 1)};
}

}  // namespace detail

/// E[e^{-beta^2 tau1 tau2 / 2}] over first hitting points of y; the
/// target is e^{-beta |y|}.
inline McEstimate estimate_laplace(const McConfig& cfg, double beta, double y) {
    cfg.validate();
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
    if (!std::isfinite(y)) throw ConfigError("level y must be finite");
    if (y == 0.0 || beta == 0.0) return detail::exact_estimate(1.0, cfg);

    const HittingRule rule = cfg.rule.budget > 0.0 ? cfg.rule : cfg.rule.with_budget(default_hitting_budget(beta, y));
    const double half_beta2 = 0.5 * beta * beta;
    return detail::replicate(cfg, [&](std::uint64_t sub, bool anti) {
        return detail::with_hit(cfg, rule, cfg.schedule, y, sub, anti, [&](auto&, const StoppingPoint& sp) {
            return detail::Sample{std::exp(-half_beta2 * sp.product()), sp.censored};
        });
    });
}

/// E[e^{-rho tau1 tau2} h(B(tau))] at first hitting points of y > 0; the
/// target is phi_hitting_value.
inline McEstimate estimate_discounted_reward(const McConfig& cfg, double rho, const Reward& reward, double y) {
    cfg.validate();
    DiscountConfig{rho}.validate();
    if (!(y > 0.0) || !std::isfinite(y)) throw DomainError("discounted reward needs a positive level");

    const double beta = std::sqrt(2.0 * rho);
    const HittingRule rule = cfg.rule.budget > 0.0 ? cfg.rule : cfg.rule.with_budget(default_hitting_budget(beta, y));
    const double payoff = reward.value(y);
    return detail::replicate(cfg, [&](std::uint64_t sub, bool anti) {
        return detail::with_hit(cfg, rule, cfg.schedule, y, sub, anti, [&](auto&, const StoppingPoint& sp) {
            return detail::Sample{std::exp(-rho * sp.product()) * payoff, sp.censored};
        });
    });
}

/// E[int_0^{tau1} int_0^{tau2} e^{-rho t x} B(t, x) dx dt] at first hitting
/// points of y. The time step is 1 / cells_per_unit.
inline McEstimate estimate_integrated(const McConfig& cfg, double rho, double y) {
    cfg.validate();
    DiscountConfig{rho}.validate();
    if (!std::isfinite(y)) throw ConfigError("level y must be finite");
    if (y == 0.0) return detail::exact_estimate(0.0, cfg);

    const HittingRule rule = cfg.rule.budget > 0.0 ? cfg.rule : cfg.rule.with_budget(default_integrated_budget(rho, y));
    IntegratedMethod method = cfg.integrated;
    if (method == IntegratedMethod::automatic)
        method = rule.kind == RuleKind::axis ? IntegratedMethod::conditional : IntegratedMethod::lattice;
    if (method == IntegratedMethod::conditional && rule.kind != RuleKind::axis)
        throw ConfigError("the conditional integrated estimator needs an axis rule");

    const double h = 1.0 / cfg.cells_per_unit;

    if (method == IntegratedMethod::conditional) {
        const double x0 = rule.param;
        const PathSchedule schedule{h, cfg.path == PathMode::exact ? cfg.schedule.growth : 0.0};
        return detail::replicate(cfg, [&](std::uint64_t sub, bool anti) {
                return detail::with_hit(cfg, rule, schedule, y, sub, anti, [&](auto& path, const StoppingPoint& sp) {
                    // Left-endpoint rule in t over [0, tau1].
                    double sum = 0.0;
                    for (std::size_t i = 0; i < sp.step; ++i) {
                        const double t0 = path.time(i);
                        const double t1 = std::min(path.time(i + 1), sp.tau1);
                        if (t1 <= t0) break;
                        sum += path.value(i) * detail::column_weight(rho, t0, x0) * (t1 - t0);
                    }
                    return detail::Sample{sum, sp.censored};
                });
            });
    }

    // Lattice quadrature needs the whole rectangle, so it always reads a SheetGrid.
    double resolution = 0.0;
    McEstimate est = detail::replicate(
        cfg,
        [&](std::uint64_t sub, bool anti) {
            SheetPath path(rule, h, cfg.cells_per_unit, cfg.rng.seed, sub, anti);
            const StoppingPoint sp = first_hit(path, y);
            path.ensure_rows(sp.step);
            const SheetGrid& sheet = path.sheet();
            const double dt = sheet.spec().dt();
            const double dx = sheet.spec().dx();
            const int rows = static_cast<int>(sp.step);
            const int cols = rule.kind == RuleKind::axis ? sheet.spec().nx : rows;
            double sum = 0.0;
            for (int i = 0; i < rows; ++i) {
                const double t = i * dt;
                for (int j = 0; j < cols; ++j) sum += std::exp(-rho * t * (j * dx)) * sheet.at(i, j);
            }
            const double area = sp.product();
            return detail::Sample{sum * dt * dx, sp.censored, area > 0.0 ? dt * dx / area : 0.0};
        },
        &resolution);
    if (resolution > 1e-3 && !est.warning) {
        std::ostringstream os;
        os << "grid resolution: mean cell area is " << resolution << " of the stopping rectangle (> 1e-3)";
        est.warning = os.str();
    }
    return est;
}

/// Laplace estimates for several rules at the same (beta, y).
inline std::vector<McEstimate> hit_independence_check(const McConfig& cfg, std::span<const HittingRule> rules,
                                                      double y, double beta) {
    if (cfg.n < 1000) throw ConfigError("hit independence check needs n >= 1000");
    if (rules.empty()) throw ConfigError("hit independence check needs at least one rule");
    std::vector<McEstimate> out;
    out.reserve(rules.size());
    for (const HittingRule& rule : rules) {
        McConfig c = cfg;
        c.rule = rule;
        out.push_back(estimate_laplace(c, beta, y));
    }
    return out;
}

/// True when every pair of estimates agrees within z combined standard errors.
inline bool mutually_consistent(std::span<const McEstimate> estimates, double z = 3.0) {
    for (std::size_t a = 0; a < estimates.size(); ++a)
        for (std::size_t b = a + 1; b < estimates.size(); ++b) {
            const double diff = estimates[a].mean - estimates[b].mean;
            const double se = std::hypot(estimates[a].std_error, estimates[b].std_error);
            if (se == 0.0 ? diff != 0.0 : std::abs(diff) > z * se) return false;
        }
    return true;
}

/// E[exp(beta B(t, x) - beta^2 t x / 2)]; target 1.
inline McEstimate check_exponential_martingale(const McConfig& cfg, double beta, double t, double x) {
    cfg.validate();
    int i = 0, j = 0;
    const GridSpec sub = detail::corner_spec(cfg.grid, t, x, i, j);
    if (beta == 0.0 || i == 0 || j == 0) return detail::exact_estimate(1.0, cfg);
    const double area = sub.t_max * sub.x_max;
    return detail::replicate(cfg, [&](std::uint64_t s, bool anti) {
        const SheetGrid sheet = generate_sheet(sub, cfg.rng.seed, s, anti);
        return detail::Sample{std::exp(beta * sheet.at(i, j) - 0.5 * beta * beta * area)};
    });
}

/// Deterministic integrand phi(s, a) of a Wiener integral against the sheet.
using Integrand = std::function<double(double, double)>;

/// Left: E[(sum phi dB)^2] by simulation. Right: sum phi^2 dt dx. phi is
/// evaluated at cell midpoints, so the right side is also the exact second
/// moment of the left's lattice sum.
inline std::pair<McEstimate, McEstimate> check_isometry(const McConfig& cfg, const Integrand& phi, double t,
                                                        double x) {
    cfg.validate();
    if (!phi) throw ConfigError("isometry check needs an integrand");
    int ni = 0, nj = 0;
    const GridSpec sub = detail::corner_spec(cfg.grid, t, x, ni, nj);
    if (ni == 0 || nj == 0) return {detail::exact_estimate(0.0, cfg), detail::exact_estimate(0.0, cfg)};

    const double dt = sub.dt();
    const double dx = sub.dx();
    std::vector<double> weights(static_cast<std::size_t>(ni) * static_cast<std::size_t>(nj));
    double right = 0.0;
    for (int i = 1; i <= ni; ++i)
        for (int j = 1; j <= nj; ++j) {
            const double w = phi((i - 0.5) * dt, (j - 0.5) * dx);
            weights[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(nj) + static_cast<std::size_t>(j - 1)] = w;
            right += w * w;
        }
    right *= dt * dx;

    McEstimate left = detail::replicate(cfg, [&](std::uint64_t s, bool anti) {
        const SheetGrid sheet = generate_sheet(sub, cfg.rng.seed, s, anti);
        double integral = 0.0;
        for (int i = 1; i <= ni; ++i)
            for (int j = 1; j <= nj; ++j)
                integral += weights[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(nj) +
                                    static_cast<std::size_t>(j - 1)] *
                            sheet.cell_increment(i, j);
        return detail::Sample{integral * integral};
    });
    return {left, detail::exact_estimate(right, cfg)};
}

/// E[B(t, x)^2]; target t x.
inline McEstimate check_second_moment(const McConfig& cfg, double t, double x) {
    cfg.validate();
    int i = 0, j = 0;
    const GridSpec sub = detail::corner_spec(cfg.grid, t, x, i, j);
    if (i == 0 || j == 0) return detail::exact_estimate(0.0, cfg);
    return detail::replicate(cfg, [&](std::uint64_t s, bool anti) {
        const SheetGrid sheet = generate_sheet(sub, cfg.rng.seed, s, anti);
        const double b = sheet.at(i, j);
        return detail::Sample{b * b};
    });
}

}  // namespace bsheet
