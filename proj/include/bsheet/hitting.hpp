#pragma once

#include <bsheet/error.hpp>
#include <bsheet/rng.hpp>
#include <bsheet/sheet.hpp>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace bsheet {

enum class RuleKind { axis, diagonal };

/// How a level crossing between two consecutive lattice nodes is detected.
///  - sign_change: only an observed sign change of (value - y) counts.
///  - bridge: additionally, an unobserved excursion across y between the
///    nodes is detected with its exact Brownian-bridge probability
///    exp(-2 (a - y)(b - y) / variance). Without it the discrete monitoring
///    delays hits by O(sqrt(step)) in level, which biases Laplace estimates
///    well beyond Monte Carlo error.
enum class CrossingTest { sign_change, bridge };

/// A concrete first-hitting-point rule: the sheet is searched along a
/// monotone path t -> (t, x0) (axis) or t -> (t, c t) (diagonal), both of
/// which give adapted stopping points.
struct HittingRule {
    RuleKind kind = RuleKind::axis;
    double param = 1.0;  ///< x0 for axis, slope c for diagonal
    double budget = 0.0; ///< cap on tau1*tau2; 0 selects the estimator's default
    double hit_tol = 0.0;
    CrossingTest crossing = CrossingTest::bridge;

    static HittingRule axis(double x0) { return {RuleKind::axis, x0}; }
    static HittingRule diagonal(double c) { return {RuleKind::diagonal, c}; }

    void validate() const {
        const char* what = kind == RuleKind::axis ? "axis rule: x0 must be positive and finite"
                                                  : "diagonal rule: slope must be positive and finite";
        if (!(param > 0.0) || !std::isfinite(param)) throw ConfigError(what);
        if (!(budget >= 0.0) || !std::isfinite(budget)) throw ConfigError("hitting rule: budget must be >= 0");
        if (!(hit_tol >= 0.0)) throw ConfigError("hitting rule: hit_tol must be >= 0");
    }

    HittingRule with_budget(double b) const {
        HittingRule r = *this;
        r.budget = b;
        return r;
    }

    /// Parameter point of the search path at path parameter t.
    std::pair<double, double> point(double t) const noexcept {
        return kind == RuleKind::axis ? std::pair{t, param} : std::pair{t, param * t};
    }

    double product(double t) const noexcept { return kind == RuleKind::axis ? t * param : param * t * t; }

    double t_for_product(double p) const noexcept {
        return kind == RuleKind::axis ? p / param : std::sqrt(p / param);
    }

    /// Variance of the path increment between nodes k-1 and k: the area of
    /// the region added to the rectangle [0, t] x [0, x(t)].
    double increment_variance(std::size_t k, double dt) const noexcept {
        if (kind == RuleKind::axis) return param * dt;
        return param * dt * dt * (2.0 * static_cast<double>(k) - 1.0);
    }

    std::string name() const {
        std::ostringstream os;
        os << (kind == RuleKind::axis ? "axis:" : "diagonal:") << param;
        return os.str();
    }
};

/// Parses "axis:<x0>" or "diagonal:<c>".
inline HittingRule parse_rule(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("rule must look like axis:<x0> or diagonal:<c>");
    const std::string kind = text.substr(0, colon);
    double value = 0.0;
    try {
        std::size_t used = 0;
        value = std::stod(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1) throw ConfigError("trailing characters");
    } catch (const std::exception&) {
        throw ConfigError("rule parameter is not a number: " + text);
    }
    HittingRule rule;
    if (kind == "axis")
        rule = HittingRule::axis(value);
    else if (kind == "diagonal")
        rule = HittingRule::diagonal(value);
    else
        throw ConfigError("unknown rule kind: " + kind);
    rule.validate();
    return rule;
}

/// A stopping point (tau1, tau2) returned by a hitting search.
struct StoppingPoint {
    double tau1 = 0.0;
    double tau2 = 0.0;
    double level = 0.0;
    bool censored = false;
    std::size_t step = 0; ///< path node index of the hit (or of the budget)

    double product() const noexcept { return tau1 * tau2; }
};

/// Node times of a search path: steps of max(dt, growth * t). growth = 0
/// gives the uniform lattice t_k = k dt; a positive growth keeps a fixed
/// relative resolution once t exceeds dt / growth, which makes large
/// budgets affordable.
struct PathSchedule {
    double dt = 1.0 / 1024.0;
    double growth = 0.0;

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("path step dt must be positive");
        if (!(growth >= 0.0) || !(growth < 1.0)) throw ConfigError("path step growth must lie in [0, 1)");
    }

    static PathSchedule uniform(double dt) { return {dt, 0.0}; }

    /// Time of node k given the time of node k - 1.
    double next(double previous, std::size_t k) const noexcept {
        if (growth > 0.0 && growth * previous > dt) return previous + growth * previous;
        return static_cast<double>(k) * dt;
    }
};

/// Anything that yields sheet values along a rule's search path, node by node.
template <typename P>
concept PathSource = requires(P& p, std::size_t k) {
    { p.value(k) } -> std::convertible_to<double>;
    { p.time(k) } -> std::convertible_to<double>;
    { p.bridge_uniform(k) } -> std::convertible_to<double>;
    { p.rule() } -> std::convertible_to<const HittingRule&>;
};

/// Samples the sheet's values along the search path directly from their
/// joint law: independent Gaussian increments whose variances are the areas
/// swept between nodes. Equal in law to reading the same nodes off a
/// generated SheetGrid, at a fraction of the cost.
class ExactPath {
public:
    ExactPath(HittingRule rule, PathSchedule schedule, std::uint64_t seed, std::uint64_t substream,
              bool antithetic = false)
        : rule_(rule), schedule_(schedule), sign_(antithetic ? -1.0 : 1.0),
          increments_(seed, substream, lane::kPathIncrement),
          uniforms_(seed, substream, lane::kBridgeUniform) {
        schedule_.validate();
        values_.push_back(0.0);
        times_.push_back(0.0);
    }

    double value(std::size_t k) {
        extend(k);
        return values_[k];
    }

    double time(std::size_t k) {
        extend(k);
        return times_[k];
    }

    double bridge_uniform(std::size_t k) {
        while (uniforms_cache_.size() < k) uniforms_cache_.push_back(uniforms_.next_uniform());
        return uniforms_cache_[k - 1];
    }

    const HittingRule& rule() const noexcept { return rule_; }
    std::size_t nodes_generated() const noexcept { return values_.size(); }

private:
    void extend(std::size_t k) {
        while (values_.size() <= k) {
            const std::size_t next = values_.size();
            const double t = schedule_.next(times_.back(), next);
            const double var = rule_.product(t) - rule_.product(times_.back());
            values_.push_back(values_.back() + sign_ * std::sqrt(var) * increments_.next_normal());
            times_.push_back(t);
        }
    }

    HittingRule rule_;
    PathSchedule schedule_;
    double sign_;
    CounterStream increments_;
    CounterStream uniforms_;
    std::vector<double> values_;
    std::vector<double> times_;
    std::vector<double> uniforms_cache_;
};

/// Reads the search path off a materialized SheetGrid, growing the sheet by
/// doubling its horizon when the search runs past it. The lattice is laid
/// out so every path node is a lattice node: for axis rules x0 is the last
/// column, for diagonal rules dx = c * dt.
class SheetPath {
public:
    SheetPath(HittingRule rule, double dt, int cells_per_unit_x, std::uint64_t seed, std::uint64_t substream,
              bool antithetic = false, int initial_rows = 64)
        : rule_(rule), dt_(dt), antithetic_(antithetic), seed_(seed), substream_(substream),
          uniforms_(seed, substream, lane::kBridgeUniform),
          grid_(generate_sheet(initial_spec(rule, dt, cells_per_unit_x, initial_rows), seed, substream, antithetic)) {
        column_ = rule_.kind == RuleKind::axis ? grid_.spec().nx : 0;
    }

    double value(std::size_t k) {
        ensure_rows(k);
        if (k > max_read_) max_read_ = k;
        const int i = static_cast<int>(k);
        return rule_.kind == RuleKind::axis ? grid_.at(i, column_) : grid_.at(i, i);
    }

    double bridge_uniform(std::size_t k) {
        while (uniforms_cache_.size() < k) uniforms_cache_.push_back(uniforms_.next_uniform());
        return uniforms_cache_[k - 1];
    }

    /// Makes sure lattice rows 0..k exist (and columns 0..k for diagonal rules).
    void ensure_rows(std::size_t k) {
        while (static_cast<std::size_t>(grid_.spec().nt) < k) grow();
    }

    double time(std::size_t k) const noexcept { return static_cast<double>(k) * dt_; }
    double dt() const noexcept { return dt_; }
    const HittingRule& rule() const noexcept { return rule_; }
    const SheetGrid& sheet() const noexcept { return grid_; }
    std::size_t max_node_read() const noexcept { return max_read_; }

private:
    static GridSpec initial_spec(const HittingRule& rule, double dt, int cells_per_unit_x, int rows) {
        rule.validate();
        if (!(dt > 0.0)) throw ConfigError("path step dt must be positive");
        if (rule.kind == RuleKind::axis) {
            const int nx = std::max(1, static_cast<int>(std::lround(rule.param * cells_per_unit_x)));
            return GridSpec{dt * rows, rule.param, rows, nx};
        }
        return GridSpec{dt * rows, rule.param * dt * rows, rows, rows};
    }

    void grow() {
        const GridSpec& spec = grid_.spec();
        if (rule_.kind == RuleKind::axis) {
            grid_ = extend_sheet(grid_, spec.t_max + spec.nt * spec.dt());
        } else {
            // Rows and columns both double; counter-addressed increments keep
            // the existing block bit-identical.
            GridSpec bigger{2.0 * spec.t_max, 2.0 * spec.x_max, 2 * spec.nt, 2 * spec.nx};
            grid_ = generate_sheet(bigger, seed_, substream_, antithetic_);
        }
    }

    HittingRule rule_;
    double dt_;
    bool antithetic_;
    std::uint64_t seed_;
    std::uint64_t substream_;
    CounterStream uniforms_;
    std::vector<double> uniforms_cache_;
    SheetGrid grid_;
    int column_ = 0;
    std::size_t max_read_ = 0;
};

namespace detail {

template <PathSource P>
class NegatedPath {
public:
    explicit NegatedPath(P& inner) : inner_(inner) {}
    double value(std::size_t k) { return -inner_.value(k); }
    double time(std::size_t k) { return inner_.time(k); }
    double bridge_uniform(std::size_t k) { return inner_.bridge_uniform(k); }
    const HittingRule& rule() const { return inner_.rule(); }

private:
    P& inner_;
};

template <PathSource P>
StoppingPoint search_upward(P& path, const HittingRule& rule, double y) {
    auto stop_at = [&](std::size_t k, double t, bool censored) {
        StoppingPoint sp;
        std::tie(sp.tau1, sp.tau2) = rule.point(censored ? rule.t_for_product(rule.budget) : t);
        sp.level = y;
        sp.censored = censored;
        sp.step = k;
        return sp;
    };

    if (y == 0.0 || std::abs(path.value(0) - y) <= rule.hit_tol) return stop_at(0, 0.0, false);

    double before = path.value(0) - y;
    double t_before = 0.0;
    for (std::size_t k = 1;; ++k) {
        const double t = path.time(k);
        if (rule.product(t) > rule.budget) return stop_at(k, t, true);
        const double after = path.value(k) - y;
        if (std::abs(after) <= rule.hit_tol || before * after <= 0.0) return stop_at(k, t, false);
        if (rule.crossing == CrossingTest::bridge) {
            const double var = rule.product(t) - rule.product(t_before);
            const double p_cross = std::exp(-2.0 * before * after / var);
            if (path.bridge_uniform(k) < p_cross) return stop_at(k, t, false);
        }
        before = after;
        t_before = t;
    }
}

}  // namespace detail

/// First hitting point of level y along the path's rule. Returns the first
/// lattice node at (or, with the bridge test, just after) the crossing.
/// Censoring is reported in the result: tau1*tau2 == budget.
template <PathSource P>
StoppingPoint first_hit(P& path, double y) {
    const HittingRule& rule = path.rule();
    rule.validate();
    if (!std::isfinite(y)) throw ConfigError("first_hit: level must be finite");
    if (!(rule.budget > 0.0)) throw ConfigError("first_hit: rule budget must be positive");
    if (y < 0.0) {
        // Symmetry of the sheet: hitting y on B is hitting -y on -B.
        detail::NegatedPath<P> flipped(path);
        StoppingPoint sp = detail::search_upward(flipped, rule, -y);
        sp.level = y;
        return sp;
    }
    return detail::search_upward(path, rule, y);
}

}  // namespace bsheet
