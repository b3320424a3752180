#pragma once

#include <bsheet/error.hpp>
#include <bsheet/special.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bsheet {

struct DiscountConfig {
    double rho = 0.5;

    void validate() const {
        if (!(rho > 0.0) || !std::isfinite(rho)) throw ConfigError("discount rate rho must be positive");
    }

    /// sqrt(2 rho): the Laplace exponent that turns e^{-rho tau1 tau2} into
    /// e^{-sqrt(2 rho) |y|} at a hitting point of level y.
    double root() const noexcept { return std::sqrt(2.0 * rho); }
};

/// Reward h applied at the stopping point. Must be C^1 with h(y) >= 0 on y >= 0.
struct Reward {
    enum class Kind { linear, power, custom };

    Kind kind = Kind::linear;
    int n = 1;
    std::function<double(double)> h;
    std::function<double(double)> dh;
    std::string label = "linear";

    static Reward linear() { return {}; }

    static Reward power(int exponent) {
        if (exponent < 1) throw ConfigError("power reward: exponent must be a positive integer");
        Reward r;
        r.kind = Kind::power;
        r.n = exponent;
        r.label = "power:" + std::to_string(exponent);
        return r;
    }

    static Reward custom(std::function<double(double)> value, std::function<double(double)> derivative,
                         std::string name = "custom") {
        if (!value || !derivative) throw ConfigError("custom reward needs both h and h'");
        Reward r;
        r.kind = Kind::custom;
        r.h = std::move(value);
        r.dh = std::move(derivative);
        r.label = std::move(name);
        return r;
    }

    /// h(y) = e^{k y}.
    static Reward exponential(double k) {
        Reward r = custom([k](double y) { return std::exp(k * y); },
                          [k](double y) { return k * std::exp(k * y); });
        r.label = "exp:" + std::to_string(k);
        return r;
    }

    double value(double y) const {
        switch (kind) {
            case Kind::linear: return y;
            case Kind::power: return std::pow(y, n);
            case Kind::custom: return h(y);
        }
        return 0.0;
    }

    double derivative(double y) const {
        switch (kind) {
            case Kind::linear: return 1.0;
            case Kind::power: return n * std::pow(y, n - 1);
            case Kind::custom: return dh(y);
        }
        return 0.0;
    }
};

/// Parses "linear", "power:<n>" or "exp:<k>".
inline Reward parse_reward(const std::string& text) {
    if (text == "linear") return Reward::linear();
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string kind = text.substr(0, colon);
        const std::string arg = text.substr(colon + 1);
        try {
            std::size_t used = 0;
            if (kind == "power") {
                const int n = std::stoi(arg, &used);
                if (used == arg.size()) return Reward::power(n);
            } else if (kind == "exp") {
                const double k = std::stod(arg, &used);
                if (used == arg.size()) return Reward::exponential(k);
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
        }
    }
    throw ConfigError("reward must be linear, power:<n> or exp:<k>, got " + text);
}

enum class CurveKind {
    phi,              ///< hitting value g(y) = h(y) e^{-sqrt(2 rho) y}, y > 0
    integrated,       ///< integrated value F(y)
    baseline_hitting, ///< one-parameter E[e^{-rho tau} B(tau)] at level y: y e^{-sqrt(2 rho)|y|}
    baseline_integrated ///< one-parameter E[int_0^tau e^{-rho t} B dt]: -(y/rho) e^{-sqrt(2 rho)|y|}
};

inline std::string curve_name(CurveKind kind) {
    switch (kind) {
        case CurveKind::phi: return "phi";
        case CurveKind::integrated: return "F";
        case CurveKind::baseline_hitting: return "baseline_hitting";
        case CurveKind::baseline_integrated: return "baseline_integrated";
    }
    return "?";
}

inline CurveKind parse_curve(const std::string& text) {
    for (CurveKind k : {CurveKind::phi, CurveKind::integrated, CurveKind::baseline_hitting,
                        CurveKind::baseline_integrated})
        if (curve_name(k) == text) return k;
    throw ConfigError("unknown curve: " + text + " (phi, F, baseline_hitting, baseline_integrated)");
}

struct ValueCurve {
    std::vector<double> ys;
    std::vector<double> values;
    std::string label;
};

/// Value of stopping at the first hitting point of level y > 0:
/// h(y) e^{-sqrt(2 rho) y}.
inline double phi_hitting_value(const DiscountConfig& cfg, const Reward& reward, double y) {
    cfg.validate();
    if (!(y > 0.0)) throw DomainError("phi_hitting_value: level must be positive");
    return reward.value(y) * std::exp(-cfg.root() * y);
}

/// Bracket used for custom rewards, in units of 1/sqrt(2 rho).
struct ThresholdSearch {
    double lo_scale = 1e-6;
    double hi_scale = 1e3;
};

/// Maximizing level of phi_hitting_value, i.e. the solution of
/// h'(y) = sqrt(2 rho) h(y); nullopt when no maximizer exists on the bracket.
inline std::optional<double> optimal_threshold_hitting(const DiscountConfig& cfg, const Reward& reward,
                                                       ThresholdSearch search = {}) {
    cfg.validate();
    switch (reward.kind) {
        case Reward::Kind::linear: return 1.0 / cfg.root();
        case Reward::Kind::power: return reward.n / cfg.root();
        case Reward::Kind::custom: break;
    }
    const double s = cfg.root();
    auto condition = [&](double y) { return reward.derivative(y) - s * reward.value(y); };
    const double lo = search.lo_scale / s;
    const double hi = search.hi_scale / s;
    const double at_lo = condition(lo);
    const double at_hi = condition(hi);
    // A maximum needs g' = e^{-s y}(h' - s h) to go from positive to negative.
    if (!(at_lo > 0.0 && at_hi < 0.0)) return std::nullopt;
    return solve_bracketed(condition, RootConfig{lo, hi, 1e-12 * std::max(1.0, hi), 400});
}

/// Integrated value F(y) = (2y / rho) E1(|y| sqrt(2 rho)); F(0) = 0.
inline double integrated_value_F(const DiscountConfig& cfg, double y) {
    cfg.validate();
    if (y == 0.0) return 0.0;
    return 2.0 * y / cfg.rho * exp_integral_e1(std::abs(y) * cfg.root());
}

/// F(y) through its integral representation
/// (1/rho) int_rho^inf y e^{-|y| sqrt(2u)} / u du.
inline double integrated_value_F_by_quadrature(const DiscountConfig& cfg, double y,
                                               const QuadratureConfig& quad = {}) {
    cfg.validate();
    if (y == 0.0) return 0.0;
    const double a = std::abs(y);
    auto integrand = [a, y](double u) { return y * std::exp(-a * std::sqrt(2.0 * u)) / u; };
    return integrate_semi_infinite(integrand, cfg.rho, quad) / cfg.rho;
}

/// F'(y) for y > 0 in closed form: (2 / rho)(E1(z) - e^{-z}), z = y sqrt(2 rho).
inline double integrated_value_F_slope(const DiscountConfig& cfg, double y) {
    cfg.validate();
    if (!(y > 0.0)) throw DomainError("F slope is evaluated for y > 0");
    const double z = y * cfg.root();
    return 2.0 / cfg.rho * (exp_integral_e1(z) - std::exp(-z));
}

/// F'(y) from the differentiated integral (1/rho) int_rho^inf (1 - y sqrt(2u)) e^{-y sqrt(2u)} / u du.
inline double integrated_value_F_slope_by_quadrature(const DiscountConfig& cfg, double y,
                                                     const QuadratureConfig& quad = {}) {
    cfg.validate();
    if (!(y > 0.0)) throw DomainError("F slope is evaluated for y > 0");
    auto integrand = [y](double u) {
        const double r = y * std::sqrt(2.0 * u);
        return (1.0 - r) * std::exp(-r) / u;
    };
    return integrate_semi_infinite(integrand, cfg.rho, quad) / cfg.rho;
}

/// Root z* of E1(z) = e^{-z}.
inline double integrated_root_z(double tol = 1e-13) {
    return solve_bracketed([](double z) { return exp_integral_e1(z) - std::exp(-z); },
                           RootConfig{0.1, 1.0, tol, 400});
}

struct IntegratedThreshold {
    double z_star;
    double y_star;
};

/// Maximizer y* = z* / sqrt(2 rho) of F.
inline IntegratedThreshold optimal_threshold_integrated(const DiscountConfig& cfg) {
    cfg.validate();
    const double z = integrated_root_z();
    return {z, z / cfg.root()};
}

/// One-parameter Brownian motion thresholds: (1/sqrt(2 rho), -1/sqrt(2 rho)).
inline std::pair<double, double> one_param_baselines(const DiscountConfig& cfg) {
    cfg.validate();
    const double level = 1.0 / cfg.root();
    return {level, -level};
}

/// Pointwise evaluation of a closed form on a strictly increasing level grid.
inline ValueCurve sample_curve(CurveKind which, const DiscountConfig& cfg, const Reward& reward,
                               std::span<const double> ys) {
    cfg.validate();
    if (ys.empty()) throw ConfigError("sample_curve: level grid is empty");
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (!(ys[i] > ys[i - 1])) throw ConfigError("sample_curve: levels must be strictly increasing");

    ValueCurve curve;
    curve.ys.assign(ys.begin(), ys.end());
    curve.label = curve_name(which);
    curve.values.reserve(ys.size());
    const double s = cfg.root();
    for (double y : ys) {
        switch (which) {
            case CurveKind::phi: curve.values.push_back(phi_hitting_value(cfg, reward, y)); break;
            case CurveKind::integrated: curve.values.push_back(integrated_value_F(cfg, y)); break;
            case CurveKind::baseline_hitting: curve.values.push_back(y * std::exp(-s * std::abs(y))); break;
            case CurveKind::baseline_integrated:
                curve.values.push_back(-y / cfg.rho * std::exp(-s * std::abs(y)));
                break;
        }
    }
    return curve;
}

/// Uniform level grid [lo, hi] with `count` points.
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
    if (count == 0) return {};
    if (count == 1) return {lo};
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return out;
}

}  // namespace bsheet
