#include <bsheet/montecarlo.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace bsheet;

namespace {

McConfig base(std::size_t n, unsigned workers = 1) {
    McConfig cfg;
    cfg.n = n;
    cfg.workers = workers;
    return cfg;
}

void expect_identical(const McEstimate& a, const McEstimate& b) {
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.censored, b.censored);
}

// Expected integrated functional of an axis(x0) rule, by conditioning on the
// searched column: -y int_0^L m(t) P(T <= t) dt with T the first passage of
// a Brownian motion of clock x0 t to |y|, plus the part of the mean left
// over at the budget. Evaluated by a midpoint rule in log t.
double conditional_integrated_oracle(double rho, double y, double x0, double budget) {
    const double t_max = budget / x0;
    auto m = [&](double t) {
        const double a = rho * t * x0;
        if (a < 1e-4) return x0 * (0.5 - a / 3.0 + a * a / 8.0);
        return x0 * (1.0 - std::exp(-a) * (1.0 + a)) / (a * a);
    };
    auto hit_by = [&](double t) { return std::erfc(std::abs(y) / std::sqrt(2.0 * x0 * t)); };
    const int n = 200000;
    const double lo = std::log(1e-9), hi = std::log(t_max);
    const double h = (hi - lo) / n;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = std::exp(lo + (k + 0.5) * h);
        sum += m(t) * hit_by(t) * t * h;
    }
    return -y * sum;
}

}  // namespace

TEST(McConfig, Validation) {
    McConfig cfg = base(1);
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.n = 11;
    cfg.antithetic = true;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.n = 10;
    EXPECT_NO_THROW(cfg.validate());
    cfg.rule = HittingRule::axis(0.0);
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Laplace, TrivialCases) {
    const McEstimate zero_level = estimate_laplace(base(1000), 3.0, 0.0);
    EXPECT_EQ(zero_level.mean, 1.0);
    EXPECT_EQ(zero_level.std_error, 0.0);
    const McEstimate zero_beta = estimate_laplace(base(1000), 0.0, 1.3);
    EXPECT_EQ(zero_beta.mean, 1.0);
    EXPECT_EQ(zero_beta.std_error, 0.0);
    EXPECT_THROW(estimate_laplace(base(1000), -1.0, 1.0), ConfigError);
}

TEST(Laplace, UnitBetaUnitLevel) {
    const McEstimate e = estimate_laplace(base(20000), 1.0, 1.0);
    EXPECT_TRUE(e.within(std::exp(-1.0), 3.0)) << e.mean << " +- " << e.std_error;
    EXPECT_LT(e.censored_fraction(), 0.01);
    EXPECT_FALSE(e.warning.has_value());
}

TEST(Laplace, SteepBetaSmallLevel) {
    const McEstimate e = estimate_laplace(base(20000), 2.0, 0.25);
    EXPECT_TRUE(e.within(std::exp(-0.5), 3.0)) << e.mean << " +- " << e.std_error;
}

TEST(Laplace, NegativeLevel) {
    const McEstimate e = estimate_laplace(base(10000), 1.0, -0.5);
    EXPECT_TRUE(e.within(std::exp(-0.5), 3.0)) << e.mean << " +- " << e.std_error;
}

TEST(Laplace, LatticePathMode) {
    McConfig cfg = base(2000);
    cfg.path = PathMode::lattice;
    cfg.schedule = PathSchedule::uniform(1.0 / 64);
    cfg.cells_per_unit = 4;
    cfg.rule = HittingRule::axis(1.0).with_budget(30.0);
    const McEstimate e = estimate_laplace(cfg, 2.0, 0.5);
    EXPECT_TRUE(e.within(std::exp(-1.0), 3.0)) << e.mean << " +- " << e.std_error;
}

TEST(Laplace, WorkerCountDoesNotMatter) {
    const McEstimate one = estimate_laplace(base(3000, 1), 1.0, 0.7);
    const McEstimate three = estimate_laplace(base(3000, 3), 1.0, 0.7);
    const McEstimate eight = estimate_laplace(base(3000, 8), 1.0, 0.7);
    expect_identical(one, three);
    expect_identical(one, eight);
}

TEST(Laplace, SeedDeterminism) {
    McConfig a = base(2000);
    const McEstimate e1 = estimate_laplace(a, 1.0, 0.7);
    const McEstimate e2 = estimate_laplace(a, 1.0, 0.7);
    expect_identical(e1, e2);
    a.rng.seed = 8;
    EXPECT_NE(estimate_laplace(a, 1.0, 0.7).mean, e1.mean);
    EXPECT_EQ(e1.seed, 7u);
}

TEST(Laplace, StandardErrorScaling) {
    const McEstimate small = estimate_laplace(base(2000), 1.0, 0.5);
    const McEstimate large = estimate_laplace(base(8000), 1.0, 0.5);
    EXPECT_LE(large.std_error, 0.5 * small.std_error * 1.2);
}

TEST(Laplace, TruncationBoundBelowNoise) {
    for (auto [beta, y] : std::vector<std::pair<double, double>>{{1.0, 0.5}, {std::numbers::sqrt2, 1.0}, {2.0, 0.25}}) {
        const double budget = default_hitting_budget(beta, y);
        const double bound = std::exp(-0.5 * beta * beta * budget);
        EXPECT_LT(bound, 1e-10);
        const McEstimate e = estimate_laplace(base(2000), beta, y);
        EXPECT_LT(bound, e.std_error);
    }
}

TEST(Laplace, CensoringWarning) {
    McConfig cfg = base(1000);
    cfg.rule = HittingRule::axis(1.0).with_budget(0.5);
    const McEstimate e = estimate_laplace(cfg, 1.0, 2.0);
    EXPECT_GT(e.censored_fraction(), 0.01);
    ASSERT_TRUE(e.warning.has_value());
    EXPECT_NE(e.warning->find("censored"), std::string::npos);
}

TEST(Laplace, AntitheticPairs) {
    McConfig cfg = base(10000);
    cfg.antithetic = true;
    const McEstimate e = estimate_laplace(cfg, 1.0, 0.5);
    EXPECT_EQ(e.n, 10000u);
    EXPECT_TRUE(e.within(std::exp(-0.5), 3.0)) << e.mean << " +- " << e.std_error;
}

TEST(HitIndependence, AxisRulesAgree) {
    const std::vector<HittingRule> rules{HittingRule::axis(0.5), HittingRule::axis(1.0), HittingRule::axis(2.0)};
    McConfig cfg = base(5000);
    const auto est = hit_independence_check(cfg, rules, 1.0, 1.0);
    ASSERT_EQ(est.size(), 3u);
    for (const auto& e : est) EXPECT_TRUE(e.within(std::exp(-1.0), 3.0)) << e.mean;
    EXPECT_TRUE(mutually_consistent(est, 3.0));
}

TEST(HitIndependence, TrivialAndInvalid) {
    const std::vector<HittingRule> rules{HittingRule::axis(1.0), HittingRule::diagonal(1.0)};
    for (const auto& e : hit_independence_check(base(1000), rules, 0.0, 1.0)) EXPECT_EQ(e.mean, 1.0);
    for (const auto& e : hit_independence_check(base(1000), rules, 1.0, 0.0)) EXPECT_EQ(e.mean, 1.0);
    EXPECT_THROW(hit_independence_check(base(999), rules, 1.0, 1.0), ConfigError);
}

TEST(MutualConsistency, DetectsDisagreement) {
    McEstimate a, b;
    a.mean = 1.0;
    a.std_error = 0.01;
    b.mean = 1.1;
    b.std_error = 0.01;
    const std::vector<McEstimate> pair{a, b};
    EXPECT_FALSE(mutually_consistent(pair, 3.0));
    b.mean = 1.02;
    const std::vector<McEstimate> close{a, b};
    EXPECT_TRUE(mutually_consistent(close, 3.0));
}

TEST(DiscountedReward, LinearAndPower) {
    const McConfig cfg = base(10000);
    const DiscountConfig d{0.5};
    struct Case {
        Reward reward;
        double y;
    };
    for (const Case& c : {Case{Reward::linear(), 1.0}, Case{Reward::linear(), 0.3}, Case{Reward::power(2), 2.0}}) {
        const McEstimate e = estimate_discounted_reward(cfg, 0.5, c.reward, c.y);
        const double target = phi_hitting_value(d, c.reward, c.y);
        EXPECT_TRUE(e.within(target, 3.0)) << c.y << ": " << e.mean << " +- " << e.std_error << " vs " << target;
    }
    EXPECT_NEAR(phi_hitting_value(d, Reward::linear(), 0.3), 0.222245, 1e-6);
    EXPECT_NEAR(phi_hitting_value(d, Reward::power(2), 2.0), 0.541341, 1e-6);
}

TEST(DiscountedReward, Errors) {
    EXPECT_THROW(estimate_discounted_reward(base(100), 0.5, Reward::linear(), 0.0), DomainError);
    EXPECT_THROW(estimate_discounted_reward(base(100), 0.0, Reward::linear(), 1.0), ConfigError);
}

TEST(Integrated, LevelZero) {
    const McEstimate e = estimate_integrated(base(1000), 0.5, 0.0);
    EXPECT_EQ(e.mean, 0.0);
    EXPECT_EQ(e.std_error, 0.0);
}

TEST(Integrated, ColumnWeight) {
    // m(t) against a direct midpoint quadrature in x.
    for (double t : {1e-6, 0.01, 0.5, 3.0, 40.0}) {
        const double x0 = 1.3, rho = 0.5;
        const int n = 100000;
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            const double x = (k + 0.5) * x0 / n;
            sum += x / x0 * std::exp(-rho * t * x);
        }
        sum *= x0 / n;
        EXPECT_NEAR(detail::column_weight(rho, t, x0), sum, 1e-9);
    }
}

TEST(Integrated, ConditionalEstimatorMatchesColumnOracle) {
    McConfig cfg = base(10000);
    for (double y : {1.0, -0.5}) {
        const McEstimate e = estimate_integrated(cfg, 0.5, y);
        const double oracle = conditional_integrated_oracle(0.5, y, 1.0, default_integrated_budget(0.5, y));
        EXPECT_LE(std::abs(e.mean - oracle), 3.0 * e.std_error + 0.01 * std::abs(oracle))
            << y << ": " << e.mean << " +- " << e.std_error << " vs " << oracle;
    }
}

TEST(Integrated, LatticeAndConditionalAgree) {
    McConfig cfg = base(1500);
    cfg.rule = HittingRule::axis(1.0).with_budget(4.0);
    cfg.cells_per_unit = 32;
    cfg.integrated = IntegratedMethod::conditional;
    const McEstimate cond = estimate_integrated(cfg, 0.5, 0.5);
    cfg.integrated = IntegratedMethod::lattice;
    const McEstimate lat = estimate_integrated(cfg, 0.5, 0.5);
    const double oracle = conditional_integrated_oracle(0.5, 0.5, 1.0, 4.0);
    EXPECT_LE(std::abs(cond.mean - oracle), 3.0 * cond.std_error + 0.01 * std::abs(oracle));
    EXPECT_LE(std::abs(lat.mean - oracle), 3.0 * lat.std_error + 0.03 * std::abs(oracle));
}

TEST(Integrated, DiagonalUsesLattice) {
    McConfig cfg = base(200);
    cfg.rule = HittingRule::diagonal(1.0).with_budget(2.0);
    cfg.cells_per_unit = 16;
    EXPECT_NO_THROW(estimate_integrated(cfg, 0.5, 0.3));
    cfg.integrated = IntegratedMethod::conditional;
    EXPECT_THROW(estimate_integrated(cfg, 0.5, 0.3), ConfigError);
}

TEST(Integrated, ResolutionWarning) {
    McConfig cfg = base(200);
    cfg.rule = HittingRule::axis(1.0).with_budget(2.0);
    cfg.cells_per_unit = 4;
    cfg.integrated = IntegratedMethod::lattice;
    const McEstimate e = estimate_integrated(cfg, 0.5, 0.3);
    ASSERT_TRUE(e.warning.has_value());
}

TEST(Martingale, Identity) {
    McConfig cfg = base(20000);
    cfg.grid = GridSpec{2.0, 1.0, 32, 16};
    EXPECT_EQ(check_exponential_martingale(cfg, 0.0, 1.0, 1.0).mean, 1.0);
    EXPECT_TRUE(check_exponential_martingale(cfg, 1.0, 1.0, 1.0).within(1.0, 3.0));
    EXPECT_TRUE(check_exponential_martingale(cfg, 0.5, 2.0, 1.0).within(1.0, 3.0));
    EXPECT_THROW(check_exponential_martingale(cfg, 1.0, 3.0, 1.0), DomainError);
}

TEST(Isometry, DeterministicIntegrands) {
    McConfig cfg = base(20000);
    cfg.grid = GridSpec{1.0, 1.0, 16, 16};
    const auto [l1, r1] = check_isometry(cfg, [](double, double) { return 1.0; }, 1.0, 1.0);
    EXPECT_NEAR(r1.mean, 1.0, 1e-14);
    EXPECT_TRUE(l1.within(r1.mean, 3.0));
    const auto [l2, r2] = check_isometry(cfg, [](double s, double a) { return s * a; }, 1.0, 1.0);
    EXPECT_NEAR(r2.mean, 1.0 / 9.0, 2e-3);
    EXPECT_TRUE(l2.within(r2.mean, 3.0));
    const double e = 0.5 * (1 - std::exp(-2.0));
    const auto [l3, r3] = check_isometry(cfg, [](double s, double a) { return std::exp(-s - a); }, 1.0, 1.0);
    EXPECT_NEAR(r3.mean, e * e, 2e-3);
    EXPECT_TRUE(l3.within(r3.mean, 3.0));
}

TEST(SecondMoment, TimesSpace) {
    McConfig cfg = base(20000);
    cfg.grid = GridSpec{2.0, 1.0, 16, 16};
    EXPECT_EQ(check_second_moment(cfg, 0.0, 0.7).mean, 0.0);
    EXPECT_TRUE(check_second_moment(cfg, 1.0, 1.0).within(1.0, 3.0));
    EXPECT_TRUE(check_second_moment(cfg, 2.0, 0.5).within(1.0, 3.0));
}

TEST(SheetChecks, WorkerIndependent) {
    McConfig a = base(4000, 1), b = base(4000, 4);
    a.grid = b.grid = GridSpec{1.0, 1.0, 8, 8};
    expect_identical(check_second_moment(a, 1.0, 1.0), check_second_moment(b, 1.0, 1.0));
}
