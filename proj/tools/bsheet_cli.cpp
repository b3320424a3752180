// bsheet_cli: experiments on Brownian-sheet stopping problems.
// Exit codes: 0 pass, 1 check failure, 2 configuration error.

#include <bsheet/bsheet.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;
using namespace bsheet;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfig = 2;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& text, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t\r");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

double parse_number(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("not a number: " + s);
}

std::vector<double> parse_numbers(const std::string& text) {
    std::vector<double> out;
    for (const auto& s : split(text)) out.push_back(parse_number(s));
    if (out.empty()) throw ConfigError("empty list");
    return out;
}

std::uint64_t env_seed() {
    if (const char* s = std::getenv("BSHEET_SEED")) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw ConfigError(std::string("BSHEET_SEED is not an integer: ") + s);
        }
    }
    return RngPolicy{}.seed;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

void print_warning(const std::string& what, const McEstimate& e) {
    if (e.warning) std::cerr << "warning (" << what << "): " << *e.warning << "\n";
}

struct Common {
    std::uint64_t seed = 7;
    unsigned workers = 0;
    std::string manifest;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "RNG seed (default: $BSHEET_SEED or 7)");
    sub->add_option("--workers", c.workers, "worker threads, 0 = all cores");
    sub->add_option("--manifest", c.manifest, "write the run manifest to this file");
    sub->add_option("--config", "key=value file; flags override it");
}

json manifest_for(const CLI::App* sub, const Common& c) {
    json params = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (name == "help" || name == "config" || name == "manifest") continue;
        if (opt->get_expected_min() == 0)
            params[name] = opt->count() > 0 && opt->as<bool>();
        else
            params[name] = opt->count() > 0 ? opt->results().back() : opt->get_default_str();
    }
    return json{{"command", sub->get_name()},
                {"parameters", params},
                {"seed", c.seed},
                {"timestamp", utc_now()},
                {"version", kVersion}};
}

McConfig mc_config(std::size_t n, const Common& c) {
    McConfig cfg;
    cfg.n = n;
    cfg.rng.seed = c.seed;
    cfg.workers = c.workers;
    return cfg;
}

// laplace ------------------------------------------------------------------

struct LaplaceArgs {
    std::string beta = "1";
    std::string y = "1";
    std::string rules = "axis:1";
    std::size_t n = 20000;
    double budget = 0.0;
    std::string path = "exact";
    bool antithetic = false;
};

int run_laplace(const LaplaceArgs& a, const Common& c) {
    McConfig cfg = mc_config(a.n, c);
    cfg.antithetic = a.antithetic;
    if (a.path == "exact")
        cfg.path = PathMode::exact;
    else if (a.path == "lattice")
        cfg.path = PathMode::lattice;
    else
        throw ConfigError("path must be exact or lattice");
    std::vector<HittingRule> rules;
    for (const auto& r : split(a.rules)) rules.push_back(parse_rule(r).with_budget(a.budget));
    const auto betas = parse_numbers(a.beta);
    const auto ys = parse_numbers(a.y);
    cfg.rule = rules.front();
    cfg.validate();

    bool ok = true;
    std::printf("beta,y,rule,estimate,stderr,target,z_score,censored\n");
    for (double beta : betas)
        for (double y : ys)
            for (const auto& rule : rules) {
                cfg.rule = rule;
                const McEstimate e = estimate_laplace(cfg, beta, y);
                const double target = std::exp(-beta * std::abs(y));
                const double z = e.z_score(target);
                ok = ok && std::abs(z) <= 3.0;
                print_warning(rule.name(), e);
                std::printf("%s,%s,%s,%s,%s,%s,%s,%zu\n", num(beta).c_str(), num(y).c_str(), rule.name().c_str(),
                            num(e.mean).c_str(), num(e.std_error).c_str(), num(target).c_str(), num(z).c_str(),
                            e.censored);
            }
    return ok ? kPass : kFail;
}

// thresholds ---------------------------------------------------------------

struct ThresholdArgs {
    double rho = 0.5;
    std::string reward = "linear";
};

int run_thresholds(const ThresholdArgs& a, const Common&) {
    const DiscountConfig cfg{a.rho};
    cfg.validate();
    const Reward reward = parse_reward(a.reward);
    json out;
    out["rho"] = a.rho;
    out["reward"] = reward.label;
    if (const auto hit = optimal_threshold_hitting(cfg, reward)) {
        out["hitting"] = *hit;
        out["phi_max"] = phi_hitting_value(cfg, reward, *hit);
    } else {
        out["hitting"] = nullptr;
        out["phi_max"] = nullptr;
        out["reason"] = "no maximizer";
    }
    const auto integrated = optimal_threshold_integrated(cfg);
    const auto [pos, neg] = one_param_baselines(cfg);
    out["integrated"] = integrated.y_star;
    out["z_star"] = integrated.z_star;
    out["F_max"] = integrated_value_F(cfg, integrated.y_star);
    out["baseline_pos"] = pos;
    out["baseline_neg"] = neg;
    // Two-parameter integrated threshold is positive, one-parameter one negative.
    out["sign_reversal"] = integrated.y_star > 0.0 && neg < 0.0;
    std::cout << out.dump(2) << "\n";
    return kPass;
}

// curves -------------------------------------------------------------------

struct CurveArgs {
    std::string curve = "F";
    double rho = 0.5;
    std::string reward = "linear";
    double lo = -2.0;
    double hi = 2.0;
    std::size_t points = 81;
};

int run_curves(const CurveArgs& a, const Common&) {
    if (a.points < 1) throw ConfigError("points must be >= 1");
    if (a.points > 1 && !(a.hi > a.lo)) throw ConfigError("curve grid needs hi > lo");
    const auto ys = linspace(a.lo, a.hi, a.points);
    const ValueCurve curve = sample_curve(parse_curve(a.curve), DiscountConfig{a.rho}, parse_reward(a.reward), ys);
    std::printf("y,value\n");
    for (std::size_t i = 0; i < curve.ys.size(); ++i)
        std::printf("%s,%s\n", num(curve.ys[i]).c_str(), num(curve.values[i]).c_str());
    return kPass;
}

// identities ---------------------------------------------------------------

struct IdentityArgs {
    std::size_t n = 100000;
    double beta = 1.0;
    int nt = 64;
    int nx = 64;
    double t_max = 2.0;
    double x_max = 1.0;
};

int run_identities(const IdentityArgs& a, const Common& c) {
    if (a.n < 1000) throw ConfigError("identity suite needs n >= 1000");
    McConfig cfg = mc_config(a.n, c);
    cfg.grid = GridSpec{a.t_max, a.x_max, a.nt, a.nx};
    cfg.validate();

    json checks = json::array();
    bool ok = true;
    auto record = [&](const std::string& name, const McEstimate& e, double target, json extra = json::object()) {
        const double z = e.z_score(target);
        const bool pass = std::abs(z) <= 3.0;
        ok = ok && pass;
        print_warning(name, e);
        json row{{"name", name},   {"estimate", e.mean}, {"stderr", e.std_error},
                 {"target", target}, {"z_score", z},     {"passed", pass}};
        row.update(extra);
        checks.push_back(row);
    };

    record("martingale beta=" + num(a.beta) + " (1,1)", check_exponential_martingale(cfg, a.beta, 1.0, 1.0), 1.0);
    record("martingale beta=" + num(a.beta / 2) + " (2,1)",
           check_exponential_martingale(cfg, a.beta / 2, 2.0, 1.0), 1.0);

    struct Phi {
        const char* name;
        Integrand f;
        double continuum;
    };
    const double e2 = 0.5 * (1.0 - std::exp(-2.0));
    const std::vector<Phi> phis = {
        {"isometry phi=1", [](double, double) { return 1.0; }, 1.0},
        {"isometry phi=s*a", [](double s, double x) { return s * x; }, 1.0 / 9.0},
        {"isometry phi=exp(-s-a)", [](double s, double x) { return std::exp(-s - x); }, e2 * e2},
    };
    for (const auto& phi : phis) {
        const auto [left, right] = check_isometry(cfg, phi.f, 1.0, 1.0);
        record(phi.name, left, right.mean, json{{"continuum", phi.continuum}});
    }

    record("second moment (1,1)", check_second_moment(cfg, 1.0, 1.0), 1.0);
    record("second moment (2,0.5)", check_second_moment(cfg, 2.0, 0.5), 1.0);

    std::cout << json{{"checks", checks}, {"passed", ok}}.dump(2) << "\n";
    return ok ? kPass : kFail;
}

// majorant -----------------------------------------------------------------

struct MajorantArgs {
    std::string shape = "call";
    double lo = 0.0;
    double hi = 2.0;
    std::size_t nodes = 256;
    double strike = 1.0;
    double at = std::numeric_limits<double>::quiet_NaN();
    int n_max = 50;
    double sigma = 1.0;
    std::string epsilon = "0";
    std::string caps;
    double margin = 0.1;
    double gap_limit = 0.05;
    std::string summary;
};

GridFunction majorant_input(const MajorantArgs& a) {
    if (a.nodes < 2 || !(a.hi > a.lo)) throw ConfigError("majorant grid needs hi > lo and at least two nodes");
    if (a.shape == "call") return GridFunction::sample(a.lo, a.hi, a.nodes, [&](double y) { return std::max(y - a.strike, 0.0); });
    if (a.shape == "concave")
        return GridFunction::sample(a.lo, a.hi, a.nodes, [](double y) { return std::max(2.0 - (y - 1.0) * (y - 1.0), 0.0); });
    if (a.shape == "zero") return GridFunction::sample(a.lo, a.hi, a.nodes, [](double) { return 0.0; });
    if (a.shape == "spike") {
        const double at = std::isnan(a.at) ? a.lo + (a.hi - a.lo) / 3.0 : a.at;
        GridFunction g = GridFunction::sample(a.lo, a.hi, a.nodes, [](double) { return 0.0; });
        const double pos = std::round((at - a.lo) / g.step());
        if (pos < 1.0 || pos > static_cast<double>(a.nodes - 2)) throw ConfigError("spike must sit at an interior node");
        g.values[static_cast<std::size_t>(pos)] = 1.0;
        return g;
    }
    throw ConfigError("shape must be call, spike, concave or zero");
}

int run_majorant(const MajorantArgs& a, const Common&) {
    const GridFunction g = majorant_input(a);
    const auto epsilons = parse_numbers(a.epsilon);
    for (std::size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] > epsilons[i - 1])) throw ConfigError("epsilon list must be increasing");
    SdeConfig sde;
    sde.sigma = a.sigma;

    const GridFunction envelope = least_concave_majorant(g);
    const auto seq = iterate_gn(g, sde, a.n_max);
    const GridFunction& last = seq.back();
    const double gap = interior_gap(last, envelope, a.margin);
    const CheckReport tri = trichotomy_check(g, envelope);

    std::vector<ContinuationRegion> regions;
    for (double eps : epsilons) regions.push_back(continuation_region(g, envelope, eps));
    bool nested = true;
    for (std::size_t r = 1; r < regions.size(); ++r)
        for (std::size_t k = 0; k < g.size(); ++k)
            if (regions[r].mask[k] && !regions[r - 1].mask[k]) nested = false;

    std::printf("y,g,ghat_envelope,g_n_final,in_continuation\n");
    for (std::size_t k = 0; k < g.size(); ++k)
        std::printf("%s,%s,%s,%s,%d\n", num(g.ys[k]).c_str(), num(g.values[k]).c_str(), num(envelope.values[k]).c_str(),
                    num(last.values[k]).c_str(), regions.front().mask[k] ? 1 : 0);

    json region_json = json::array();
    for (const auto& region : regions) {
        json intervals = json::array();
        for (const auto& [first, lastk] : region_intervals(region)) intervals.push_back({g.ys[first], g.ys[lastk]});
        region_json.push_back({{"epsilon", region.epsilon}, {"nodes", region.count()}, {"intervals", intervals}});
    }
    json summary{{"shape", a.shape},
                 {"nodes", a.nodes},
                 {"n_max", a.n_max},
                 {"interior_gap", gap},
                 {"gap_limit", a.gap_limit},
                 {"trichotomy", tri.passed},
                 {"regions", region_json},
                 {"regions_nested", nested}};
    bool ok = gap < a.gap_limit && tri.passed && nested;
    if (!a.caps.empty()) {
        const auto caps = parse_numbers(a.caps);
        const auto report = nested_regions_check(g, caps);
        json capped = json::array();
        for (std::size_t i = 0; i < caps.size(); ++i) capped.push_back({{"cap", caps[i]}, {"nodes", report.regions[i].count()}});
        summary["capped_regions"] = capped;
        summary["capped_nested"] = report.passed;
        if (!report.passed) summary["capped_violation"] = report.message;
        ok = ok && report.passed;
    }
    summary["passed"] = ok;
    if (a.summary.empty()) {
        std::cerr << summary.dump() << "\n";
    } else {
        std::ofstream out(a.summary);
        if (!out) throw ConfigError("cannot write summary file " + a.summary);
        out << summary.dump(2) << "\n";
    }
    return ok ? kPass : kFail;
}

// integrated ---------------------------------------------------------------

struct IntegratedArgs {
    double rho = 0.5;
    std::string y = "star";
    std::string rule = "axis:1";
    std::size_t n = 20000;
    int cells = 256;
    std::string method = "automatic";
    double budget = 0.0;
    double allowance = 0.02;
};

int run_integrated(const IntegratedArgs& a, const Common& c) {
    const DiscountConfig disc{a.rho};
    disc.validate();
    McConfig cfg = mc_config(a.n, c);
    cfg.rule = parse_rule(a.rule).with_budget(a.budget);
    cfg.cells_per_unit = a.cells;
    if (a.method == "automatic")
        cfg.integrated = IntegratedMethod::automatic;
    else if (a.method == "conditional")
        cfg.integrated = IntegratedMethod::conditional;
    else if (a.method == "lattice")
        cfg.integrated = IntegratedMethod::lattice;
    else
        throw ConfigError("method must be automatic, conditional or lattice");
    cfg.validate();

    std::vector<double> ys;
    for (const auto& s : split(a.y))
        ys.push_back(s == "star" ? optimal_threshold_integrated(disc).y_star : parse_number(s));
    if (ys.empty()) throw ConfigError("empty level list");

    bool ok = true;
    std::printf("y,estimate,stderr,target_F,z_score\n");
    for (double y : ys) {
        const McEstimate e = estimate_integrated(cfg, a.rho, y);
        const double target = integrated_value_F(disc, y);
        const double z = e.z_score(target);
        const double tol = std::max(3.0 * e.std_error, a.allowance * std::abs(target));
        ok = ok && std::abs(e.mean - target) <= tol;
        print_warning("y=" + num(y), e);
        std::printf("%s,%s,%s,%s,%s\n", num(y).c_str(), num(e.mean).c_str(), num(e.std_error).c_str(),
                    num(target).c_str(), num(z).c_str());
    }
    return ok ? kPass : kFail;
}

// driver -------------------------------------------------------------------

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ConfigError("config line is not key=value: " + line);
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

// Config-file entries are spliced in before the user's flags; every option
// keeps its last value, so flags win.
std::vector<std::string> apply_config(std::vector<std::string> args) {
    for (std::size_t i = 1; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size())
            path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0)
            path = args[i].substr(9);
        else
            continue;
        std::vector<std::string> extra;
        for (const auto& [k, v] : read_config_file(path)) extra.push_back("--" + k + "=" + v);
        if (args.size() > 1) args.insert(args.begin() + 2, extra.begin(), extra.end());
        break;
    }
    return args;
}

std::vector<std::string> replay_args(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read manifest " + path);
    json m;
    try {
        in >> m;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!m.contains("command") || !m.contains("parameters")) throw ConfigError("manifest lacks command or parameters");
    std::vector<std::string> args{"bsheet_cli", m["command"].get<std::string>()};
    for (const auto& [key, value] : m["parameters"].items()) {
        if (value.is_boolean())
            args.push_back("--" + key + "=" + (value.get<bool>() ? "true" : "false"));
        else if (value.is_string())
            args.push_back("--" + key + "=" + value.get<std::string>());
        else
            args.push_back("--" + key + "=" + value.dump());
    }
    return args;
}

int run(std::vector<std::string> args) {
    CLI::App app{"Brownian-sheet optimal stopping experiments"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common common;
    common.seed = env_seed();

    LaplaceArgs la;
    auto* laplace = app.add_subcommand("laplace", "Monte Carlo check of E[exp(-beta^2 tau1 tau2 / 2)] = exp(-beta |y|)");
    laplace->add_option("--beta", la.beta, "comma-separated beta values");
    laplace->add_option("--y", la.y, "comma-separated levels");
    laplace->add_option("--rule", la.rules, "comma-separated rules, axis:<x0> or diagonal:<c>");
    laplace->add_option("--n", la.n, "replications");
    laplace->add_option("--budget", la.budget, "cap on tau1*tau2, 0 = default");
    laplace->add_option("--path", la.path, "exact or lattice");
    laplace->add_flag("--antithetic", la.antithetic, "antithetic sheet pairs");
    add_common(laplace, common);

    ThresholdArgs th;
    auto* thresholds = app.add_subcommand("thresholds", "closed-form thresholds and maxima");
    thresholds->add_option("--rho", th.rho, "discount rate");
    thresholds->add_option("--reward", th.reward, "linear, power:<n> or exp:<k>");
    add_common(thresholds, common);

    CurveArgs cu;
    auto* curves = app.add_subcommand("curves", "sampled value functions as CSV");
    curves->add_option("--curve", cu.curve, "phi, F, baseline_hitting or baseline_integrated");
    curves->add_option("--rho", cu.rho, "discount rate");
    curves->add_option("--reward", cu.reward, "reward for phi");
    curves->add_option("--lo", cu.lo, "first level");
    curves->add_option("--hi", cu.hi, "last level");
    curves->add_option("--points", cu.points, "number of levels");
    add_common(curves, common);

    IdentityArgs id;
    auto* identities = app.add_subcommand("identities", "martingale, isometry and second-moment checks");
    identities->add_option("--n", id.n, "replications");
    identities->add_option("--beta", id.beta, "martingale beta");
    identities->add_option("--nt", id.nt, "lattice cells along t");
    identities->add_option("--nx", id.nx, "lattice cells along x");
    identities->add_option("--t-max", id.t_max, "lattice t horizon");
    identities->add_option("--x-max", id.x_max, "lattice x horizon");
    add_common(identities, common);

    MajorantArgs ma;
    auto* majorant = app.add_subcommand("majorant", "concave majorant, g_n iteration and continuation regions");
    majorant->add_option("--shape", ma.shape, "call, spike, concave or zero");
    majorant->add_option("--lo", ma.lo, "left end of the state grid");
    majorant->add_option("--hi", ma.hi, "right end of the state grid");
    majorant->add_option("--nodes", ma.nodes, "grid nodes");
    majorant->add_option("--strike", ma.strike, "call strike");
    majorant->add_option("--at", ma.at, "spike location (default: one third in)");
    majorant->add_option("--n-max", ma.n_max, "g_n iterations");
    majorant->add_option("--sigma", ma.sigma, "diffusion coefficient");
    majorant->add_option("--epsilon", ma.epsilon, "comma-separated increasing tolerances");
    majorant->add_option("--caps", ma.caps, "comma-separated increasing caps N for D_N");
    majorant->add_option("--margin", ma.margin, "excluded boundary fraction for the gap");
    majorant->add_option("--gap-limit", ma.gap_limit, "largest accepted interior gap");
    majorant->add_option("--summary", ma.summary, "write the JSON summary here instead of stderr");
    add_common(majorant, common);

    IntegratedArgs in;
    auto* integrated = app.add_subcommand("integrated", "Monte Carlo integrated discounted functional vs F(y)");
    integrated->add_option("--rho", in.rho, "discount rate");
    integrated->add_option("--y", in.y, "comma-separated levels; 'star' is the maximizer of F");
    integrated->add_option("--rule", in.rule, "axis:<x0> or diagonal:<c>");
    integrated->add_option("--n", in.n, "replications");
    integrated->add_option("--cells", in.cells, "cells per unit length");
    integrated->add_option("--method", in.method, "automatic, conditional or lattice");
    integrated->add_option("--budget", in.budget, "cap on tau1*tau2, 0 = default");
    integrated->add_option("--allowance", in.allowance, "relative discretization allowance");
    add_common(integrated, common);

    std::string replay_path;
    auto* replay = app.add_subcommand("replay", "re-run a command from its manifest");
    replay->add_option("manifest", replay_path, "manifest JSON file")->required();

    try {
        args = apply_config(std::move(args));
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    if (replay->parsed()) return run(replay_args(replay_path));

    CLI::App* chosen = app.get_subcommands().front();
    if (!common.manifest.empty()) {
        std::ofstream out(common.manifest);
        if (!out) throw ConfigError("cannot write manifest " + common.manifest);
        out << manifest_for(chosen, common).dump(2) << "\n";
    }

    if (laplace->parsed()) return run_laplace(la, common);
    if (thresholds->parsed()) return run_thresholds(th, common);
    if (curves->parsed()) return run_curves(cu, common);
    if (identities->parsed()) return run_identities(id, common);
    if (majorant->parsed()) return run_majorant(ma, common);
    if (integrated->parsed()) return run_integrated(in, common);
    return kConfig;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(std::vector<std::string>(argv, argv + argc));
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
    } catch (const BracketError& e) {
        std::cerr << "bracket error: " << e.what() << "\n";
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << " (best " << e.best_estimate() << ")\n";
        return kFail;
    }
    return kConfig;
}
