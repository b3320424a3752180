#include <gtest/gtest.h>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CliResult {
    int code;
    std::string out;
};

// Runs the CLI through the shell; stderr is discarded unless redirected in `args`.
CliResult cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + BSHEET_CLI_PATH + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, {}};
    std::string out;
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("bsheet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, ThresholdsJson) {
    const CliResult r = cli("thresholds --rho 0.5");
    ASSERT_EQ(r.code, 0);
    const json j = json::parse(r.out);
    EXPECT_DOUBLE_EQ(j["hitting"].get<double>(), 1.0);
    EXPECT_NEAR(j["integrated"].get<double>(), 0.434818, 1e-5);
    EXPECT_DOUBLE_EQ(j["baseline_neg"].get<double>(), -1.0);
    EXPECT_TRUE(j["sign_reversal"].get<bool>());
}

TEST_F(CliTest, ThresholdsWithoutMaximizer) {
    const CliResult r = cli("thresholds --rho 0.5 --reward exp:1");
    ASSERT_EQ(r.code, 0);
    const json j = json::parse(r.out);
    EXPECT_TRUE(j["hitting"].is_null());
    EXPECT_EQ(j["reason"], "no maximizer");
}

TEST_F(CliTest, ConfigurationErrorsExitTwo) {
    EXPECT_EQ(cli("thresholds --rho 0").code, 2);
    EXPECT_EQ(cli("thresholds --rho -1").code, 2);
    EXPECT_EQ(cli("thresholds --reward cubic").code, 2);
    EXPECT_EQ(cli("laplace --n 1").code, 2);
    EXPECT_EQ(cli("identities --n 2").code, 2);
    EXPECT_EQ(cli("laplace --n 11 --antithetic").code, 2);
    EXPECT_EQ(cli("laplace --rule axis:0").code, 2);
    EXPECT_EQ(cli("nosuchcommand").code, 2);
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("curves --curve F --lo 0.1 --hi 2 --points 1x").code, 2);
    EXPECT_EQ(cli("majorant --shape triangle").code, 2);
}

TEST_F(CliTest, CurvesCsv) {
    const CliResult r = cli("curves --curve F --lo -1 --hi 1 --points 3");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "y,value");
    int rows = 0;
    double mid = 1.0;
    while (std::getline(in, line)) {
        if (rows == 1) mid = std::stod(line.substr(line.find(',') + 1));
        ++rows;
    }
    EXPECT_EQ(rows, 3);
    EXPECT_EQ(mid, 0.0);
    EXPECT_EQ(cli("curves --curve phi --lo 0 --hi 1 --points 3").code, 2);
}

TEST_F(CliTest, LaplaceCsvAndPass) {
    const CliResult r = cli("laplace --beta 1 --y 0.5 --n 2000 --workers 2");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out.rfind("beta,y,rule,estimate,stderr,target,z_score,censored\n", 0), 0u);
    EXPECT_NE(r.out.find("axis:1"), std::string::npos);
}

TEST_F(CliTest, WorkerCountDoesNotChangeOutput) {
    const CliResult a = cli("laplace --beta 1 --y 0.7 --n 1000 --workers 1");
    const CliResult b = cli("laplace --beta 1 --y 0.7 --n 1000 --workers 3");
    EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, SeedFromEnvironmentAndFlag) {
    const CliResult seven = cli("laplace --beta 1 --y 0.7 --n 1000");
    const CliResult env7 = cli("laplace --beta 1 --y 0.7 --n 1000", "BSHEET_SEED=7");
    const CliResult env8 = cli("laplace --beta 1 --y 0.7 --n 1000", "BSHEET_SEED=8");
    const CliResult flag8 = cli("laplace --beta 1 --y 0.7 --n 1000 --seed 8", "BSHEET_SEED=99");
    EXPECT_EQ(seven.out, env7.out);
    EXPECT_NE(seven.out, env8.out);
    EXPECT_EQ(env8.out, flag8.out);
    EXPECT_EQ(cli("laplace --n 1000", "BSHEET_SEED=abc").code, 2);
}

TEST_F(CliTest, ManifestReplayIsBitIdentical) {
    const fs::path manifest = dir_ / "run.json";
    const CliResult first = cli("laplace --beta 2 --y 0.25 --n 1500 --seed 21 --manifest " + manifest.string());
    ASSERT_EQ(first.code, 0);
    const json m = json::parse(slurp(manifest));
    EXPECT_EQ(m["command"], "laplace");
    EXPECT_EQ(m["seed"], 21);
    EXPECT_EQ(m["parameters"]["n"], "1500");
    EXPECT_TRUE(m.contains("timestamp"));
    EXPECT_TRUE(m.contains("version"));
    const CliResult again = cli("replay " + manifest.string());
    EXPECT_EQ(again.code, 0);
    EXPECT_EQ(again.out, first.out);
    const CliResult other_env = cli("replay " + manifest.string(), "BSHEET_SEED=3");
    EXPECT_EQ(other_env.out, first.out);
}

TEST_F(CliTest, ManifestRecordsDefaultsAndFlags) {
    const fs::path manifest = dir_ / "m.json";
    ASSERT_EQ(cli("laplace --n 1000 --antithetic --manifest " + manifest.string()).code, 0);
    const json m = json::parse(slurp(manifest));
    EXPECT_EQ(m["parameters"]["antithetic"], true);
    EXPECT_EQ(m["parameters"]["beta"], "1");
    EXPECT_EQ(m["parameters"]["path"], "exact");
}

TEST_F(CliTest, ReplayErrors) {
    EXPECT_EQ(cli("replay " + (dir_ / "missing.json").string()).code, 2);
    std::ofstream(dir_ / "bad.json") << "{not json";
    EXPECT_EQ(cli("replay " + (dir_ / "bad.json").string()).code, 2);
}

TEST_F(CliTest, ConfigFileWithFlagPrecedence) {
    const fs::path cfg = dir_ / "run.cfg";
    std::ofstream(cfg) << "# thresholds\nrho = 2\nreward = power:3\n";
    const json from_file = json::parse(cli("thresholds --config " + cfg.string()).out);
    EXPECT_DOUBLE_EQ(from_file["rho"].get<double>(), 2.0);
    EXPECT_DOUBLE_EQ(from_file["hitting"].get<double>(), 1.5);
    const json overridden = json::parse(cli("thresholds --config " + cfg.string() + " --rho 0.5").out);
    EXPECT_DOUBLE_EQ(overridden["rho"].get<double>(), 0.5);
    EXPECT_DOUBLE_EQ(overridden["hitting"].get<double>(), 3.0);
    const json flag_first = json::parse(cli("thresholds --rho 0.5 --config " + cfg.string()).out);
    EXPECT_DOUBLE_EQ(flag_first["rho"].get<double>(), 0.5);
    std::ofstream(dir_ / "broken.cfg") << "rho 2\n";
    EXPECT_EQ(cli("thresholds --config " + (dir_ / "broken.cfg").string()).code, 2);
}

TEST_F(CliTest, MajorantCallPasses) {
    const fs::path summary = dir_ / "summary.json";
    const CliResult r = cli("majorant --shape call --nodes 128 --epsilon 0,0.05,0.1 --caps 0.25,0.5 --summary " +
                      summary.string());
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("y,g,ghat_envelope,g_n_final,in_continuation\n", 0), 0u);
    const json s = json::parse(slurp(summary));
    EXPECT_LT(s["interior_gap"].get<double>(), 0.05);
    EXPECT_TRUE(s["trichotomy"].get<bool>());
    EXPECT_TRUE(s["regions_nested"].get<bool>());
    EXPECT_TRUE(s["capped_nested"].get<bool>());
    EXPECT_EQ(s["regions"].size(), 3u);
}

TEST_F(CliTest, MajorantGapLimitControlsExit) {
    EXPECT_EQ(cli("majorant --shape call --nodes 64 --n-max 0 --gap-limit 0.05").code, 1);
    EXPECT_EQ(cli("majorant --shape zero --nodes 64").code, 0);
}

TEST_F(CliTest, IntegratedCsv) {
    const CliResult r = cli("integrated --y 0 --n 100");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("y,estimate,stderr,target_F,z_score\n", 0), 0u);
    EXPECT_EQ(cli("integrated --method fancy").code, 2);
}

TEST_F(CliTest, IdentitiesJson) {
    const CliResult r = cli("identities --n 4000 --nt 16 --nx 16");
    const json j = json::parse(r.out);
    EXPECT_EQ(j["checks"].size(), 7u);
    EXPECT_EQ(r.code, j["passed"].get<bool>() ? 0 : 1);
}
