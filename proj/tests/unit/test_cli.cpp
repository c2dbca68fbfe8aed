// Copyright 2026 The polpath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the command-line tool as a subprocess.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = POLPATH_CLI_PATH;
const fs::path kGolden = POLPATH_GOLDEN_DIR;
const fs::path kConfigs = POLPATH_CONFIG_DIR;

struct Outcome {
    int exit_code;
    std::string out;
};

std::string quote(const std::string &s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

/// Runs the CLI with stderr discarded; stdout is captured.
Outcome run(const std::vector<std::string> &args) {
    std::string cmd = quote(kCli);
    for (const auto &a : args) cmd += " " + quote(a);
    cmd += " 2>/dev/null";
    FILE *p = popen(cmd.c_str(), "r");
    if (p == nullptr) return {-1, ""};
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> listing(const fs::path &dir) {
    std::vector<std::string> names;
    for (const auto &e : fs::directory_iterator(dir)) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

class CliTest : public ::testing::Test {
   protected:
    void SetUp() override {
        const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
        scratch_ = fs::temp_directory_path() / ("polpath_cli_" + std::string(info->name()) + "_" +
                                                std::to_string(::getpid()));
        fs::remove_all(scratch_);
        fs::create_directories(scratch_);
    }
    void TearDown() override { fs::remove_all(scratch_); }
    fs::path dir(const std::string &name) const { return scratch_ / name; }

    fs::path scratch_;
};

struct GoldenCase {
    std::string name;
    std::vector<std::string> args;
};

/// Mirrors tests/golden/regenerate.sh.
std::vector<GoldenCase> golden_cases() {
    const std::string c = kConfigs.string();
    return {
        {"pipeline_r059", {"pipeline", "--config", c + "/r059.json"}},
        {"pipeline_noisy",
         {"pipeline", "--config", c + "/noisy_r059.json", "--set", "alpha=0.3", "--set",
          "phi1=1.5707963267948966"}},
        {"sweep_counts", {"sweep", "--config", c + "/fringes_counts.json"}},
        {"tomography_shots", {"tomography", "--config", c + "/tomography_shots.json"}},
        {"mbqc_sample", {"mbqc", "--sample", "--seed", "7", "--set", "phi1=0.6", "--set", "phi2=-0.4"}},
    };
}

}  // namespace

TEST_F(CliTest, DefaultPipelineReportsUnitFidelity) {
    Outcome o = run({"pipeline", "--config", (kConfigs / "default.json").string(), "--out", dir("p").string()});
    ASSERT_EQ(o.exit_code, 0);
    EXPECT_NE(o.out.find("fidelity cluster3   1.000000"), std::string::npos) << o.out;
    EXPECT_NE(o.out.find("fidelity loop_state 1.000000"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir("p") / "summary.json"));
    EXPECT_TRUE(fs::exists(dir("p") / "checkpoint_loop.json"));
}

TEST_F(CliTest, UnbalancedPostSelectionProbability) {
    Outcome o = run({"pipeline", "--set", "bs_reflectivity=0.59", "--out", dir("p").string()});
    ASSERT_EQ(o.exit_code, 0);
    EXPECT_NE(o.out.find("post_selection_probability 0.5162"), std::string::npos) << o.out;
}

TEST_F(CliTest, MalformedConfigExitsTwoWithoutOutput) {
    const fs::path bad = dir("bad.json");
    std::ofstream(bad) << "{\"spec_version\": 1,";
    EXPECT_EQ(run({"pipeline", "--config", bad.string(), "--out", dir("out").string()}).exit_code, 2);
    EXPECT_FALSE(fs::exists(dir("out")));
    EXPECT_EQ(run({"pipeline", "--config", dir("missing.json").string(), "--out", dir("out").string()}).exit_code, 2);
    EXPECT_EQ(run({"pipeline", "--set", "no_such_key=1", "--out", dir("out").string()}).exit_code, 2);
    EXPECT_EQ(run({"pipeline", "--set", "missing_equals", "--out", dir("out").string()}).exit_code, 2);
    EXPECT_EQ(run({"teleport"}).exit_code, 2);
    EXPECT_EQ(run({}).exit_code, 2);
    EXPECT_FALSE(fs::exists(dir("out")));
}

TEST_F(CliTest, UnencodableStateExitsThree) {
    const fs::path cfg = dir("dom.json");
    std::ofstream(cfg) << R"({"spec_version": 1, "encoding": {"slots": [
      {"pol_qubit": 0, "modes": [{"path": "1", "pol": "H", "pol_bit": 1}, {"path": "1", "pol": "V", "pol_bit": 0}]},
      {"pol_qubit": 1, "path_qubit": 2, "modes": [
        {"path": "2", "pol": "H", "pol_bit": 0, "path_bit": 0},
        {"path": "2", "pol": "V", "pol_bit": 1, "path_bit": 1}]}]}})";
    EXPECT_EQ(run({"pipeline", "--config", cfg.string(), "--out", dir("out").string()}).exit_code, 3);
    EXPECT_FALSE(fs::exists(dir("out")));
}

TEST_F(CliTest, TwoPointGridExitsFour) {
    EXPECT_EQ(run({"sweep", "--set", "alphas=[0, 0.1]", "--out", dir("out").string()}).exit_code, 4);
    EXPECT_FALSE(fs::exists(dir("out")));
}

TEST_F(CliTest, SixteenFringeFiles) {
    Outcome o = run({"sweep", "--config", (kConfigs / "fringes_grid16.json").string(), "--out", dir("s").string()});
    ASSERT_EQ(o.exit_code, 0);
    auto names = listing(dir("s"));
    EXPECT_EQ(std::count_if(names.begin(), names.end(), [](const std::string &n) { return n.ends_with(".csv"); }),
              16);
    const std::string csv = slurp(dir("s") / "fringe_phi1_90_phi2_90.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "alpha_rad,expected_prob,oracle_prob");
    int rows = 0;
    while (std::getline(lines, line)) {
        double alpha, sim, oracle;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &alpha, &sim, &oracle), 3);
        EXPECT_NEAR(4 * sim, 4 * oracle, 1e-9);
        rows++;
    }
    EXPECT_EQ(rows, 64);
}

TEST_F(CliTest, TomographyFidelities) {
    Outcome ideal = run({"tomography", "--config", (kConfigs / "r059.json").string(), "--infinite-statistics",
                         "--out", dir("t").string()});
    ASSERT_EQ(ideal.exit_code, 0);
    EXPECT_NE(ideal.out.find("mle    F(singlet) 0.969  F(psi_prime) 1.000"), std::string::npos) << ideal.out;

    Outcome noisy = run({"tomography", "--config", (kConfigs / "noisy_r059.json").string(), "--out",
                         dir("n").string()});
    ASSERT_EQ(noisy.exit_code, 0);
    EXPECT_EQ(noisy.out.find("F(psi_prime) 1.000"), std::string::npos) << noisy.out;
}

TEST_F(CliTest, TomographyFromCountsFile) {
    ASSERT_EQ(run({"tomography", "--config", (kConfigs / "tomography_shots.json").string(), "--out",
                   dir("a").string()})
                  .exit_code,
              0);
    ASSERT_EQ(run({"tomography", "--counts", (dir("a") / "counts.csv").string(), "--config",
                   (kConfigs / "tomography_shots.json").string(), "--out", dir("b").string()})
                  .exit_code,
              0);
    EXPECT_EQ(slurp(dir("a") / "rho_mle.json"), slurp(dir("b") / "rho_mle.json"));
}

TEST_F(CliTest, MbqcBranchOverlap) {
    Outcome o = run({"mbqc", "--branch", "0,0", "--out", dir("m").string()});
    ASSERT_EQ(o.exit_code, 0);
    EXPECT_NE(o.out.find("min overlap 1.000000"), std::string::npos) << o.out;
    EXPECT_EQ(run({"mbqc", "--branch", "0,0", "--sample"}).exit_code, 2);
}

TEST_F(CliTest, SeedChangesSampledOutput) {
    const std::string cfg = (kConfigs / "fringes_counts.json").string();
    ASSERT_EQ(run({"sweep", "--config", cfg, "--seed", "1", "--out", dir("a").string()}).exit_code, 0);
    ASSERT_EQ(run({"sweep", "--config", cfg, "--seed", "2", "--out", dir("b").string()}).exit_code, 0);
    EXPECT_NE(slurp(dir("a") / "fringe_phi1_90_phi2_90.csv"), slurp(dir("b") / "fringe_phi1_90_phi2_90.csv"));
}

TEST_F(CliTest, RepeatedRunsAndThreadCountsAreByteIdentical) {
    const std::string cfg = (kConfigs / "fringes_counts.json").string();
    ASSERT_EQ(run({"sweep", "--config", cfg, "--set", "threads=1", "--out", dir("serial").string()}).exit_code, 0);
    ASSERT_EQ(run({"sweep", "--config", cfg, "--set", "threads=4", "--out", dir("parallel").string()}).exit_code, 0);
    ASSERT_EQ(listing(dir("serial")), listing(dir("parallel")));
    for (const auto &name : listing(dir("serial"))) {
        if (name == "config.json") continue;  // records the thread count
        EXPECT_EQ(slurp(dir("serial") / name), slurp(dir("parallel") / name)) << name;
    }
}

TEST_F(CliTest, GoldenOutputs) {
    for (const auto &g : golden_cases()) {
        std::vector<std::string> args = g.args;
        args.push_back("--out");
        args.push_back(dir(g.name).string());
        ASSERT_EQ(run(args).exit_code, 0) << g.name;
        const fs::path expected = kGolden / g.name;
        ASSERT_EQ(listing(dir(g.name)), listing(expected)) << g.name;
        for (const auto &name : listing(expected)) {
            EXPECT_EQ(slurp(dir(g.name) / name), slurp(expected / name)) << g.name << "/" << name;
        }
    }
}
