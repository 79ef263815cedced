#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run ncs(const std::string& args) {
    std::string cmd = std::string(NCS_TOOL) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string cfg(const std::string& name) { return (fs::path(NCS_CONFIG_DIR) / name).string(); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        std::random_device rd;
        dir = fs::temp_directory_path() / ("ncs_cli_" + std::to_string(rd()));
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string at(const std::string& leaf) const { return (dir / leaf).string(); }

    // Scalar run with the given edits applied line by line.
    std::string scalar_variant(const std::string& from, const std::string& to) const {
        std::string text = slurp(cfg("scalar.yaml"));
        auto pos = text.find(from);
        EXPECT_NE(pos, std::string::npos);
        text.replace(pos, from.size(), to);
        auto spec = text.find("spec: scalar_spec.yaml");
        if (spec != std::string::npos) text.replace(spec, 22, "spec: " + cfg("scalar_spec.yaml"));
        std::ofstream(dir / "run.yaml") << text;
        return at("run.yaml");
    }

    fs::path dir;
};

}  // namespace

TEST_F(Cli, DelaysReportsBurstRange) {
    auto r = ncs("delays " + cfg("vehicle_network.yaml") + " -o " + at("d"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("bits_pc = 28"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("bits_cp = 9"), std::string::npos);
    EXPECT_NE(r.out.find("N_min = 1"), std::string::npos);
    EXPECT_NE(r.out.find("N_max = 3"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "d" / "delays_summary.txt"));
}

TEST_F(Cli, DelaysMessageSizeOverride) {
    auto r = ncs("delays " + cfg("vehicle_network.yaml") + " --states 2 --inputs 2 -o " + at("d"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("bits_pc = 2"), std::string::npos) << r.out;
}

TEST_F(Cli, ShippedConfigsValidate) {
    for (const char* c : {"scalar.yaml", "surrogate.yaml", "vehicle_network.yaml"}) {
        auto r = ncs("validate " + cfg(c) + " -o " + at("v"));
        EXPECT_EQ(r.code, 0) << c << "\n" << r.out;
        EXPECT_NE(r.out.find("result = valid"), std::string::npos);
    }
}

TEST_F(Cli, ValidationFailureNamesCondition) {
    auto r = ncs("validate " + scalar_variant("theta: 0.85", "theta: 0.01") + " -o " + at("v"));
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_NE(r.out.find("violated controller_quantization"), std::string::npos) << r.out;
}

TEST_F(Cli, ConfigErrorIsValidationExit) {
    auto r = ncs("validate " + scalar_variant("lambda: -2", "lambda: [1") + " -o " + at("v"));
    EXPECT_EQ(r.code, 2) << r.out;
    EXPECT_NE(r.out.find("line"), std::string::npos) << r.out;
}

TEST_F(Cli, EmptySynthesisExit) {
    auto path = scalar_variant("spec: scalar_spec.yaml",
                               "spec:\n  states: [{name: A, point: [-1]}, {name: B, point: [1]}]\n"
                               "  transitions: [[A, B], [B, A]]\n  initial: [A]");
    std::string text = slurp(path);
    text.replace(text.find("inputs: [[-0.5], [0], [0.5]]"), 28, "inputs: [[0]]");
    std::ofstream(path) << text;
    auto r = ncs("synthesize " + path + " -o " + at("s"));
    EXPECT_EQ(r.code, 3) << r.out;
}

TEST_F(Cli, DemoVehicleEmptyAtCoarseGrid) {
    auto r = ncs("demo-vehicle --points 21 --epsilon 0.2 --jobs 2 -o " + at("demo"));
    EXPECT_EQ(r.code, 3) << r.out;
    EXPECT_NE(r.out.find("synthesis = empty"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "demo" / "vehicle_spec.yaml"));
    auto bad = ncs("demo-vehicle --points 21 -o " + at("demo"));
    EXPECT_EQ(bad.code, 2) << bad.out;
}

TEST_F(Cli, SynthesizeThenSimulateWithSavedController) {
    auto s = ncs("synthesize " + cfg("scalar.yaml") + " -o " + at("s"));
    ASSERT_EQ(s.code, 0) << s.out;
    EXPECT_NE(s.out.find("witnesses = ok"), std::string::npos);
    auto r = ncs("simulate " + cfg("scalar.yaml") + " --controller " + at("s/controller.txt") + " -o " + at("r"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("passed = 1"), std::string::npos);
}

TEST_F(Cli, SimulationIsDeterministic) {
    for (const char* tag : {"a", "b"}) {
        auto r = ncs("simulate " + cfg("surrogate.yaml") + " --jobs 2 --runs 2 --seed 11 -o " + at(tag));
        ASSERT_EQ(r.code, 0) << r.out;
    }
    for (const char* f : {"samples_000.csv", "iterations_000.csv", "samples_001.csv", "iterations_001.csv"})
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    EXPECT_NE(slurp(dir / "a" / "samples_000.csv"), slurp(dir / "a" / "samples_001.csv"));
}

TEST_F(Cli, JobsDoNotChangeTheController) {
    ASSERT_EQ(ncs("synthesize " + cfg("surrogate.yaml") + " --jobs 1 -o " + at("a")).code, 0);
    ASSERT_EQ(ncs("synthesize " + cfg("surrogate.yaml") + " --jobs 4 -o " + at("b")).code, 0);
    EXPECT_EQ(slurp(dir / "a" / "controller.txt"), slurp(dir / "b" / "controller.txt"));
}

TEST_F(Cli, VerifyAcceptsAndRejects) {
    ASSERT_EQ(ncs("simulate " + cfg("surrogate.yaml") + " --runs 1 -o " + at("t")).code, 0);
    auto ok = ncs("verify " + cfg("surrogate.yaml") + " --samples " + at("t/samples.csv") + " --iterations " +
                  at("t/iterations.csv") + " -o " + at("t"));
    EXPECT_EQ(ok.code, 0) << ok.out;
    EXPECT_NE(ok.out.find("verdict = satisfied"), std::string::npos);

    // Move one sampled output far from the plan.
    std::string text = slurp(dir / "t" / "samples.csv");
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        if (row++ == 7) {
            auto a = line.find(',', line.find(',') + 1);
            auto b = line.find(',', a + 1);
            line.replace(a + 1, b - a - 1, "0.95");
        }
        out << line << "\n";
    }
    std::ofstream(dir / "t" / "samples.csv") << out.str();
    auto bad = ncs("verify " + cfg("surrogate.yaml") + " --samples " + at("t/samples.csv") + " --iterations " +
                   at("t/iterations.csv") + " -o " + at("t"));
    EXPECT_EQ(bad.code, 4) << bad.out;
}

TEST_F(Cli, MalformedTraceIsValidationExit) {
    std::ofstream(dir / "s.csv") << "garbage\n";
    std::ofstream(dir / "i.csv") << "garbage\n";
    auto r = ncs("verify " + cfg("surrogate.yaml") + " --samples " + at("s.csv") + " --iterations " + at("i.csv"));
    EXPECT_EQ(r.code, 2) << r.out;
}

TEST_F(Cli, UsageErrors) {
    EXPECT_NE(ncs("").code, 0);
    EXPECT_NE(ncs("frobnicate").code, 0);
    EXPECT_NE(ncs("validate /nonexistent.yaml").code, 0);
}
