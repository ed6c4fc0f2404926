#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "rtovc/config_io.hpp"
#include "rtovc/trace_io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace rtovc {
namespace {

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "rtovc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("rtovc_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string file(const std::string& name) const { return (dir_ / name).string(); }

    std::string write_config(const std::string& name, const ScenarioConfig& cfg) const {
        std::ofstream(file(name)) << serialize_config(cfg);
        return file(name);
    }

    fs::path dir_;
};

TEST_F(CliTest, SimulateWritesTraceAndSummary) {
    const std::string cfg = write_config("a.cfg", testing::small_scenario(1.0));
    const Invocation r = invoke({"simulate", cfg, "-o", file("a.trace")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("rms_error"), std::string::npos);
    EXPECT_TRUE(fs::exists(file("a.trace")));
}

TEST_F(CliTest, SimulateTripExitCode) {
    ScenarioConfig c = testing::small_scenario(3.0);
    c.wheels[0].disturbance.slip_events = {{1.0, 2.0, 200.0, PulseShape::Trapezoid, 0.01}};
    const Invocation r = invoke({"simulate", write_config("t.cfg", c)});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("TRIPPED"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(invoke({}).code, 1);
    EXPECT_EQ(invoke({"frobnicate"}).code, 1);
    EXPECT_EQ(invoke({"simulate"}).code, 1);
    EXPECT_EQ(invoke({"simulate", file("missing.cfg")}).code, 1);
    std::ofstream(file("empty.cfg")).flush();
    EXPECT_EQ(invoke({"simulate", file("empty.cfg")}).code, 1);
    EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, VerifyDisturbanceFreeTracePasses) {
    ScenarioConfig c = testing::small_scenario(6.0);
    c.reference.knots = {{0.0, 0.0}};
    for (auto& w : c.wheels) w.initial_velocity = 0.2;
    const std::string cfg = write_config("reg.cfg", c);
    ASSERT_EQ(invoke({"simulate", cfg, "-o", file("reg.trace")}).code, 0);
    const Invocation v = invoke({"verify", file("reg.trace"), "-c", cfg});
    EXPECT_EQ(v.code, 0) << v.out;
    EXPECT_NE(v.out.find("result PASS"), std::string::npos);
    EXPECT_EQ(v.out.find("FAIL"), std::string::npos);

    std::istringstream lines(v.out);
    std::string line;
    int passes = 0;
    while (std::getline(lines, line)) {
        if (line.rfind("PASS ", 0) != 0) continue;
        ++passes;
        EXPECT_NE(line.find("margin="), std::string::npos) << line;
    }
    EXPECT_GT(passes, 10);
    EXPECT_NE(v.out.find("b_bar="), std::string::npos);
}

TEST_F(CliTest, VerifyRejectsForeignConfig) {
    ScenarioConfig c = testing::small_scenario(1.0);
    const std::string cfg = write_config("a.cfg", c);
    ASSERT_EQ(invoke({"simulate", cfg, "-o", file("a.trace")}).code, 0);
    c.seed = 77;
    const Invocation v = invoke({"verify", file("a.trace"), "-c", write_config("b.cfg", c)});
    EXPECT_EQ(v.code, 1);
    EXPECT_NE(v.err.find("different config"), std::string::npos);
}

TEST_F(CliTest, CompareTable) {
    ScenarioConfig a = testing::small_scenario(2.0), b = a;
    b.name = "pid";
    b.controller = ControllerKind::Pid;
    const Invocation r = invoke({"compare", write_config("a.cfg", a), write_config("b.cfg", b)});
    EXPECT_EQ(r.code, 0) << r.err;
    for (const char* w : {"FL", "FR", "RL", "RR"}) EXPECT_NE(r.out.find(w), std::string::npos);
}

TEST_F(CliTest, PlotData) {
    const std::string cfg = write_config("a.cfg", testing::small_scenario(0.5));
    ASSERT_EQ(invoke({"simulate", cfg, "-o", file("a.trace")}).code, 0);
    const Invocation p = invoke({"plotdata", file("a.trace"), "--signal", "v_w", "--wheel", "RL"});
    EXPECT_EQ(p.code, 0);
    std::istringstream in(p.out);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "# t v_w wheel=RL");
    double t = 0, v = 0;
    int n = 0;
    while (in >> t >> v) ++n;
    EXPECT_EQ(n, 500);
    EXPECT_EQ(invoke({"plotdata", file("a.trace"), "--signal", "nope"}).code, 1);
    EXPECT_EQ(invoke({"plotdata", file("a.trace"), "--signal", "v_w", "--wheel", "XX"}).code, 1);
    EXPECT_EQ(invoke({"plotdata", file("a.trace")}).code, 1);
}

TEST_F(CliTest, TuneEmitsParsableConfig) {
    ScenarioConfig c = testing::small_scenario(2.0);
    const Invocation t = invoke({"tune", write_config("a.cfg", c), "--threshold", "0.5", "-o", file("tuned.cfg")});
    EXPECT_EQ(t.code, 0) << t.err;
    const ScenarioConfig tuned = parse_config(file("tuned.cfg"));
    EXPECT_EQ(tuned.gains.k1, c.gains.k1);
    EXPECT_GE(tuned.gains.k5, 70.0 / 0.854);
    const Invocation f = invoke({"tune", write_config("a.cfg", c), "--threshold", "1e-9", "--max-iter", "2"});
    EXPECT_EQ(f.code, 3);
    EXPECT_NO_THROW(parse_config_string(f.out));
}

TEST_F(CliTest, ShippedSnowScenarioRuns) {
    const Invocation r = invoke({"simulate", testing::scenario_path("exp1_snow"), "-o", file("snow.trace"), "--stride", "10"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.find("TRIPPED"), std::string::npos);
}

}  // namespace
}  // namespace rtovc
