#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "commands.hpp"
#include "fixtures.hpp"

using namespace mcp;
using namespace mcp::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("mcp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return (path / name).string();
    }
};

std::string read(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig isr3d_config(const TempDir& tmp) {
    RunConfig c;
    c.model = fixtures::data_path("isr3d.mmd");
    c.perf = fixtures::data_path("isr3d.perf");
    c.machine = fixtures::data_path("machine21.cfg");
    c.out_dir = tmp.path.string();
    return c;
}

int run_cli(const std::string& args, const fs::path& out) {
    const auto cmd = std::string(MCP_CLI) + " " + args + " > " + out.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

constexpr const char* kAmbiguous = R"(model both
submodel macro dt=1s total=10s dx=1m extent=10m role=macro
submodel micro dt=1ms total=1s dx=1mm extent=1m multiplicity=dynamic
submodel rep dt=1ms total=1s dx=1mm extent=1m multiplicity=3
submodel master dt=1s total=1s dx=1m extent=1m
couple macro -> micro kind=per_cycle
couple micro -> macro kind=per_cycle
couple micro -> macro kind=init
couple rep -> master kind=per_cycle
)";

}  // namespace

TEST(Validate, ExitCodes) {
    std::ostringstream out, err;
    EXPECT_EQ(cmd_validate(fixtures::data_path("isr3d.mmd"), out, err), Ok);
    EXPECT_EQ(out.str(), "ok: isr3d (3 submodels, 5 couplings)\n");

    std::ostringstream out2, err2;
    EXPECT_EQ(cmd_validate(fixtures::data_path("deadlock.mmd"), out2, err2), InvalidModel);
    EXPECT_NE(err2.str().find("a, b"), std::string::npos) << err2.str();

    TempDir tmp;
    std::ostringstream out3, err3;
    EXPECT_EQ(cmd_validate(tmp.file("bad.mmd", "submodel a dt=1s\n"), out3, err3), InputError);
    EXPECT_EQ(cmd_validate((tmp.path / "missing.mmd").string(), out3, err3), InputError);
}

TEST(Validate, ReportsEveryViolation) {
    TempDir tmp;
    auto path = tmp.file("v.mmd", R"(submodel a dt=20s total=10s dx=1m extent=1m
submodel b dt=1s total=10s dx=2m extent=1m
couple a -> b kind=per_cycle
)");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_validate(path, out, err), InvalidModel);
    EXPECT_NE(err.str().find("v.mmd:1:"), std::string::npos) << err.str();
    EXPECT_NE(err.str().find("v.mmd:2:"), std::string::npos) << err.str();
    const auto text = err.str();
    EXPECT_GE(std::count(text.begin(), text.end(), '\n'), 2) << text;
}

TEST(Graph, Counts) {
    TempDir tmp;
    std::ostringstream out, err;
    const auto dot = (tmp.path / "g.dot").string();
    EXPECT_EQ(cmd_graph(fixtures::data_path("isr3d.mmd"), 2, dot, {}, out, err), Ok);
    EXPECT_EQ(out.str(), "nodes=7 edges=7\n");
    EXPECT_EQ(read(dot), to_dot(unfold(parse_model(fixtures::data("isr3d.mmd")), 2)));

    std::ostringstream out2;
    EXPECT_EQ(cmd_graph(tmp.file("a.mmd", "submodel a dt=1s total=10s dx=1m extent=1m\n"), 3, "", {}, out2, err), Ok);
    EXPECT_EQ(out2.str(), "nodes=4 edges=3\n");

    std::ostringstream err2;
    EXPECT_EQ(cmd_graph(fixtures::data_path("isr3d.mmd"), 0, "", {}, out, err2), InputError);
    EXPECT_EQ(cmd_graph(fixtures::data_path("suspension_hmc.mmd"), 1, "", {}, out, err2), InputError);
    std::ostringstream out3;
    EXPECT_EQ(cmd_graph(fixtures::data_path("suspension_hmc.mmd"), 1, "", {{"cell", 3}}, out3, err2), Ok);
}

TEST(Plan, Isr3dSummaryAndFiles) {
    TempDir tmp;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_plan(isr3d_config(tmp), out, err), Ok) << err.str();
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "pattern=ES mode=interleaved P1=20 P2=1 period=50");
    const auto manifest = read(tmp.path / "manifest.cfg");
    EXPECT_NE(manifest.find("mode=interleaved\n"), std::string::npos);
    EXPECT_NE(manifest.find("role.A.cores=20\n"), std::string::npos);
    EXPECT_NE(manifest.find("role.B_s.cores=1\n"), std::string::npos);
    EXPECT_TRUE(fs::exists(tmp.path / "launch_A.cfg"));
}

TEST(Plan, ForcedModeAndPattern) {
    TempDir tmp;
    auto c = isr3d_config(tmp);
    c.mode = "sequential";
    std::ostringstream out, err;
    ASSERT_EQ(cmd_plan(c, out, err), Ok) << err.str();
    EXPECT_EQ(out.str().rfind("pattern=ES mode=sequential period=", 0), 0u) << out.str();
    c.mode.reset();
    c.pattern = "XYZ";
    EXPECT_EQ(cmd_plan(c, out, err), InputError);
}

TEST(Plan, AmbiguousNeedsPattern) {
    TempDir tmp;
    RunConfig c;
    c.model = tmp.file("amb.mmd", kAmbiguous);
    c.perf = tmp.file("amb.perf", "perf macro serial a=10\nperf micro serial a=1\nperf rep serial a=5\nperf master serial a=1\n");
    c.machine = fixtures::data_path("machine21.cfg");
    c.out_dir = tmp.path.string();
    c.instances = {{"micro", 2}};
    std::ostringstream out, err;
    EXPECT_EQ(cmd_plan(c, out, err), Ambiguous);
    EXPECT_NE(err.str().find("ambiguous"), std::string::npos);
    EXPECT_FALSE(fs::exists(tmp.path / "manifest.cfg"));
    c.pattern = "HMC";
    std::ostringstream out2;
    EXPECT_EQ(cmd_plan(c, out2, err), Ok);
    EXPECT_EQ(out2.str().rfind("pattern=HMC ", 0), 0u) << out2.str();
}

TEST(Plan, OtherPatterns) {
    TempDir tmp;
    RunConfig c;
    c.machine = fixtures::data_path("cluster.cfg");
    c.out_dir = tmp.path.string();
    c.model = fixtures::data_path("ensemble.mmd");
    c.perf = fixtures::data_path("ensemble.perf");
    std::ostringstream out, err;
    ASSERT_EQ(cmd_plan(c, out, err), Ok) << err.str();
    EXPECT_EQ(out.str().rfind("pattern=RC-static ", 0), 0u) << out.str();
    EXPECT_NE(out.str().find("replicas=100"), std::string::npos);

    c.model = fixtures::data_path("suspension_hmc.mmd");
    c.perf = fixtures::data_path("suspension_hmc.perf");
    std::ostringstream out2, err2;
    EXPECT_EQ(cmd_plan(c, out2, err2), InputError);
    c.instances = {{"cell", 4}};
    ASSERT_EQ(cmd_plan(c, out2, err2), Ok) << err2.str();
    EXPECT_EQ(out2.str().rfind("pattern=HMC ", 0), 0u) << out2.str();
}

TEST(Simulate, SummaryAndDeterministicJson) {
    TempDir tmp;
    auto c = isr3d_config(tmp);
    c.jobs = 10;
    c.seed = 7;
    std::ostringstream out, err;
    ASSERT_EQ(cmd_simulate(c, (tmp.path / "a.json").string(), out, err), Ok) << err.str();
    EXPECT_EQ(out.str().rfind("makespan=", 0), 0u);
    std::ostringstream out2;
    ASSERT_EQ(cmd_simulate(c, (tmp.path / "b.json").string(), out2, err), Ok);
    const auto a = read(tmp.path / "a.json");
    EXPECT_EQ(a, read(tmp.path / "b.json"));
    EXPECT_EQ(out.str(), out2.str());
    auto j = nlohmann::json::parse(a);
    EXPECT_EQ(j["failures"].size(), 0u);
    EXPECT_EQ(j["per_task"].size(), 10u * 3 + 2);

    std::ostringstream out3;
    ASSERT_EQ(cmd_simulate(c, "-", out3, err), Ok);
    EXPECT_EQ(out3.str().substr(0, a.size()), a);
}

TEST(Simulate, AbortExitCode) {
    TempDir tmp;
    auto c = isr3d_config(tmp);
    c.machine = tmp.file("m.cfg", "nodes=1\ncores_per_node=21\nlambda_core=1\n");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_simulate(c, "", out, err), Aborted);
    EXPECT_NE(err.str().find("aborted"), std::string::npos);
}

TEST(Sweep, CsvRoundTrip) {
    TempDir tmp;
    auto c = isr3d_config(tmp);
    const auto csv = (tmp.path / "s.csv").string();
    std::ostringstream out, err;
    ASSERT_EQ(cmd_sweep(c, "P=2..6", csv, out, err), Ok) << err.str();
    EXPECT_EQ(out.str(), "rows=5\n");
    std::istringstream in(read(csv));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "param,mode,period,makespan,energy,efficiency_exact,efficiency_eq2");
    int rows = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        ASSERT_GE(f.size(), 6u) << line;
        const int procs = std::stoi(f[0]);
        EXPECT_EQ(procs, 2 + rows);
        const double period = std::stod(f[2]);
        auto g = unfold(fixtures::isr3d(), 1);
        PlanOptions o;
        o.cores = procs;
        auto p = plan(embed_es(g, fixtures::isr3d(), "bf"), g,
                      {{"bf", PerfModel::perfect(1000)}, {"smc", PerfModel::serial(40)}, {"dd", PerfModel::serial(10)}},
                      fixtures::machine(procs, 0, {0.5, 0.75, 1}), o);
        EXPECT_NEAR(period, p.predicted_period, 1e-11 * p.predicted_period);
        EXPECT_EQ(f[2], format_number(std::stod(f[2])));
        ++rows;
    }
    EXPECT_EQ(rows, 5);
}

TEST(Sweep, SingleValueAndErrors) {
    TempDir tmp;
    auto c = isr3d_config(tmp);
    std::ostringstream out, err;
    ASSERT_EQ(cmd_sweep(c, "lambda=0", "-", out, err), Ok) << err.str();
    const auto one = out.str();
    EXPECT_EQ(std::count(one.begin(), one.end(), '\n'), 2);
    std::ostringstream out2;
    ASSERT_EQ(cmd_sweep(c, "f=0.5,1", "", out2, err), Ok) << err.str();
    const auto two = out2.str();
    EXPECT_EQ(std::count(two.begin(), two.end(), '\n'), 3);
    EXPECT_EQ(cmd_sweep(c, "Q=1", "", out, err), InputError);
    EXPECT_EQ(cmd_sweep(c, "f=0.6", "", out, err), InputError);
    EXPECT_EQ(cmd_sweep(c, "P=0..3", "", out, err), InputError);
    EXPECT_EQ(cmd_sweep(c, "P=", "", out, err), InputError);
}

TEST(Binary, EndToEnd) {
    TempDir tmp;
    const auto log = tmp.path / "log.txt";
    EXPECT_EQ(run_cli("validate " + fixtures::data_path("isr3d.mmd"), log), 0);
    EXPECT_EQ(run_cli("validate " + fixtures::data_path("deadlock.mmd"), log), 1);
    EXPECT_EQ(run_cli("graph " + fixtures::data_path("isr3d.mmd") + " --cycles 2", log), 0);
    EXPECT_EQ(read(log), "nodes=7 edges=7\n");
    EXPECT_EQ(run_cli("graph " + fixtures::data_path("isr3d.mmd") + " --cycles 0", log), 2);
    EXPECT_EQ(run_cli("frobnicate", log), 2);
    const auto common = " --perf " + fixtures::data_path("isr3d.perf") + " --machine " +
                        fixtures::data_path("machine21.cfg") + " --out " + tmp.path.string();
    EXPECT_EQ(run_cli("plan " + fixtures::data_path("isr3d.mmd") + common, log), 0);
    EXPECT_EQ(read(log).rfind("pattern=ES mode=interleaved P1=20 P2=1 period=50\n", 0), 0u);
    EXPECT_EQ(run_cli("simulate " + fixtures::data_path("isr3d.mmd") + common + " --jobs 3 --json -", log), 0);
    const auto first = read(log);
    EXPECT_EQ(run_cli("simulate " + fixtures::data_path("isr3d.mmd") + common + " --jobs 3 --json -", log), 0);
    EXPECT_EQ(read(log), first);
}
