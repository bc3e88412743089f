#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "oracles.hpp"
#include "vmplace/bench.hpp"
#include "vmplace/cli.hpp"

using namespace vmplace;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("vmplace_bench_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ExperimentConfig quick() {
    ExperimentConfig c;
    c.pms = {6};
    c.schedulers = {FirstFit{}};
    c.scenarios = 5;
    c.synth.length = 3000;
    c.restarts = 3;
    return c;
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#')
            out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    return out;
}

} // namespace

TEST(Config, DefaultsRoundTripThroughJson) {
    ExperimentConfig c;
    EXPECT_EQ(parse_config(dump_config(c)), c);
    auto q = quick();
    q.alphas = {Alpha::parse("0.05N"), Alpha{3.0, false}};
    q.plans = {{64, 80}};
    q.unassign = {UnassignVariant::EmergentOnly, UnassignVariant::None};
    q.filter = FilterKind::parse("mi");
    q.filters = {FilterKind::parse("small")};
    q.cluster.numa_per_pm = 2;
    q.cluster.large_vm_rule.overrides["12U8G"] = true;
    q.trace = "some/trace.csv";
    q.out = "reports";
    q.flavors = {VmSpec::of(12, 8), VmSpec::of(2, 8)};
    q.reassigner = ReassignerMode::On;
    EXPECT_EQ(parse_config(dump_config(q)), q);
}

TEST(Config, ScalarsAcceptedForLists) {
    auto c = parse_config(R"({"pms": 50, "schedulers": "bf2", "alphas": "0.1N", "filters": "mi"})");
    EXPECT_EQ(c.pms, (std::vector<std::size_t>{50}));
    ASSERT_EQ(c.schedulers.size(), 1u);
    EXPECT_EQ(scheduler_name(c.schedulers[0]), "bf2");
    EXPECT_DOUBLE_EQ(c.alphas[0].resolve(50), 5.0);
    EXPECT_EQ(c.filters[0].name(), "mi");
}

TEST(Config, DiagnosticsNameTheField) {
    auto message = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::Config);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message(R"({"pmz": 3})").find("pmz"), std::string::npos);
    EXPECT_NE(message(R"({"lambda": "high"})").find("lambda"), std::string::npos);
    EXPECT_NE(message(R"({"schedulers": ["ff", "worst"]})").find("schedulers"), std::string::npos);
    EXPECT_NE(message(R"({"synth": {"lenght": 3}})").find("synth.lenght"), std::string::npos);
    EXPECT_NE(message("{\n\"pms\": [1,\n}").find("line 3"), std::string::npos);
    EXPECT_NE(message("[1]").find("object"), std::string::npos);
}

TEST(Config, ValidateRejectsBadValues) {
    auto c = quick();
    c.lambda = 2;
    EXPECT_THROW(c.validate(), Error);
    c = quick();
    c.pms = {};
    EXPECT_THROW(c.validate(), Error);
    c = quick();
    c.cluster.numa_per_pm = 3;
    EXPECT_THROW(c.validate(), Error);
    c = quick();
    c.plans = {{200, 1}};
    EXPECT_THROW(c.validate(), Error);
    c = quick();
    c.synth.delete_prob = 1.5;
    EXPECT_THROW(c.validate(), Error);
    EXPECT_NO_THROW(quick().validate());
}

TEST(FlavorList, ParsesBothNotations) {
    auto v = parse_flavor_list("# tiny set\n2,1\n\n1U2G  # memory heavy\n");
    EXPECT_EQ(v, (std::vector<VmSpec>{VmSpec::of(2, 1), VmSpec::of(1, 2)}));
    try {
        parse_flavor_list("2,1\nbogus\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
    EXPECT_THROW(parse_flavor_list("# nothing\n"), Error);
    EXPECT_THROW(parse_flavor_list("0,3\n"), Error);
}

TEST(Weights, Parse) {
    auto w = parse_weights("12U8G=0.25,2U8G=0.75");
    ASSERT_EQ(w.size(), 2u);
    EXPECT_EQ(w[1].first, VmSpec::of(2, 8));
    EXPECT_DOUBLE_EQ(w[1].second, 0.75);
    EXPECT_THROW(parse_weights("12U8G"), Error);
    EXPECT_THROW(parse_weights("12U8G=abc"), Error);
}

TEST(CmdRun, BaselineAndIntensifiedRows) {
    auto r = cmd_run(quick());
    ASSERT_EQ(r.table.rows.size(), 2u);
    EXPECT_EQ(std::get<std::string>(r.table.rows[0][1]), "FF");
    EXPECT_EQ(std::get<std::string>(r.table.rows[1][1]), "FF+RA");
    EXPECT_EQ(std::get<std::string>(r.table.rows[1][2]), "96U64G/32U96G");
    for (const auto& row : r.table.rows)
        EXPECT_EQ(row.size(), r.table.columns.size());
    for (const char* col : {"average", "quartile_1", "quartile_2", "quartile_3", "alw_memory_mean", "alw_memory_std",
                            "alw_cpu_mean", "alw_cpu_std"})
        EXPECT_NE(std::find(r.table.columns.begin(), r.table.columns.end(), col), r.table.columns.end()) << col;
}

TEST(CmdRun, AlphaSweepGivesOneRowPerAlpha) {
    auto c = quick();
    c.reassigner = ReassignerMode::On;
    c.alphas = {Alpha::parse("0.05N"), Alpha::parse("0.1N"), Alpha::parse("0.2N"), Alpha::parse("0.3N")};
    auto r = cmd_run(c);
    ASSERT_EQ(r.table.rows.size(), 4u);
    EXPECT_EQ(std::get<std::string>(r.table.rows[0][3]), "0.05N");
    EXPECT_EQ(std::get<std::string>(r.table.rows[3][3]), "0.3N");
}

TEST(CmdRun, AblationAndSizeSweep) {
    auto c = quick();
    c.pms = {4, 8};
    c.schedulers = {FirstFit{}, BestFit{}};
    c.unassign = {UnassignVariant::Both, UnassignVariant::EmergentOnly, UnassignVariant::ImbalanceOnly,
                  UnassignVariant::None};
    auto r = cmd_run(c);
    // per size and scheduler: one baseline + four variants
    EXPECT_EQ(r.table.rows.size(), 2u * 2u * 5u);
    // with no unassign at all nothing is ever released
    for (const auto& row : r.table.rows)
        if (std::get<std::string>(row[5]) == "none") {
            EXPECT_EQ(std::get<double>(row[16]), 0.0);
            EXPECT_EQ(std::get<double>(row[17]), 0.0);
        }
}

TEST(CmdRun, FixedPlanIsReported) {
    auto c = quick();
    c.reassigner = ReassignerMode::On;
    c.plans = {{64, 80}};
    auto r = cmd_run(c);
    ASSERT_EQ(r.table.rows.size(), 1u);
    EXPECT_EQ(std::get<std::string>(r.table.rows[0][2]), "64U80G/64U80G");
}

TEST(CmdRun, FilteredTraceStillSolvesPlanFromFullFlavorSet) {
    auto c = quick();
    c.filter = FilterKind::parse("ci");
    auto r = cmd_run(c);
    EXPECT_EQ(std::get<std::string>(r.table.rows[1][2]), "96U64G/32U96G");
    EXPECT_EQ(std::get<std::string>(r.table.rows[1][6]), "CPU-Intensive");
}

TEST(Reports, CsvAndJsonAgreeFieldForField) {
    auto r = cmd_run(quick());
    const auto csv = csv_lines(report_csv(r));
    const auto doc = nlohmann::json::parse(report_json(r));
    ASSERT_EQ(csv.size(), 1 + r.table.rows.size());
    const auto header = split(csv[0]);
    EXPECT_EQ(header, r.table.columns);
    EXPECT_EQ(doc["rows"].size(), r.table.rows.size());
    for (std::size_t i = 0; i < r.table.rows.size(); ++i) {
        const auto cells = split(csv[i + 1]);
        for (std::size_t j = 0; j < header.size(); ++j) {
            const auto& v = doc["rows"][i][header[j]];
            if (v.is_string())
                EXPECT_EQ(v.get<std::string>(), cells[j]);
            else
                EXPECT_EQ(v.get<double>(), std::stod(cells[j])) << header[j];
        }
    }
    EXPECT_EQ(doc["config"], nlohmann::json::parse(r.config_json));
    EXPECT_EQ(doc["seed"], r.seed);
}

TEST(Reports, StartWithProvenanceAndConfig) {
    auto r = cmd_run(quick());
    const auto csv = report_csv(r);
    std::istringstream in(csv);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    EXPECT_EQ(l1.rfind("# vmplace ", 0), 0u);
    EXPECT_EQ(l2, "# seed 0");
    EXPECT_EQ(l3, "# config " + dump_config(quick()));
    // the embedded config reproduces the report
    EXPECT_EQ(report_csv(cmd_run(parse_config(l3.substr(9)))), csv);
}

TEST(Reports, DeterministicAcrossCalls) {
    auto c = quick();
    c.schedulers = {FirstFit{}, RandomSearch{}};
    EXPECT_EQ(report_csv(cmd_run(c)), report_csv(cmd_run(c)));
    EXPECT_EQ(report_csv(cmd_heterogeneity(c)), report_csv(cmd_heterogeneity(c)));
}

TEST(CmdHeterogeneity, TableShape) {
    auto c = quick();
    c.schedulers = {FirstFit{}, BestFit{}, Bf2{}};
    auto r = cmd_heterogeneity(c);
    // five filters x (three heuristics + proxy)
    ASSERT_EQ(r.table.rows.size(), 20u);
    std::set<std::string> filters;
    for (const auto& row : r.table.rows) {
        filters.insert(std::get<std::string>(row[1]));
        EXPECT_LE(std::get<double>(row[8]), 1e-9);  // no heuristic beats the proxy
    }
    EXPECT_EQ(filters, (std::set<std::string>{"All", "CPU-Intensive", "MEM-Intensive", "Small", "Large"}));
    EXPECT_EQ(std::get<std::string>(r.table.rows[3][2]), "Optimal-proxy");
}

TEST(CmdSolveAssign, DefaultAndLambdaExtremes) {
    ExperimentConfig c;
    for (double lambda : {0.0, 1.0}) {
        c.lambda = lambda;
        auto plan = cmd_solve_assign(c);
        EXPECT_EQ(plan.split, (RegionSplit{96, 64, 32, 96}));
        EXPECT_EQ(plan.objective, 0.0);
    }
}

TEST(CmdSolveAssign, TinyFlavorFileMatchesOracle) {
    const auto dir = scratch("flavors");
    fs::create_directories(dir);
    std::ofstream(dir / "tiny.txt") << "3,1\n2,1\n1,2\n1,3\n";
    ExperimentConfig c;
    c.cluster.pm_cpu = 9;
    c.cluster.pm_mem = 11;
    c.flavors = load_flavor_file(dir / "tiny.txt");
    for (double lambda : {0.0, 0.5, 1.0}) {
        c.lambda = lambda;
        auto plan = cmd_solve_assign(c);
        std::vector<oracle::Flavor> ci, mi;
        for (const auto& f : c.flavors)
            (oracle::is_cpu_intensive({f.cpu, f.mem}, 9, 11) ? ci : mi).push_back({f.cpu, f.mem});
        auto expected = oracle::best_split(9, 11, ci, mi, lambda);
        ASSERT_TRUE(expected);
        EXPECT_EQ(plan.split, (RegionSplit{expected->c1, expected->m1, expected->c2, expected->m2}));
    }
    fs::remove_all(dir);
}

TEST(CmdSolveAssign, InfeasibleNamesConstraint) {
    ExperimentConfig c;
    c.cluster.pm_cpu = 128;
    c.flavors = {VmSpec::of(96, 64), VmSpec::of(40, 96)};
    try {
        cmd_solve_assign(c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InfeasibleAssignment);
        EXPECT_NE(std::string(e.what()).find("96U64G"), std::string::npos);
    }
}

TEST(CmdGenTrace, WritesReloadableTrace) {
    const auto dir = scratch("gen");
    auto s = default_synth_config();
    s.length = 1000;
    s.seed = 7;
    cmd_gen_trace(s, dir / "t.csv");
    auto t = load_csv(dir / "t.csv");
    EXPECT_EQ(t.requests.size(), 1000u);
    EXPECT_GT(t.creations(), 0u);
    EXPECT_LT(t.creations(), 1000u);
    auto expected = synth_generate(s);
    ASSERT_EQ(t.requests.size(), expected.requests.size());
    for (std::size_t i = 0; i < t.requests.size(); ++i)
        EXPECT_EQ(t.requests[i].spec, expected.requests[i].spec);
    fs::remove_all(dir);
}

TEST(ExitCodes, Mapping) {
    EXPECT_EQ(exit_code(Errc::Config), 1);
    EXPECT_EQ(exit_code(Errc::InfeasibleAssignment), 1);
    EXPECT_EQ(exit_code(Errc::ParseError), 2);
    EXPECT_EQ(exit_code(Errc::Io), 2);
    EXPECT_EQ(exit_code(Errc::EmptyTrace), 2);
    EXPECT_EQ(exit_code(Errc::InvariantViolation), 3);
    EXPECT_EQ(exit_code(Errc::CapacityViolation), 3);
}

TEST(Cli, RunTwoRowsAndFiles) {
    const auto dir = scratch("cli_run");
    auto r = cli({"run", "--pms", "6", "--scheduler", "ff", "--scenarios", "5", "--length", "3000", "--out",
                  dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(csv_lines(r.out).size(), 3u);
    EXPECT_EQ(slurp(dir / "run.csv"), r.out);
    EXPECT_TRUE(fs::exists(dir / "run.json"));
    fs::remove_all(dir);
}

TEST(Cli, FlagsOverrideConfigFile) {
    const auto dir = scratch("cli_cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "c.json") << R"({"pms": [4], "schedulers": ["bf"], "scenarios": 3,
                                        "synth": {"length": 2000}, "reassigner": "off"})";
    auto r = cli({"run", "--config", (dir / "c.json").string(), "--scheduler", "bf2", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto doc = nlohmann::json::parse(r.out);
    ASSERT_EQ(doc["rows"].size(), 1u);
    EXPECT_EQ(doc["rows"][0]["algorithm"], "BF2");
    EXPECT_EQ(doc["rows"][0]["pms"], 4);
    fs::remove_all(dir);
}

TEST(Cli, ModesAndLists) {
    auto r = cli({"run", "--pms", "4,5", "--scheduler", "ff,bf", "--scenarios", "3", "--length", "2000",
                  "--reassigner", "--alpha", "0.1N,0.2N"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(csv_lines(r.out).size(), 1u + 2u * 2u * 2u);
    auto b = cli({"run", "--pms", "4", "--scenarios", "3", "--length", "2000", "--no-reassigner"});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(csv_lines(b.out).size(), 1u + 3u);
    EXPECT_EQ(cli({"run", "--reassigner", "--no-reassigner"}).code, 1);
}

TEST(Cli, SolveAssignTextAndJson) {
    auto r = cli({"solve-assign"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("96U64G"), std::string::npos);
    EXPECT_NE(r.out.find("32U96G"), std::string::npos);
    auto j = cli({"solve-assign", "--json", "--lambda", "1"});
    auto doc = nlohmann::json::parse(j.out);
    EXPECT_EQ(doc["c1"], 96);
    EXPECT_EQ(doc["m1"], 64);
    EXPECT_EQ(doc["c2"], 32);
    EXPECT_EQ(doc["m2"], 96);
    EXPECT_EQ(doc["objective"], 0.0);
    auto bad = cli({"solve-assign", "--pm-cpu", "64"});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("96U64G"), std::string::npos);
}

TEST(Cli, GenTraceSingleFlavor) {
    const auto dir = scratch("cli_gen");
    auto r = cli({"gen-trace", "--length", "200", "--seed", "3", "--weights", "12U8G=1", "--out",
                  (dir / "one.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto t = load_csv(dir / "one.csv");
    EXPECT_EQ(t.flavors.size(), 1u);
    EXPECT_EQ(t.requests.size(), 200u);
    fs::remove_all(dir);
}

TEST(Cli, ExitCodes) {
    auto missing = cli({"run", "--trace", "/no/such/trace.csv"});
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("/no/such/trace.csv"), std::string::npos);
    EXPECT_EQ(cli({"run", "--scheduler", "worst"}).code, 1);
    EXPECT_EQ(cli({"run", "--lambda", "3", "--pms", "4"}).code, 1);
    EXPECT_EQ(cli({"run", "--config", "/no/such/config.json"}).code, 1);
    EXPECT_EQ(cli({"frobnicate"}).code, 1);
    EXPECT_EQ(cli({}).code, 1);
    EXPECT_EQ(cli({"--help"}).code, 0);

    const auto dir = scratch("cli_bad_trace");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.csv") << "1,2,4,0,0\n1,2,4,1,9\n";
    auto bad = cli({"run", "--trace", (dir / "bad.csv").string()});
    EXPECT_EQ(bad.code, 2);
    EXPECT_NE(bad.err.find("line 2"), std::string::npos);
    auto few = cli({"run", "--trace", (dir / "bad.csv").string(), "--scenarios", "5"});
    EXPECT_EQ(few.code, 2);
    fs::remove_all(dir);
}

#ifdef VMPLACE_CLI_PATH
TEST(Executable, ExitCodesAndVersion) {
    const std::string exe = VMPLACE_CLI_PATH;
    auto status = [&](const std::string& args) {
        const int raw = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
        return WEXITSTATUS(raw);
    };
    EXPECT_EQ(status("--version"), 0);
    EXPECT_EQ(status("solve-assign"), 0);
    EXPECT_EQ(status("run --trace /no/such/file.csv"), 2);
    EXPECT_EQ(status("run --numa 3"), 1);
}
#endif
