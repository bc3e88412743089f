#include "vmplace/cli.hpp"

#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vmplace/bench.hpp"
#include "vmplace/version.hpp"

namespace vmplace {

namespace {

// Flag values as given; applied on top of the config file.
struct Overrides {
    std::string config;
    std::string trace;
    std::vector<std::string> pms;
    std::int64_t pm_cpu = 0;
    std::int64_t pm_mem = 0;
    std::size_t numa = 0;
    std::vector<std::string> schedulers;
    bool reassigner = false;
    bool no_reassigner = false;
    bool compare = false;
    std::vector<std::string> alphas;
    double lambda = 0.5;
    std::vector<std::string> plans;
    std::vector<std::string> unassign;
    std::size_t scenarios = 0;
    std::uint64_t seed = 0;
    std::uint64_t trace_seed = 0;
    std::vector<std::string> filters;
    std::int64_t small_threshold = 0;
    int restarts = 0;
    std::string flavors;
    std::string out;
    bool json = false;
    std::size_t length = 0;
    double delete_prob = 0.0;
    double burst = 1.0;
    std::string weights;
};

struct Options {
    CLI::Option* config = nullptr;
    CLI::Option* trace = nullptr;
    CLI::Option* pms = nullptr;
    CLI::Option* pm_cpu = nullptr;
    CLI::Option* pm_mem = nullptr;
    CLI::Option* numa = nullptr;
    CLI::Option* schedulers = nullptr;
    CLI::Option* alphas = nullptr;
    CLI::Option* lambda = nullptr;
    CLI::Option* plans = nullptr;
    CLI::Option* unassign = nullptr;
    CLI::Option* scenarios = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* trace_seed = nullptr;
    CLI::Option* filters = nullptr;
    CLI::Option* small_threshold = nullptr;
    CLI::Option* restarts = nullptr;
    CLI::Option* flavors = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* length = nullptr;
    CLI::Option* delete_prob = nullptr;
    CLI::Option* burst = nullptr;
    CLI::Option* weights = nullptr;
};

void add_cluster(CLI::App* app, Overrides& o, Options& opt) {
    opt.config = app->add_option("--config", o.config, "JSON experiment config; flags override it");
    opt.pm_cpu = app->add_option("--pm-cpu", o.pm_cpu, "PM CPU capacity (U)");
    opt.pm_mem = app->add_option("--pm-mem", o.pm_mem, "PM memory capacity (G)");
    opt.numa = app->add_option("--numa", o.numa, "NUMA nodes per PM");
    opt.lambda = app->add_option("--lambda", o.lambda, "CPU weight of the assignment objective, 0..1");
    opt.trace = app->add_option("--trace", o.trace, "CSV trace (vmid,cpu,memory,time,type)");
    opt.flavors = app->add_option("--flavors", o.flavors, "flavor file, one 12U8G or 12,8 per line");
}

void add_synth(CLI::App* app, Overrides& o, Options& opt) {
    opt.length = app->add_option("--length", o.length, "synthetic trace length (requests)");
    opt.delete_prob = app->add_option("--delete-prob", o.delete_prob, "probability that a step deletes a live VM");
    opt.burst = app->add_option("--burst", o.burst, "mean run length of repeated flavors");
    opt.weights = app->add_option("--weights", o.weights, "flavor weights, e.g. 12U8G=0.5,2U8G=0.5");
}

void add_experiment(CLI::App* app, Overrides& o, Options& opt, bool list_filters) {
    add_cluster(app, o, opt);
    add_synth(app, o, opt);
    opt.pms = app->add_option("--pms", o.pms, "cluster sizes, comma separated")->delimiter(',');
    opt.schedulers =
        app->add_option("--scheduler", o.schedulers, "ff, bf, bf2, random; comma separated")->delimiter(',');
    opt.alphas = app->add_option("--alpha", o.alphas, "imbalance thresholds such as 0.3N")->delimiter(',');
    opt.plans = app->add_option("--plan", o.plans, "fixed region-1 sizes such as 96U64G")->delimiter(',');
    opt.unassign =
        app->add_option("--unassign", o.unassign, "both, emergent, imbalance, none; comma separated")->delimiter(',');
    opt.scenarios = app->add_option("--scenarios", o.scenarios, "sampled start points");
    opt.seed = app->add_option("--seed", o.seed, "scenario sampling and random-policy seed");
    opt.trace_seed = app->add_option("--trace-seed", o.trace_seed, "synthetic trace seed");
    opt.filters = app->add_option("--filter", o.filters, "all, ci, mi, small, large")->delimiter(',');
    if (!list_filters)
        opt.filters->expected(1);
    opt.small_threshold = app->add_option("--small-threshold", o.small_threshold, "largest CPU of a small VM");
    opt.restarts = app->add_option("--restarts", o.restarts, "random rollouts of the optimal-proxy");
    opt.out = app->add_option("--out", o.out, "directory for the CSV and JSON reports");
    app->add_flag("--json", o.json, "print JSON instead of CSV");
    app->add_flag("--reassigner", o.reassigner, "intensified rows only");
    app->add_flag("--no-reassigner", o.no_reassigner, "baseline rows only");
    app->add_flag("--compare", o.compare, "baseline and intensified rows");
}

template <class T, class F>
std::vector<T> convert(const std::vector<std::string>& items, F f) {
    std::vector<T> out;
    for (const auto& s : items)
        out.push_back(f(s));
    return out;
}

std::size_t parse_size(const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size())
        throw Error(Errc::Config, "--pms: '" + s + "' is not a count");
    return static_cast<std::size_t>(v);
}

ExperimentConfig resolve(const Overrides& o, const Options& opt, bool list_filters) {
    ExperimentConfig c = opt.config->count() ? load_config(o.config) : ExperimentConfig{};
    auto given = [](const CLI::Option* p) { return p != nullptr && p->count() > 0; };
    if (given(opt.trace))
        c.trace = o.trace;
    if (given(opt.pms))
        c.pms = convert<std::size_t>(o.pms, parse_size);
    if (given(opt.pm_cpu))
        c.cluster.pm_cpu = o.pm_cpu;
    if (given(opt.pm_mem))
        c.cluster.pm_mem = o.pm_mem;
    if (given(opt.numa))
        c.cluster.numa_per_pm = o.numa;
    if (given(opt.schedulers))
        c.schedulers = convert<SchedulerKind>(o.schedulers, [](const std::string& s) { return parse_scheduler(s); });
    if (o.reassigner + o.no_reassigner + o.compare > 1)
        throw Error(Errc::Config, "--reassigner, --no-reassigner and --compare are exclusive");
    if (o.reassigner)
        c.reassigner = ReassignerMode::On;
    if (o.no_reassigner)
        c.reassigner = ReassignerMode::Off;
    if (o.compare)
        c.reassigner = ReassignerMode::Both;
    if (given(opt.alphas))
        c.alphas = convert<Alpha>(o.alphas, [](const std::string& s) { return Alpha::parse(s); });
    if (given(opt.lambda))
        c.lambda = o.lambda;
    if (given(opt.plans))
        c.plans = convert<Resources>(o.plans, [](const std::string& s) {
            auto v = VmSpec::parse(s);
            return Resources{v.cpu, v.mem};
        });
    if (given(opt.unassign))
        c.unassign = convert<UnassignVariant>(o.unassign, [](const std::string& s) { return parse_unassign(s); });
    if (given(opt.scenarios))
        c.scenarios = o.scenarios;
    if (given(opt.seed))
        c.seed = o.seed;
    if (given(opt.trace_seed))
        c.synth.seed = o.trace_seed;
    if (given(opt.small_threshold)) {
        c.filter.threshold_cpu = o.small_threshold;
        for (auto& f : c.filters)
            f.threshold_cpu = o.small_threshold;
    }
    if (given(opt.filters)) {
        auto parsed = convert<FilterKind>(o.filters, [&](const std::string& s) {
            auto f = FilterKind::parse(s);
            f.threshold_cpu = c.filter.threshold_cpu;
            return f;
        });
        if (list_filters)
            c.filters = parsed;
        else
            c.filter = parsed.front();
    }
    if (given(opt.restarts))
        c.restarts = o.restarts;
    if (given(opt.flavors))
        c.flavors = load_flavor_file(o.flavors);
    if (given(opt.out))
        c.out = o.out;
    if (o.json)
        c.json = true;
    if (given(opt.length))
        c.synth.length = o.length;
    if (given(opt.delete_prob))
        c.synth.delete_prob = o.delete_prob;
    if (given(opt.burst))
        c.synth.burst_mean = o.burst;
    if (given(opt.weights))
        c.synth.flavor_weights = parse_weights(o.weights);
    return c;
}

void emit(const Report& report, const ExperimentConfig& c, std::ostream& out) {
    if (c.out)
        write_report(report, *c.out);
    out << (c.json ? report_json(report) : report_csv(report));
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Trace-driven VM placement simulator", "vmplace"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("vmplace ") + kVersion + " " + kGitDescribe);

    Overrides o;
    Options run_opt, het_opt, solve_opt, gen_opt;
    auto* run = app.add_subcommand("run", "run every scheduler cell over sampled scenarios");
    add_experiment(run, o, run_opt, false);
    auto* het = app.add_subcommand("heterogeneity", "filter-and-examination table against the optimal-proxy");
    add_experiment(het, o, het_opt, true);
    auto* solve = app.add_subcommand("solve-assign", "exact region split for the flavor set");
    add_cluster(solve, o, solve_opt);
    add_synth(solve, o, solve_opt);
    solve->add_flag("--json", o.json, "print JSON");
    auto* gen = app.add_subcommand("gen-trace", "write a synthetic trace as CSV");
    gen_opt.config = gen->add_option("--config", o.config, "JSON experiment config; its synth block is used");
    add_synth(gen, o, gen_opt);
    gen_opt.seed = gen->add_option("--seed", o.trace_seed, "trace seed");
    gen_opt.out = gen->add_option("--out", o.out, "output CSV path")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run->parsed()) {
            auto c = resolve(o, run_opt, false);
            emit(cmd_run(c), c, out);
        } else if (het->parsed()) {
            auto c = resolve(o, het_opt, true);
            emit(cmd_heterogeneity(c), c, out);
        } else if (solve->parsed()) {
            auto c = resolve(o, solve_opt, false);
            const auto plan = cmd_solve_assign(c);
            const auto& s = plan.split;
            if (c.json) {
                nlohmann::json j{{"c1", s.c1},         {"m1", s.m1},
                                 {"c2", s.c2},         {"m2", s.m2},
                                 {"objective", plan.objective}, {"lambda", plan.lambda},
                                 {"pm_cpu", c.cluster.pm_cpu},  {"pm_mem", c.cluster.pm_mem}};
                out << j.dump() << "\n";
            } else {
                out << "region 1 (CPU-intensive): " << s.c1 << "U" << s.m1 << "G\n"
                    << "region 2 (memory-intensive): " << s.c2 << "U" << s.m2 << "G\n"
                    << "objective: " << plan.objective << "\n"
                    << "lambda: " << plan.lambda << "\n";
            }
        } else if (gen->parsed()) {
            auto c = resolve(o, gen_opt, false);
            if (gen_opt.seed->count())
                c.synth.seed = o.trace_seed;
            cmd_gen_trace(c.synth, o.out);
            out << "wrote " << c.synth.length << " requests to " << o.out << "\n";
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

} // namespace vmplace
