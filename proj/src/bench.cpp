#include "vmplace/bench.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vmplace/version.hpp"

namespace vmplace {

using nlohmann::json;

std::string to_string(UnassignVariant v) {
    switch (v) {
    case UnassignVariant::Both: return "both";
    case UnassignVariant::EmergentOnly: return "emergent";
    case UnassignVariant::ImbalanceOnly: return "imbalance";
    case UnassignVariant::None: return "none";
    }
    return "both";
}

UnassignVariant parse_unassign(std::string_view text) {
    for (auto v : {UnassignVariant::Both, UnassignVariant::EmergentOnly, UnassignVariant::ImbalanceOnly,
                   UnassignVariant::None})
        if (to_string(v) == text)
            return v;
    throw Error(Errc::Config, "unknown unassign variant '" + std::string(text) +
                                  "' (expected both, emergent, imbalance or none)");
}

std::string to_string(ReassignerMode m) {
    switch (m) {
    case ReassignerMode::Off: return "off";
    case ReassignerMode::On: return "on";
    case ReassignerMode::Both: return "both";
    }
    return "both";
}

ReassignerMode parse_reassigner(std::string_view text) {
    for (auto m : {ReassignerMode::Off, ReassignerMode::On, ReassignerMode::Both})
        if (to_string(m) == text)
            return m;
    throw Error(Errc::Config, "unknown reassigner mode '" + std::string(text) + "' (expected off, on or both)");
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& what) {
        throw Error(Errc::Config, "config field '" + field + "': " + what);
    };
    if (pms.empty())
        fail("pms", "needs at least one cluster size");
    for (auto n : pms) {
        ClusterConfig c = cluster;
        c.n_pms = n;
        try {
            c.validate();
        } catch (const Error& e) {
            fail("pms", e.what());
        }
    }
    if (schedulers.empty())
        fail("schedulers", "needs at least one scheduler");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        fail("lambda", "must lie in [0, 1]");
    if (alphas.empty())
        fail("alphas", "needs at least one value");
    if (unassign.empty())
        fail("unassign", "needs at least one variant");
    for (const auto& p : plans)
        if (p.cpu < 0 || p.mem < 0 || p.cpu > cluster.pm_cpu || p.mem > cluster.pm_mem)
            fail("plans", "region 1 must lie within the PM capacity");
    if (scenarios == 0)
        fail("scenarios", "must be >= 1");
    if (restarts < 1)
        fail("restarts", "must be >= 1");
    if (filters.empty())
        fail("filters", "needs at least one filter");
    if (!trace) {
        try {
            synth.validate();
        } catch (const Error& e) {
            fail("synth", e.what());
        }
    }
}

namespace {

FilterKind with_threshold(FilterKind f, std::int64_t threshold) {
    f.threshold_cpu = threshold;
    return f;
}

template <class T, class F>
std::vector<T> list_of(const json& value, F convert) {
    std::vector<T> out;
    if (value.is_array()) {
        for (const auto& v : value)
            out.push_back(convert(v));
    } else {
        out.push_back(convert(value));
    }
    return out;
}

std::string plan_name(const Resources& r) {
    return VmSpec::of(r.cpu, r.mem).flavor_id;
}

Resources parse_plan(std::string_view text) {
    auto s = VmSpec::parse(text);
    return {s.cpu, s.mem};
}

SynthConfig parse_synth(const json& j) {
    SynthConfig s = default_synth_config();
    for (const auto& [key, value] : j.items()) {
        if (key == "length")
            s.length = value.get<std::size_t>();
        else if (key == "delete_prob")
            s.delete_prob = value.get<double>();
        else if (key == "seed")
            s.seed = value.get<std::uint64_t>();
        else if (key == "burst_mean")
            s.burst_mean = value.get<double>();
        else if (key == "weights") {
            s.flavor_weights.clear();
            for (const auto& w : value)
                s.flavor_weights.emplace_back(VmSpec::parse(w.at(0).get<std::string>()), w.at(1).get<double>());
        } else
            throw Error(Errc::Config, "unknown field 'synth." + key + "'");
    }
    return s;
}

json synth_json(const SynthConfig& s) {
    json weights = json::array();
    for (const auto& [spec, w] : s.flavor_weights)
        weights.push_back(json::array({spec.flavor_id, w}));
    return json{{"length", s.length},
                {"delete_prob", s.delete_prob},
                {"seed", s.seed},
                {"burst_mean", s.burst_mean},
                {"weights", weights}};
}

void apply_field(ExperimentConfig& c, const std::string& key, const json& value, std::int64_t& threshold) {
    auto str = [](const json& v) { return v.get<std::string>(); };
    if (key == "pms")
        c.pms = list_of<std::size_t>(value, [](const json& v) { return v.get<std::size_t>(); });
    else if (key == "pm_cpu")
        c.cluster.pm_cpu = value.get<std::int64_t>();
    else if (key == "pm_mem")
        c.cluster.pm_mem = value.get<std::int64_t>();
    else if (key == "numa")
        c.cluster.numa_per_pm = value.get<std::size_t>();
    else if (key == "large_overrides") {
        c.cluster.large_vm_rule.overrides.clear();
        for (const auto& [flavor, large] : value.items())
            c.cluster.large_vm_rule.overrides[VmSpec::parse(flavor).flavor_id] = large.get<bool>();
    } else if (key == "schedulers")
        c.schedulers = list_of<SchedulerKind>(value, [&](const json& v) { return parse_scheduler(str(v)); });
    else if (key == "reassigner")
        c.reassigner = value.is_boolean() ? (value.get<bool>() ? ReassignerMode::On : ReassignerMode::Off)
                                          : parse_reassigner(str(value));
    else if (key == "lambda")
        c.lambda = value.get<double>();
    else if (key == "alphas")
        c.alphas = list_of<Alpha>(value, [&](const json& v) {
            return v.is_number() ? Alpha{v.get<double>(), false} : Alpha::parse(str(v));
        });
    else if (key == "unassign")
        c.unassign = list_of<UnassignVariant>(value, [&](const json& v) { return parse_unassign(str(v)); });
    else if (key == "plans")
        c.plans = list_of<Resources>(value, [&](const json& v) { return parse_plan(str(v)); });
    else if (key == "trace")
        c.trace = value.is_null() ? std::nullopt : std::optional<std::filesystem::path>(str(value));
    else if (key == "synth")
        c.synth = parse_synth(value);
    else if (key == "flavors")
        c.flavors = value.is_string() ? load_flavor_file(str(value))
                                      : list_of<VmSpec>(value, [&](const json& v) { return VmSpec::parse(str(v)); });
    else if (key == "scenarios")
        c.scenarios = value.get<std::size_t>();
    else if (key == "seed")
        c.seed = value.get<std::uint64_t>();
    else if (key == "filter")
        c.filter = FilterKind::parse(str(value));
    else if (key == "filters")
        c.filters = list_of<FilterKind>(value, [&](const json& v) { return FilterKind::parse(str(v)); });
    else if (key == "small_threshold")
        threshold = value.get<std::int64_t>();
    else if (key == "restarts")
        c.restarts = value.get<int>();
    else if (key == "out")
        c.out = value.is_null() ? std::nullopt : std::optional<std::filesystem::path>(str(value));
    else if (key == "json")
        c.json = value.get<bool>();
    else
        throw Error(Errc::Config, "unknown field '" + key + "'");
}

json config_json(const ExperimentConfig& c) {
    json j;
    j["pms"] = c.pms;
    j["pm_cpu"] = c.cluster.pm_cpu;
    j["pm_mem"] = c.cluster.pm_mem;
    j["numa"] = c.cluster.numa_per_pm;
    json overrides = json::object();
    for (const auto& [flavor, large] : c.cluster.large_vm_rule.overrides)
        overrides[flavor] = large;
    j["large_overrides"] = overrides;
    json scheds = json::array();
    for (const auto& s : c.schedulers)
        scheds.push_back(scheduler_name(s));
    j["schedulers"] = scheds;
    j["reassigner"] = to_string(c.reassigner);
    j["lambda"] = c.lambda;
    json alphas = json::array();
    for (const auto& a : c.alphas)
        alphas.push_back(a.to_string());
    j["alphas"] = alphas;
    json unassign = json::array();
    for (auto v : c.unassign)
        unassign.push_back(to_string(v));
    j["unassign"] = unassign;
    json plans = json::array();
    for (const auto& p : c.plans)
        plans.push_back(plan_name(p));
    j["plans"] = plans;
    j["trace"] = c.trace ? json(c.trace->generic_string()) : json(nullptr);
    j["synth"] = synth_json(c.synth);
    json flavors = json::array();
    for (const auto& f : c.flavors)
        flavors.push_back(f.flavor_id);
    j["flavors"] = flavors;
    j["scenarios"] = c.scenarios;
    j["seed"] = c.seed;
    j["filter"] = c.filter.name();
    json filters = json::array();
    for (const auto& f : c.filters)
        filters.push_back(f.name());
    j["filters"] = filters;
    j["small_threshold"] = c.filter.threshold_cpu;
    j["restarts"] = c.restarts;
    j["out"] = c.out ? json(c.out->generic_string()) : json(nullptr);
    j["json"] = c.json;
    return j;
}

std::string read_file(const std::filesystem::path& path, Errc code, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(code, "cannot open " + what + " '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string cell_text(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c)) {
        if (s->find_first_of(",\"\n") == std::string::npos)
            return *s;
        std::string q = "\"";
        for (char ch : *s) {
            if (ch == '"')
                q += '"';
            q += ch;
        }
        return q + "\"";
    }
    if (const auto* i = std::get_if<std::int64_t>(&c))
        return std::to_string(*i);
    return format_double(std::get<double>(c));
}

json cell_json(const Cell& c) {
    if (const auto* s = std::get_if<std::string>(&c))
        return *s;
    if (const auto* i = std::get_if<std::int64_t>(&c))
        return *i;
    return std::strtod(format_double(std::get<double>(c)).c_str(), nullptr);
}

std::string provenance() {
    return std::string("vmplace ") + kVersion + " " + kGitDescribe;
}

std::vector<Cell> stats_cells(const SuiteStats& s) {
    return {static_cast<std::int64_t>(s.runs), s.mean, s.q1, s.median, s.q3};
}

double mean_of(const std::vector<RunResult>& runs, std::int64_t UnassignCounts::*field) {
    if (runs.empty())
        return 0.0;
    double total = 0.0;
    for (const auto& r : runs)
        total += static_cast<double>(r.unassign.*field);
    return total / static_cast<double>(runs.size());
}

ClusterConfig sized(const ExperimentConfig& config, std::size_t n) {
    ClusterConfig c = config.cluster;
    c.n_pms = n;
    c.validate();
    return c;
}

SchedulerKind seeded(SchedulerKind kind, std::uint64_t seed) {
    if (auto* r = std::get_if<RandomSearch>(&kind))
        r->seed = seed;
    return kind;
}

Trace filtered(const Trace& trace, const FilterKind& filter, const ClusterConfig& c) {
    if (filter.kind == FilterKind::Kind::All)
        return trace;
    return apply_filter(trace, filter, c.pm_cpu, c.pm_mem);
}

} // namespace

ExperimentConfig parse_config(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::Config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw Error(Errc::Config, "config must be a JSON object");
    ExperimentConfig c;
    std::int64_t threshold = c.filter.threshold_cpu;
    for (const auto& [key, value] : doc.items()) {
        try {
            apply_field(c, key, value, threshold);
        } catch (const json::exception& e) {
            throw Error(Errc::Config, "config field '" + key + "': " + e.what());
        } catch (const Error& e) {
            if (e.code() == Errc::Config && std::string_view(e.what()).starts_with("unknown field"))
                throw;
            throw Error(Errc::Config, "config field '" + key + "': " + e.what());
        }
    }
    c.filter = with_threshold(c.filter, threshold);
    for (auto& f : c.filters)
        f = with_threshold(f, threshold);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path, Errc::Config, "config file"));
}

std::string dump_config(const ExperimentConfig& config) {
    return config_json(config).dump();
}

std::vector<VmSpec> parse_flavor_list(std::string_view text) {
    std::vector<VmSpec> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
        try {
            if (auto comma = line.find(','); comma != std::string::npos) {
                std::size_t used_cpu = 0;
                std::size_t used_mem = 0;
                const auto cpu_text = line.substr(0, comma);
                const auto mem_text = line.substr(comma + 1);
                const auto cpu = std::stoll(cpu_text, &used_cpu);
                const auto mem = std::stoll(mem_text, &used_mem);
                if (used_cpu != cpu_text.size() || used_mem != mem_text.size() || cpu < 1 || mem < 1)
                    throw std::invalid_argument("bad number");
                out.push_back(VmSpec::of(cpu, mem));
            } else {
                out.push_back(VmSpec::parse(line));
            }
        } catch (const std::exception&) {
            throw Error(Errc::Config, "flavor list line " + std::to_string(line_no) + ": cannot parse '" + line +
                                          "' (expected 12U8G or 12,8)");
        }
    }
    if (out.empty())
        throw Error(Errc::Config, "flavor list is empty");
    return out;
}

std::vector<VmSpec> load_flavor_file(const std::filesystem::path& path) {
    return parse_flavor_list(read_file(path, Errc::Config, "flavor file"));
}

std::vector<std::pair<VmSpec, double>> parse_weights(std::string_view text) {
    std::vector<std::pair<VmSpec, double>> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find(',', pos);
        if (end == std::string_view::npos)
            end = text.size();
        const auto item = text.substr(pos, end - pos);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::Config, "weight '" + std::string(item) + "' must look like 12U8G=0.5");
        const std::string number(item.substr(eq + 1));
        std::size_t used = 0;
        double w = 0.0;
        try {
            w = std::stod(number, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (number.empty() || used != number.size())
            throw Error(Errc::Config, "weight '" + std::string(item) + "' has a bad number");
        out.emplace_back(VmSpec::parse(item.substr(0, eq)), w);
        pos = end + 1;
    }
    return out;
}

std::string report_csv(const Report& report) {
    std::ostringstream os;
    os << "# " << provenance() << "\n";
    os << "# seed " << report.seed << "\n";
    os << "# config " << report.config_json << "\n";
    for (std::size_t i = 0; i < report.table.columns.size(); ++i)
        os << (i ? "," : "") << report.table.columns[i];
    os << "\n";
    for (const auto& row : report.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << cell_text(row[i]);
        os << "\n";
    }
    return os.str();
}

std::string report_json(const Report& report) {
    json rows = json::array();
    for (const auto& row : report.table.rows) {
        json r = json::object();
        for (std::size_t i = 0; i < row.size(); ++i)
            r[report.table.columns[i]] = cell_json(row[i]);
        rows.push_back(r);
    }
    json doc{{"vmplace", {{"version", kVersion}, {"git", kGitDescribe}}},
             {"seed", report.seed},
             {"config", json::parse(report.config_json)},
             {"columns", report.table.columns},
             {"rows", rows}};
    return doc.dump(2) + "\n";
}

void write_report(const Report& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error(Errc::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
    auto write = [&](const std::string& ext, const std::string& body) {
        const auto path = dir / (report.name + ext);
        std::ofstream out(path, std::ios::binary);
        if (!(out << body))
            throw Error(Errc::Io, "cannot write '" + path.string() + "'");
    };
    write(".csv", report_csv(report));
    write(".json", report_json(report));
}

Trace load_trace(const ExperimentConfig& config) {
    if (config.trace)
        return load_csv(*config.trace);
    config.synth.validate();
    return synth_generate(config.synth);
}

Report cmd_run(const ExperimentConfig& config) {
    config.validate();
    const Trace full = load_trace(config);
    Report report{"run", dump_config(config), config.seed, {}};
    report.table.columns = {"pms",          "algorithm",      "plan",           "alpha",
                            "lambda",       "unassign",       "filter",         "runs",
                            "average",      "quartile_1",     "quartile_2",     "quartile_3",
                            "alw_memory_mean", "alw_memory_std", "alw_cpu_mean", "alw_cpu_std",
                            "emergent_unassigns", "imbalance_unassigns"};

    const std::string dash = "-";
    for (auto n : config.pms) {
        const auto cluster = sized(config, n);
        full.flavors.check_fits(cluster.pm_capacity());
        const Trace trace = filtered(full, config.filter, cluster);
        const auto starts = sample_scenarios(trace, config.scenarios, config.seed);

        std::vector<RegionSplit> splits;
        if (config.reassigner != ReassignerMode::Off) {
            if (config.plans.empty()) {
                auto roles = split_by_role(full.flavors.flavors(), cluster.pm_capacity());
                splits.push_back(
                    solve_assignment(cluster.pm_cpu, cluster.pm_mem, roles.ci, roles.mi, config.lambda).split);
            }
            for (const auto& p : config.plans)
                splits.push_back({p.cpu, p.mem, cluster.pm_cpu - p.cpu, cluster.pm_mem - p.mem});
        }

        auto emit = [&](const SchedulerSpec& spec, std::vector<Cell> settings) {
            const auto suite = run_suite(trace, starts, cluster, spec);
            const auto& s = suite.stats;
            std::vector<Cell> row{static_cast<std::int64_t>(n), spec.label()};
            row.insert(row.end(), settings.begin(), settings.end());
            row.push_back(config.filter.label());
            auto stats = stats_cells(s);
            row.insert(row.end(), stats.begin(), stats.end());
            row.insert(row.end(), {s.alw_mem_mean, s.alw_mem_std, s.alw_cpu_mean, s.alw_cpu_std,
                                   mean_of(suite.runs, &UnassignCounts::emergent),
                                   mean_of(suite.runs, &UnassignCounts::imbalance)});
            report.table.rows.push_back(std::move(row));
        };

        for (const auto& kind : config.schedulers) {
            const auto base = seeded(kind, config.seed);
            if (config.reassigner != ReassignerMode::On)
                emit(SchedulerSpec{base, std::nullopt}, {dash, dash, dash, dash});
            if (config.reassigner == ReassignerMode::Off)
                continue;
            for (const auto& split : splits) {
                for (const auto& alpha : config.alphas) {
                    for (auto variant : config.unassign) {
                        IntensifierConfig ic;
                        ic.plan = split;
                        ic.lambda = config.lambda;
                        ic.alpha = alpha;
                        ic.emergent = variant == UnassignVariant::Both || variant == UnassignVariant::EmergentOnly;
                        ic.imbalance = variant == UnassignVariant::Both || variant == UnassignVariant::ImbalanceOnly;
                        const std::string plan = plan_name({split.c1, split.m1}) + "/" + plan_name({split.c2, split.m2});
                        emit(SchedulerSpec{base, ic}, {plan, alpha.to_string(), config.lambda, to_string(variant)});
                    }
                }
            }
        }
    }
    return report;
}

Report cmd_heterogeneity(const ExperimentConfig& config) {
    config.validate();
    const Trace full = load_trace(config);
    Report report{"heterogeneity", dump_config(config), config.seed, {}};
    report.table.columns = {"pms",        "filter",     "algorithm",  "runs",         "average",
                            "quartile_1", "quartile_2", "quartile_3", "gap_to_proxy_pct"};
    for (auto n : config.pms) {
        const auto cluster = sized(config, n);
        full.flavors.check_fits(cluster.pm_capacity());
        for (const auto& filter : config.filters) {
            const Trace trace = filtered(full, filter, cluster);
            const auto starts = sample_scenarios(trace, config.scenarios, config.seed);
            const auto proxy = random_search_suite(trace, starts, cluster, config.restarts, config.seed);
            auto emit = [&](const std::string& label, const SuiteStats& s) {
                const double gap = proxy.stats.mean > 0.0 ? 100.0 * (s.mean / proxy.stats.mean - 1.0) : 0.0;
                std::vector<Cell> row{static_cast<std::int64_t>(n), filter.label(), label};
                auto stats = stats_cells(s);
                row.insert(row.end(), stats.begin(), stats.end());
                row.push_back(gap);
                report.table.rows.push_back(std::move(row));
            };
            for (const auto& kind : config.schedulers) {
                const SchedulerSpec spec{seeded(kind, config.seed), std::nullopt};
                emit(spec.label(), run_suite(trace, starts, cluster, spec).stats);
            }
            emit("Optimal-proxy", proxy.stats);
        }
    }
    return report;
}

std::vector<VmSpec> resolve_flavors(const ExperimentConfig& config) {
    if (!config.flavors.empty())
        return config.flavors;
    if (config.trace) {
        const auto t = load_csv(*config.trace);
        return {t.flavors.flavors().begin(), t.flavors.flavors().end()};
    }
    std::vector<VmSpec> out;
    for (const auto& [spec, w] : config.synth.flavor_weights)
        if (w > 0.0)
            out.push_back(spec);
    return out;
}

AssignmentPlan cmd_solve_assign(const ExperimentConfig& config) {
    config.cluster.validate();
    if (!(config.lambda >= 0.0 && config.lambda <= 1.0))
        throw Error(Errc::Config, "config field 'lambda': must lie in [0, 1]");
    const FlavorSet flavors(resolve_flavors(config));
    flavors.check_fits(config.cluster.pm_capacity());
    auto roles = split_by_role(flavors.flavors(), config.cluster.pm_capacity());
    return solve_assignment(config.cluster.pm_cpu, config.cluster.pm_mem, roles.ci, roles.mi, config.lambda);
}

void cmd_gen_trace(const SynthConfig& synth, const std::filesystem::path& out) {
    synth.validate();
    if (out.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(out.parent_path(), ec);
    }
    write_csv(synth_generate(synth), out);
}

int exit_code(Errc code) noexcept {
    switch (code) {
    case Errc::Config:
    case Errc::InfeasibleAssignment:
    case Errc::EmptyFlavorSet:
    case Errc::InvalidFlavor:
    case Errc::ZeroRegionCapacity:
        return 1;
    case Errc::ParseError:
    case Errc::EmptyTrace:
    case Errc::NotEnoughRequests:
    case Errc::Io:
        return 2;
    default:
        return 3;
    }
}

} // namespace vmplace
