#pragma once

// Experiment orchestration and report emission behind the command-line
// harness. Configs are JSON documents whose keys mirror the CLI flags.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vmplace/sim.hpp"

namespace vmplace {

/// Which unassign schemes an intensified run keeps (ablation axis).
enum class UnassignVariant { Both, EmergentOnly, ImbalanceOnly, None };
std::string to_string(UnassignVariant v);
/// "both", "emergent", "imbalance", "none"; throws Errc::Config.
UnassignVariant parse_unassign(std::string_view text);

/// Baseline rows, intensified rows, or both for every scheduler.
enum class ReassignerMode { Off, On, Both };
std::string to_string(ReassignerMode m);
/// "off", "on", "both"; throws Errc::Config.
ReassignerMode parse_reassigner(std::string_view text);

struct ExperimentConfig {
    /// n_pms is ignored; cluster sizes come from `pms`.
    ClusterConfig cluster;
    std::vector<std::size_t> pms{100};
    std::vector<SchedulerKind> schedulers{FirstFit{}, BestFit{}, Bf2{}};
    ReassignerMode reassigner = ReassignerMode::Both;
    double lambda = 0.5;
    std::vector<Alpha> alphas{Alpha{}};
    std::vector<UnassignVariant> unassign{UnassignVariant::Both};
    /// Fixed region-1 sizes (c1, m1); empty means solve per flavor set.
    std::vector<Resources> plans;
    /// CSV trace; the synthetic generator is used when absent.
    std::optional<std::filesystem::path> trace;
    SynthConfig synth = default_synth_config();
    /// Flavor universe for solve-assign when given.
    std::vector<VmSpec> flavors;
    std::size_t scenarios = 60;
    std::uint64_t seed = 0;
    FilterKind filter;
    std::vector<FilterKind> filters = FilterKind::every();
    int restarts = 20;
    std::optional<std::filesystem::path> out;
    bool json = false;

    /// Throws Errc::Config naming the offending field.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses a JSON config; unknown fields and type mismatches raise
/// Errc::Config with the field name (and line/column for syntax errors).
ExperimentConfig parse_config(std::string_view json_text);
/// Throws Errc::Config when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical compact JSON; parse_config(dump_config(c)) == c.
std::string dump_config(const ExperimentConfig& config);

/// One flavor per line as "12U8G" or "12,8"; blank lines and '#' comments
/// are skipped. Throws Errc::Config with the line number.
std::vector<VmSpec> parse_flavor_list(std::string_view text);
std::vector<VmSpec> load_flavor_file(const std::filesystem::path& path);
/// "12U8G=0.5,24U16G=0.5"; throws Errc::Config.
std::vector<std::pair<VmSpec, double>> parse_weights(std::string_view text);

using Cell = std::variant<std::string, std::int64_t, double>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    friend bool operator==(const Table&, const Table&) = default;
};

struct Report {
    /// File stem: "run" or "heterogeneity".
    std::string name;
    std::string config_json;
    std::uint64_t seed = 0;
    Table table;
};

/// Header comment lines (version, seed, config) followed by the table.
/// Doubles are printed with four decimals.
std::string report_csv(const Report& report);
/// Same fields as report_csv; doubles carry the CSV-rounded values.
std::string report_json(const Report& report);
/// Writes <dir>/<name>.csv and <dir>/<name>.json; throws Errc::Io.
void write_report(const Report& report, const std::filesystem::path& dir);

/// The configured CSV trace or a synthetic one.
Trace load_trace(const ExperimentConfig& config);

/// run_suite for every cell of pms x scheduler x reassigner (x plan x alpha x
/// unassign for intensified cells), all on the same sampled scenarios.
Report cmd_run(const ExperimentConfig& config);

/// Per cluster size and filter: every configured scheduler plus the
/// optimal-proxy, with the gap of each to the proxy mean.
Report cmd_heterogeneity(const ExperimentConfig& config);

/// Flavor set used by solve-assign: explicit flavors, else the CSV trace's
/// flavors, else the synthetic weights' flavors with nonzero weight.
std::vector<VmSpec> resolve_flavors(const ExperimentConfig& config);
AssignmentPlan cmd_solve_assign(const ExperimentConfig& config);

void cmd_gen_trace(const SynthConfig& synth, const std::filesystem::path& out);

/// 1 config, 2 trace, 3 internal invariant.
int exit_code(Errc code) noexcept;

} // namespace vmplace
