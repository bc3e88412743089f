#pragma once

// Sequential trace replay: one run starts from a fresh cluster at a sampled
// position and stops at the first creation that cannot be placed.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmplace/alw.hpp"
#include "vmplace/reassigner.hpp"
#include "vmplace/schedulers.hpp"
#include "vmplace/trace.hpp"

namespace vmplace {

struct PlacementEvent {
    std::size_t seq = 0;
    VmId vm_id = 0;
    PmId pm_id = 0;
    std::optional<Role> region;

    friend bool operator==(const PlacementEvent&, const PlacementEvent&) = default;
};

struct RunResult {
    /// Creations handled before termination (or the end of the trace).
    std::size_t length = 0;
    AlwPair terminal_alw;
    UnassignCounts unassign;
    /// False when the trace ran out before any creation failed.
    bool terminated = false;
    std::vector<PlacementEvent> event_log;

    friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// A base policy, optionally wrapped by the intensifier.
struct SchedulerSpec {
    SchedulerKind base = FirstFit{};
    std::optional<IntensifierConfig> reassigner;

    /// "FF", "FF+RA", ...
    std::string label() const;
    std::unique_ptr<Scheduler> instantiate(std::span<const VmSpec> flavors) const;
};

struct RunOptions {
    /// Audit cluster bookkeeping after every event.
    bool audit = false;
    bool record_log = false;
};

/// Throws Errc::Config when start_index is out of range and propagates
/// internal invariant violations.
RunResult run(const Trace& trace, std::size_t start_index, const ClusterConfig& config, const SchedulerSpec& scheduler,
              const RunOptions& options = {});

struct SuiteStats {
    double mean = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double alw_mem_mean = 0.0;
    double alw_mem_std = 0.0;
    double alw_cpu_mean = 0.0;
    double alw_cpu_std = 0.0;
    std::size_t runs = 0;

    friend bool operator==(const SuiteStats&, const SuiteStats&) = default;
};

/// Linear-interpolation quantile of sorted data (position q * (n - 1)).
double quantile_linear(std::span<const double> sorted, double q);

/// Length quartiles plus mean and population standard deviation of ALW.
SuiteStats summarize(std::span<const RunResult> runs);

struct SuiteResult {
    SuiteStats stats;
    std::vector<RunResult> runs;  // in scenario order
};

SuiteResult run_suite(const Trace& trace, std::span<const std::size_t> scenarios, const ClusterConfig& config,
                      const SchedulerSpec& scheduler);

/// Best of `restarts` uniform-random rollouts plus one run of every heuristic
/// (FF, BF, BF2) on the same window; the optimal-proxy.
RunResult random_search(const Trace& trace, std::size_t start_index, const ClusterConfig& config, int restarts,
                        std::uint64_t seed);

std::size_t random_search_length(const Trace& trace, std::size_t start_index, const ClusterConfig& config,
                                 int restarts, std::uint64_t seed);

SuiteResult random_search_suite(const Trace& trace, std::span<const std::size_t> scenarios,
                                const ClusterConfig& config, int restarts, std::uint64_t seed);

} // namespace vmplace
