#include "vmplace/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace vmplace {

std::string SchedulerSpec::label() const {
    auto name = scheduler_label(base);
    return reassigner ? name + "+RA" : name;
}

std::unique_ptr<Scheduler> SchedulerSpec::instantiate(std::span<const VmSpec> flavors) const {
    if (reassigner)
        return intensify(base, *reassigner, flavors);
    return std::make_unique<PlainScheduler>(base);
}

RunResult run(const Trace& trace, std::size_t start_index, const ClusterConfig& config, const SchedulerSpec& spec,
              const RunOptions& options) {
    if (start_index > trace.requests.size())
        throw Error(Errc::Config, "start index " + std::to_string(start_index) + " beyond trace of " +
                                      std::to_string(trace.requests.size()) + " requests");
    Cluster cluster(config);
    auto scheduler = spec.instantiate(trace.flavors.flavors());
    scheduler->prepare(cluster);

    RunResult result;
    for (std::size_t i = start_index; i < trace.requests.size(); ++i) {
        const auto& r = trace.requests[i];
        if (r.event == EventKind::Delete) {
            // VMs created before the window started are not in the cluster.
            if (cluster.find(r.vm_id) != nullptr)
                scheduler->remove(cluster, r.vm_id);
        } else {
            auto pm = scheduler->create(cluster, r.vm_id, r.spec);
            if (!pm) {
                result.terminated = true;
                break;
            }
            ++result.length;
            if (options.record_log)
                result.event_log.push_back(PlacementEvent{r.seq, r.vm_id, *pm, cluster.find(r.vm_id)->role_region});
        }
        if (options.audit)
            cluster.audit();
    }
    cluster.audit();
    result.terminal_alw = cluster_alw(cluster, trace.flavors.flavors());
    result.unassign = scheduler->unassign_counts();
    return result;
}

double quantile_linear(std::span<const double> sorted, double q) {
    if (sorted.empty())
        return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

namespace {

std::pair<double, double> mean_std(std::span<const double> xs) {
    if (xs.empty())
        return {0.0, 0.0};
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n)};
}

// splitmix64 finalizer; decorrelates per-rollout seeds.
std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

SuiteStats summarize(std::span<const RunResult> runs) {
    SuiteStats s;
    s.runs = runs.size();
    if (runs.empty())
        return s;
    std::vector<double> lengths, mem, cpu;
    for (const auto& r : runs) {
        lengths.push_back(static_cast<double>(r.length));
        mem.push_back(static_cast<double>(r.terminal_alw.mem));
        cpu.push_back(static_cast<double>(r.terminal_alw.cpu));
    }
    std::sort(lengths.begin(), lengths.end());
    s.mean = mean_std(lengths).first;
    s.q1 = quantile_linear(lengths, 0.25);
    s.median = quantile_linear(lengths, 0.5);
    s.q3 = quantile_linear(lengths, 0.75);
    std::tie(s.alw_mem_mean, s.alw_mem_std) = mean_std(mem);
    std::tie(s.alw_cpu_mean, s.alw_cpu_std) = mean_std(cpu);
    return s;
}

SuiteResult run_suite(const Trace& trace, std::span<const std::size_t> scenarios, const ClusterConfig& config,
                      const SchedulerSpec& scheduler) {
    if (scenarios.empty())
        throw Error(Errc::Config, "suite needs at least one scenario");
    SuiteResult out;
    out.runs.reserve(scenarios.size());
    for (auto start : scenarios)
        out.runs.push_back(run(trace, start, config, scheduler));
    out.stats = summarize(out.runs);
    return out;
}

RunResult random_search(const Trace& trace, std::size_t start_index, const ClusterConfig& config, int restarts,
                        std::uint64_t seed) {
    if (restarts < 1)
        throw Error(Errc::Config, "random search needs restarts >= 1");
    std::optional<RunResult> best;
    auto consider = [&](RunResult r) {
        if (!best || r.length > best->length)
            best = std::move(r);
    };
    for (const SchedulerKind& h : {SchedulerKind{FirstFit{}}, SchedulerKind{BestFit{}}, SchedulerKind{Bf2{}}})
        consider(run(trace, start_index, config, SchedulerSpec{h, std::nullopt}));
    for (int i = 0; i < restarts; ++i) {
        const auto derived = mix(seed ^ mix(start_index) ^ mix(static_cast<std::uint64_t>(i) + 1));
        consider(run(trace, start_index, config, SchedulerSpec{RandomSearch{1, derived}, std::nullopt}));
    }
    return *best;
}

std::size_t random_search_length(const Trace& trace, std::size_t start_index, const ClusterConfig& config,
                                 int restarts, std::uint64_t seed) {
    return random_search(trace, start_index, config, restarts, seed).length;
}

SuiteResult random_search_suite(const Trace& trace, std::span<const std::size_t> scenarios,
                                const ClusterConfig& config, int restarts, std::uint64_t seed) {
    if (scenarios.empty())
        throw Error(Errc::Config, "suite needs at least one scenario");
    SuiteResult out;
    for (auto start : scenarios)
        out.runs.push_back(random_search(trace, start, config, restarts, seed));
    out.stats = summarize(out.runs);
    return out;
}

} // namespace vmplace
