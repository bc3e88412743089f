#pragma once

// Baseline placement policies (First-Fit, Best-Fit, BF2 weighted score and a
// seeded uniform-random policy) and the Scheduler interface the replay engine
// drives.

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vmplace/core.hpp"

namespace vmplace {

/// A feasible position for one request: a PM, and the role region on it when
/// the PM is Partitioned.
struct Candidate {
    PmId pm_id = 0;
    std::optional<Role> region;
    Resources free;      // residual in the region, or the whole PM
    Resources capacity;  // whole-PM capacity
    double used_cpu_frac = 0.0;
    double used_mem_frac = 0.0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

Candidate make_candidate(const PhysicalMachine& pm, std::optional<Role> region);

struct FirstFit {
    friend bool operator==(const FirstFit&, const FirstFit&) = default;
};
struct BestFit {
    friend bool operator==(const BestFit&, const BestFit&) = default;
};
struct Bf2 {
    double w_cpu = 0.5;
    double w_mem = 0.5;
    friend bool operator==(const Bf2&, const Bf2&) = default;
};
struct RandomSearch {
    int restarts = 1;
    std::uint64_t seed = 0;
    friend bool operator==(const RandomSearch&, const RandomSearch&) = default;
};

using SchedulerKind = std::variant<FirstFit, BestFit, Bf2, RandomSearch>;

/// Short CLI name: "ff", "bf", "bf2" or "random".
std::string scheduler_name(const SchedulerKind& kind);
/// Report label: "FF", "BF", "BF2" or "Random".
std::string scheduler_label(const SchedulerKind& kind);
/// Accepts the CLI names; throws Errc::Config otherwise.
SchedulerKind parse_scheduler(std::string_view name);

/// Stateful wrapper around a SchedulerKind; only RandomSearch carries state
/// (its generator).
class Policy {
public:
    explicit Policy(SchedulerKind kind);

    const SchedulerKind& kind() const noexcept { return kind_; }

    /// Index into `candidates` of the chosen position. Throws
    /// Errc::NoFeasiblePm on an empty list.
    std::size_t choose_index(std::span<const Candidate> candidates, const VmSpec& spec);

private:
    SchedulerKind kind_;
    std::mt19937_64 rng_;
};

const Candidate& choose(const SchedulerKind& kind, std::span<const Candidate> candidates, const VmSpec& spec);

struct UnassignCounts {
    std::int64_t emergent = 0;
    std::int64_t imbalance = 0;

    friend bool operator==(const UnassignCounts&, const UnassignCounts&) = default;
};

/// What the replay engine drives: one instance per run.
class Scheduler {
public:
    virtual ~Scheduler() = default;

    /// Called once on the fresh cluster before the first request.
    virtual void prepare(Cluster& cluster) { (void)cluster; }
    /// Places the VM and returns its PM, or nullopt when it cannot be placed.
    virtual std::optional<PmId> create(Cluster& cluster, VmId vm_id, const VmSpec& spec) = 0;
    virtual void remove(Cluster& cluster, VmId vm_id) { release(cluster, vm_id); }
    virtual UnassignCounts unassign_counts() const { return {}; }
};

/// All PMs whose whole-PM residual fits `spec`, in pm_id order.
std::vector<Candidate> plain_candidates(const Cluster& cluster, const VmSpec& spec);

class PlainScheduler final : public Scheduler {
public:
    explicit PlainScheduler(SchedulerKind kind) : policy_(std::move(kind)) {}

    std::optional<PmId> create(Cluster& cluster, VmId vm_id, const VmSpec& spec) override;

private:
    Policy policy_;
};

} // namespace vmplace
