#pragma once

// The role-assignment intensifier. Every PM starts split into a CPU-intensive
// region and a memory-intensive region sized by an exhaustive ALW
// minimization; requests are categorized by their CPU:memory ratio and a base
// policy only sees positions in the matching region. PMs are released to
// Shared when a request would otherwise fail (emergent) or when one role's
// utilization runs ahead of the other (imbalance).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vmplace/alw.hpp"
#include "vmplace/schedulers.hpp"

namespace vmplace {

/// CpuIntensive iff cpu/mem >= pm_cpu/pm_mem (cross-multiplied, inclusive).
Role categorize(const VmSpec& spec, std::int64_t pm_cpu, std::int64_t pm_mem) noexcept;

struct RoleFlavors {
    std::vector<VmSpec> ci;
    std::vector<VmSpec> mi;
};

RoleFlavors split_by_role(std::span<const VmSpec> flavors, const Resources& pm_capacity);

struct AssignmentPlan {
    RegionSplit split;
    double objective = 0.0;
    double lambda = 0.5;

    friend bool operator==(const AssignmentPlan&, const AssignmentPlan&) = default;
};

/// lambda * (CPU ALW of both regions) + (1 - lambda) * (memory ALW of both).
double assignment_objective(const RegionSplit& split, std::span<const VmSpec> ci, std::span<const VmSpec> mi,
                            double lambda);

/// Exhaustive search over integer (c1, m1), c2 = r_c - c1, m2 = r_m - m1.
/// Region 1 must hold every CPU-largest CPU-intensive flavor, region 2 every
/// memory-largest memory-intensive flavor. Ties: lower unweighted ALW sum,
/// then larger c1, then larger m1.
/// Throws Errc::EmptyFlavorSet or Errc::InfeasibleAssignment.
AssignmentPlan solve_assignment(std::int64_t r_c, std::int64_t r_m, std::span<const VmSpec> ci,
                                std::span<const VmSpec> mi, double lambda);

/// Partitions every PM of an empty cluster. Throws Errc::NonEmptyCluster or
/// Errc::Config when the split does not match the PM capacity.
void initialize(Cluster& cluster, const RegionSplit& split);

/// Positions open to a request of `role`: the matching region of Partitioned
/// PMs and the whole residual of Shared PMs, in pm_id order.
std::vector<Candidate> eligible_candidates(const Cluster& cluster, const VmSpec& spec, Role role);

/// Switches the first Partitioned PM whose whole-PM residual fits `spec` to
/// Shared.
std::optional<PmId> unassign_emergent(Cluster& cluster, const VmSpec& spec);

/// Imbalance threshold, absolute or as a multiple of the PM count ("0.3N").
struct Alpha {
    double value = 0.3;
    bool per_pm = true;

    double resolve(std::size_t n_pms) const noexcept {
        return per_pm ? value * static_cast<double>(n_pms) : value;
    }
    std::string to_string() const;
    /// Parses "0.3N", "0.3n" or a plain number; throws Errc::Config.
    static Alpha parse(std::string_view text);

    friend bool operator==(const Alpha&, const Alpha&) = default;
};

struct IntensifierState {
    AssignmentPlan plan;
    double alpha = 0.0;
    std::int64_t n_unassign_imbalance = 0;
    std::int64_t n_unassign_emergent = 0;
    /// Live usage per categorized role, cluster-wide.
    std::array<Resources, 2> role_usage{};

    ImbalanceInputs imbalance_inputs() const;
};

/// If imbalance >= alpha, switches the lowest-id empty Partitioned PM to
/// Shared and counts it.
std::optional<PmId> maybe_unassign_imbalance(Cluster& cluster, IntensifierState& state);

struct IntensifierConfig {
    /// Fixed split; solved from the flavor set when absent.
    std::optional<RegionSplit> plan;
    double lambda = 0.5;
    Alpha alpha;
    bool emergent = true;
    bool imbalance = true;
    /// When false every PM stays Shared, which reduces to the base policy.
    bool start_partitioned = true;

    friend bool operator==(const IntensifierConfig&, const IntensifierConfig&) = default;
};

class IntensifiedScheduler final : public Scheduler {
public:
    IntensifiedScheduler(SchedulerKind base, IntensifierConfig config, std::span<const VmSpec> flavors);

    void prepare(Cluster& cluster) override;
    std::optional<PmId> create(Cluster& cluster, VmId vm_id, const VmSpec& spec) override;
    void remove(Cluster& cluster, VmId vm_id) override;
    UnassignCounts unassign_counts() const override;

    const IntensifierState& state() const noexcept { return state_; }

private:
    Policy policy_;
    IntensifierConfig config_;
    std::vector<VmSpec> flavors_;
    IntensifierState state_;
    bool prepared_ = false;
};

std::unique_ptr<Scheduler> intensify(SchedulerKind base, IntensifierConfig config, std::span<const VmSpec> flavors);

} // namespace vmplace
