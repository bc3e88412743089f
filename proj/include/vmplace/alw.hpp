#pragma once

// At-least-waste (ALW): the smallest residual of one resource that remains
// after packing copies of any single flavor into (delta_cpu, delta_mem).

#include <cstdint>
#include <span>

#include "vmplace/core.hpp"

namespace vmplace {

struct AlwPair {
    std::int64_t cpu = 0;
    std::int64_t mem = 0;

    friend bool operator==(const AlwPair&, const AlwPair&) = default;
};

/// min over v of delta_c - v.cpu * min(delta_c / v.cpu, delta_m / v.mem).
/// Throws Errc::EmptyFlavorSet for an empty `flavors`.
std::int64_t alw_cpu(std::int64_t delta_c, std::int64_t delta_m, std::span<const VmSpec> flavors);

/// Memory counterpart of alw_cpu.
std::int64_t alw_mem(std::int64_t delta_c, std::int64_t delta_m, std::span<const VmSpec> flavors);

inline AlwPair alw(const Resources& residual, std::span<const VmSpec> flavors) {
    return {alw_cpu(residual.cpu, residual.mem, flavors), alw_mem(residual.cpu, residual.mem, flavors)};
}

/// Sum of per-PM ALW over whole-PM residuals; partitions are ignored.
AlwPair cluster_alw(const Cluster& cluster, std::span<const VmSpec> flavors);

struct ImbalanceInputs {
    std::int64_t sum_ci_cpu = 0;
    std::int64_t sum_ci_mem = 0;
    std::int64_t sum_mi_cpu = 0;
    std::int64_t sum_mi_mem = 0;
    RegionSplit split;
    std::int64_t n_unassign = 0;
};

/// Cross-role utilization gap in PM equivalents, minus the PMs already
/// released for it. May be negative. Throws Errc::ZeroRegionCapacity when a
/// region capacity is not positive.
double imbalance(const ImbalanceInputs& in);

} // namespace vmplace
