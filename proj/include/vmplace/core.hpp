#pragma once

// Domain model: flavors, requests, NUMA-partitioned physical machines and the
// placement bookkeeping shared by schedulers, the intensifier and the replay
// engine.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vmplace/error.hpp"

namespace vmplace {

using VmId = std::int64_t;
using PmId = std::size_t;

/// A (CPU cores, memory units) pair. Used for capacities, usage and demands.
struct Resources {
    std::int64_t cpu = 0;
    std::int64_t mem = 0;

    constexpr Resources& operator+=(const Resources& o) noexcept {
        cpu += o.cpu;
        mem += o.mem;
        return *this;
    }
    constexpr Resources& operator-=(const Resources& o) noexcept {
        cpu -= o.cpu;
        mem -= o.mem;
        return *this;
    }
    friend constexpr Resources operator+(Resources a, const Resources& b) noexcept { return a += b; }
    friend constexpr Resources operator-(Resources a, const Resources& b) noexcept { return a -= b; }
    friend constexpr bool operator==(const Resources&, const Resources&) = default;

    /// True when both dimensions are <= the corresponding dimension of `room`.
    constexpr bool fits_in(const Resources& room) const noexcept {
        return cpu <= room.cpu && mem <= room.mem;
    }
    constexpr bool is_zero() const noexcept { return cpu == 0 && mem == 0; }
};

enum class Role : std::uint8_t { CpuIntensive = 0, MemIntensive = 1 };

constexpr std::size_t index(Role r) noexcept { return static_cast<std::size_t>(r); }
std::string_view to_string(Role r) noexcept;

struct VmSpec {
    std::string flavor_id;
    std::int64_t cpu = 0;
    std::int64_t mem = 0;

    /// Builds a spec whose id is the conventional "<cpu>U<mem>G" name.
    static VmSpec of(std::int64_t cpu, std::int64_t mem);
    /// Parses "12U8G"; throws Errc::InvalidFlavor on malformed input.
    static VmSpec parse(std::string_view name);

    Resources demand() const noexcept { return {cpu, mem}; }
    friend bool operator==(const VmSpec&, const VmSpec&) = default;
};

/// The flavor universe of a trace. Non-empty, ids unique, every flavor has
/// positive CPU and memory.
class FlavorSet {
public:
    FlavorSet() = default;
    explicit FlavorSet(std::vector<VmSpec> flavors);

    std::span<const VmSpec> flavors() const noexcept { return flavors_; }
    std::size_t size() const noexcept { return flavors_.size(); }
    bool empty() const noexcept { return flavors_.empty(); }
    bool contains(const VmSpec& spec) const;
    const VmSpec* find(std::string_view flavor_id) const;

    /// Throws Errc::InvalidFlavor when a flavor does not fit an empty PM.
    void check_fits(const Resources& pm_capacity) const;

    friend bool operator==(const FlavorSet&, const FlavorSet&) = default;

private:
    std::vector<VmSpec> flavors_;
};

enum class EventKind : std::uint8_t { Create, Delete };

struct Request {
    VmId vm_id = 0;
    EventKind event = EventKind::Create;
    VmSpec spec;  // meaningful for Create; Delete carries the spec when known
    std::size_t seq = 0;
    std::optional<std::int64_t> timestamp;

    friend bool operator==(const Request&, const Request&) = default;
};

struct NumaNode {
    Resources cap;
    Resources used;
    /// Per-role usage on this NUMA for region-tagged placements.
    std::array<Resources, 2> region_used{};

    friend bool operator==(const NumaNode&, const NumaNode&) = default;
};

/// Per-PM role-region capacities (c1, m1) for CPU-intensive and (c2, m2) for
/// memory-intensive requests.
struct RegionSplit {
    std::int64_t c1 = 0;
    std::int64_t m1 = 0;
    std::int64_t c2 = 0;
    std::int64_t m2 = 0;

    Resources region(Role r) const noexcept {
        return r == Role::CpuIntensive ? Resources{c1, m1} : Resources{c2, m2};
    }
    friend bool operator==(const RegionSplit&, const RegionSplit&) = default;
};

enum class PartitionMode : std::uint8_t { Shared, Partitioned };

/// Shared or Partitioned. The split and the per-role usage survive
/// unassignment so releases of region-tagged VMs stay exact.
struct PartitionState {
    PartitionMode mode = PartitionMode::Shared;
    std::optional<RegionSplit> split;
    std::array<Resources, 2> region_used{};

    bool partitioned() const noexcept { return mode == PartitionMode::Partitioned; }
    friend bool operator==(const PartitionState&, const PartitionState&) = default;
};

struct PhysicalMachine {
    PmId id = 0;
    std::vector<NumaNode> numa;
    PartitionState partition;

    Resources capacity() const noexcept;
    Resources used() const noexcept;
    Resources free() const noexcept { return capacity() - used(); }
    bool partitioned() const noexcept { return partition.partitioned(); }

    friend bool operator==(const PhysicalMachine&, const PhysicalMachine&) = default;
};

struct Placement {
    VmId vm_id = 0;
    VmSpec spec;
    PmId pm_id = 0;
    std::vector<std::size_t> numa_ids;
    std::vector<Resources> numa_share;  // parallel to numa_ids
    std::optional<Role> role_region;

    friend bool operator==(const Placement&, const Placement&) = default;
};

/// A VM is large (split across every NUMA) iff it exceeds one NUMA in either
/// dimension, unless a per-flavor override says otherwise.
struct LargeVmRule {
    std::map<std::string, bool, std::less<>> overrides;

    friend bool operator==(const LargeVmRule&, const LargeVmRule&) = default;
};

struct ClusterConfig {
    std::size_t n_pms = 100;
    std::int64_t pm_cpu = 128;
    std::int64_t pm_mem = 160;
    std::size_t numa_per_pm = 1;
    LargeVmRule large_vm_rule;

    Resources pm_capacity() const noexcept { return {pm_cpu, pm_mem}; }
    bool is_large(const VmSpec& spec) const;
    /// Throws Errc::Config on N = 0, non-positive capacities, K = 0 or
    /// capacities not divisible by K.
    void validate() const;

    friend bool operator==(const ClusterConfig&, const ClusterConfig&) = default;
};

/// Splits `total` into `parts` shares that differ by at most one unit in each
/// dimension; lower indices take the remainder.
std::vector<Resources> split_evenly(const Resources& total, std::size_t parts);

class Cluster {
public:
    explicit Cluster(ClusterConfig config);

    const ClusterConfig& config() const noexcept { return config_; }
    std::span<const PhysicalMachine> pms() const noexcept { return pms_; }
    const PhysicalMachine& pm(PmId id) const { return pms_.at(id); }
    PhysicalMachine& pm(PmId id) { return pms_.at(id); }
    const std::unordered_map<VmId, Placement>& placements() const noexcept { return placements_; }
    const Placement* find(VmId id) const;
    bool empty() const noexcept { return placements_.empty(); }

    /// Switches a Partitioned PM to Shared; usage bookkeeping is retained.
    void unassign(PmId id);

    /// Verifies per-NUMA and per-region usage against live placements.
    /// Throws Errc::InvariantViolation with a diagnostic on mismatch.
    void audit() const;

    friend bool operator==(const Cluster&, const Cluster&) = default;

private:
    friend Placement& place(Cluster&, VmId, const VmSpec&, PmId, std::optional<Role>);
    friend void release(Cluster&, VmId);

    ClusterConfig config_;
    std::vector<PhysicalMachine> pms_;
    std::unordered_map<VmId, Placement> placements_;
};

/// Free resources per NUMA, either within the role region (Partitioned PM) or
/// over the whole PM when `region` is empty.
std::vector<Resources> numa_free(const PhysicalMachine& pm, std::optional<Role> region);

/// Aggregate free resources in the region, or the whole PM.
Resources free_in(const PhysicalMachine& pm, std::optional<Role> region);

bool can_fit(const PhysicalMachine& pm, const VmSpec& spec, std::optional<Role> region,
             const ClusterConfig& config);

/// Places a VM. Small VMs take the lowest-index NUMA with room; large VMs
/// split equally over all NUMAs. Throws CapacityViolation or DuplicateVm.
Placement& place(Cluster& cluster, VmId vm_id, const VmSpec& spec, PmId pm_id,
                 std::optional<Role> region);

/// Exact inverse of place(). Throws UnknownVm.
void release(Cluster& cluster, VmId vm_id);

} // namespace vmplace
