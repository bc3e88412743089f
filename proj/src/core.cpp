#include "vmplace/core.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <unordered_set>

namespace vmplace {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::CapacityViolation: return "CapacityViolation";
    case Errc::UnknownVm: return "UnknownVm";
    case Errc::DuplicateVm: return "DuplicateVm";
    case Errc::EmptyFlavorSet: return "EmptyFlavorSet";
    case Errc::InvalidFlavor: return "InvalidFlavor";
    case Errc::ZeroRegionCapacity: return "ZeroRegionCapacity";
    case Errc::NoFeasiblePm: return "NoFeasiblePm";
    case Errc::InfeasibleAssignment: return "InfeasibleAssignment";
    case Errc::NonEmptyCluster: return "NonEmptyCluster";
    case Errc::ParseError: return "ParseError";
    case Errc::EmptyTrace: return "EmptyTrace";
    case Errc::NotEnoughRequests: return "NotEnoughRequests";
    case Errc::Io: return "IoError";
    case Errc::Config: return "ConfigError";
    case Errc::InvariantViolation: return "InvariantViolation";
    }
    return "Unknown";
}

std::string_view to_string(Role r) noexcept {
    return r == Role::CpuIntensive ? "cpu-intensive" : "mem-intensive";
}

VmSpec VmSpec::of(std::int64_t cpu, std::int64_t mem) {
    return VmSpec{std::to_string(cpu) + "U" + std::to_string(mem) + "G", cpu, mem};
}

VmSpec VmSpec::parse(std::string_view name) {
    auto fail = [&] { return Error(Errc::InvalidFlavor, "cannot parse flavor '" + std::string(name) + "'"); };
    auto u = name.find_first_of("Uu");
    if (u == std::string_view::npos || name.empty() || (name.back() != 'G' && name.back() != 'g'))
        throw fail();
    std::int64_t cpu = 0;
    std::int64_t mem = 0;
    auto cpu_part = name.substr(0, u);
    auto mem_part = name.substr(u + 1, name.size() - u - 2);
    auto r1 = std::from_chars(cpu_part.data(), cpu_part.data() + cpu_part.size(), cpu);
    auto r2 = std::from_chars(mem_part.data(), mem_part.data() + mem_part.size(), mem);
    if (r1.ec != std::errc{} || r1.ptr != cpu_part.data() + cpu_part.size() || r2.ec != std::errc{} ||
        r2.ptr != mem_part.data() + mem_part.size() || cpu_part.empty() || mem_part.empty())
        throw fail();
    if (cpu < 1 || mem < 1)
        throw Error(Errc::InvalidFlavor, "flavor '" + std::string(name) + "' must have cpu >= 1 and mem >= 1");
    return VmSpec::of(cpu, mem);
}

FlavorSet::FlavorSet(std::vector<VmSpec> flavors) : flavors_(std::move(flavors)) {
    if (flavors_.empty())
        throw Error(Errc::EmptyFlavorSet, "flavor set must not be empty");
    std::unordered_set<std::string> ids;
    for (const auto& f : flavors_) {
        if (f.cpu < 1 || f.mem < 1)
            throw Error(Errc::InvalidFlavor, "flavor '" + f.flavor_id + "' must have cpu >= 1 and mem >= 1");
        if (!ids.insert(f.flavor_id).second)
            throw Error(Errc::InvalidFlavor, "duplicate flavor id '" + f.flavor_id + "'");
    }
}

bool FlavorSet::contains(const VmSpec& spec) const {
    return std::find(flavors_.begin(), flavors_.end(), spec) != flavors_.end();
}

const VmSpec* FlavorSet::find(std::string_view flavor_id) const {
    auto it = std::find_if(flavors_.begin(), flavors_.end(),
                           [&](const VmSpec& f) { return f.flavor_id == flavor_id; });
    return it == flavors_.end() ? nullptr : &*it;
}

void FlavorSet::check_fits(const Resources& pm_capacity) const {
    for (const auto& f : flavors_) {
        if (!f.demand().fits_in(pm_capacity)) {
            std::ostringstream os;
            os << "flavor '" << f.flavor_id << "' exceeds PM capacity " << pm_capacity.cpu << "U"
               << pm_capacity.mem << "G";
            throw Error(Errc::InvalidFlavor, os.str());
        }
    }
}

Resources PhysicalMachine::capacity() const noexcept {
    Resources total;
    for (const auto& n : numa)
        total += n.cap;
    return total;
}

Resources PhysicalMachine::used() const noexcept {
    Resources total;
    for (const auto& n : numa)
        total += n.used;
    return total;
}

bool ClusterConfig::is_large(const VmSpec& spec) const {
    if (auto it = large_vm_rule.overrides.find(spec.flavor_id); it != large_vm_rule.overrides.end())
        return it->second;
    auto k = static_cast<std::int64_t>(numa_per_pm);
    return spec.cpu > pm_cpu / k || spec.mem > pm_mem / k;
}

void ClusterConfig::validate() const {
    if (n_pms == 0)
        throw Error(Errc::Config, "cluster must have at least one PM");
    if (pm_cpu <= 0 || pm_mem <= 0)
        throw Error(Errc::Config, "PM capacities must be positive");
    if (numa_per_pm == 0)
        throw Error(Errc::Config, "numa_per_pm must be >= 1");
    auto k = static_cast<std::int64_t>(numa_per_pm);
    if (pm_cpu % k != 0 || pm_mem % k != 0)
        throw Error(Errc::Config, "PM capacities must be divisible by numa_per_pm");
}

std::vector<Resources> split_evenly(const Resources& total, std::size_t parts) {
    auto k = static_cast<std::int64_t>(parts);
    std::vector<Resources> out(parts);
    for (std::size_t i = 0; i < parts; ++i) {
        auto idx = static_cast<std::int64_t>(i);
        out[i].cpu = total.cpu / k + (idx < total.cpu % k ? 1 : 0);
        out[i].mem = total.mem / k + (idx < total.mem % k ? 1 : 0);
    }
    return out;
}

Cluster::Cluster(ClusterConfig config) : config_(std::move(config)) {
    config_.validate();
    const auto per_numa = split_evenly(config_.pm_capacity(), config_.numa_per_pm);
    pms_.reserve(config_.n_pms);
    for (PmId i = 0; i < config_.n_pms; ++i) {
        PhysicalMachine pm;
        pm.id = i;
        for (const auto& cap : per_numa)
            pm.numa.push_back(NumaNode{cap, {}, {}});
        pms_.push_back(std::move(pm));
    }
}

const Placement* Cluster::find(VmId id) const {
    auto it = placements_.find(id);
    return it == placements_.end() ? nullptr : &it->second;
}

void Cluster::unassign(PmId id) {
    auto& state = pm(id).partition;
    if (!state.partitioned())
        throw Error(Errc::InvariantViolation, "PM " + std::to_string(id) + " is already shared");
    state.mode = PartitionMode::Shared;
}

void Cluster::audit() const {
    const std::size_t k = config_.numa_per_pm;
    std::vector<std::vector<Resources>> numa_used(pms_.size(), std::vector<Resources>(k));
    std::vector<std::vector<std::array<Resources, 2>>> numa_region(pms_.size(),
                                                                   std::vector<std::array<Resources, 2>>(k));
    std::vector<std::array<Resources, 2>> pm_region(pms_.size());
    for (const auto& [id, p] : placements_) {
        Resources sum;
        for (std::size_t j = 0; j < p.numa_ids.size(); ++j) {
            numa_used[p.pm_id][p.numa_ids[j]] += p.numa_share[j];
            sum += p.numa_share[j];
            if (p.role_region) {
                numa_region[p.pm_id][p.numa_ids[j]][index(*p.role_region)] += p.numa_share[j];
                pm_region[p.pm_id][index(*p.role_region)] += p.numa_share[j];
            }
        }
        if (sum != p.spec.demand())
            throw Error(Errc::InvariantViolation, "placement of vm " + std::to_string(id) + " does not sum to its spec");
    }
    for (const auto& pm : pms_) {
        for (std::size_t n = 0; n < k; ++n) {
            const auto& node = pm.numa[n];
            auto where = "pm " + std::to_string(pm.id) + " numa " + std::to_string(n);
            if (node.used != numa_used[pm.id][n])
                throw Error(Errc::InvariantViolation, where + ": usage does not match placements");
            if (node.region_used != numa_region[pm.id][n])
                throw Error(Errc::InvariantViolation, where + ": region usage does not match placements");
            if (!node.used.fits_in(node.cap) || node.used.cpu < 0 || node.used.mem < 0)
                throw Error(Errc::InvariantViolation, where + ": usage out of bounds");
        }
        if (pm.partition.region_used != pm_region[pm.id])
            throw Error(Errc::InvariantViolation, "pm " + std::to_string(pm.id) + ": region totals drifted");
        if (pm.partitioned()) {
            for (Role r : {Role::CpuIntensive, Role::MemIntensive}) {
                if (!pm.partition.region_used[index(r)].fits_in(pm.partition.split->region(r)))
                    throw Error(Errc::InvariantViolation,
                                "pm " + std::to_string(pm.id) + ": region over capacity");
            }
        }
    }
}

std::vector<Resources> numa_free(const PhysicalMachine& pm, std::optional<Role> region) {
    std::vector<Resources> out;
    out.reserve(pm.numa.size());
    if (region) {
        const auto caps = split_evenly(pm.partition.split->region(*region), pm.numa.size());
        for (std::size_t i = 0; i < pm.numa.size(); ++i)
            out.push_back(caps[i] - pm.numa[i].region_used[index(*region)]);
    } else {
        for (const auto& n : pm.numa)
            out.push_back(n.cap - n.used);
    }
    return out;
}

Resources free_in(const PhysicalMachine& pm, std::optional<Role> region) {
    if (!region)
        return pm.free();
    return pm.partition.split->region(*region) - pm.partition.region_used[index(*region)];
}

namespace {

// NUMA indices and per-NUMA shares for a spec, or nullopt when it does not fit.
std::optional<std::pair<std::vector<std::size_t>, std::vector<Resources>>>
plan_numa(const PhysicalMachine& pm, const VmSpec& spec, std::optional<Role> region, const ClusterConfig& config) {
    if (region && !pm.partitioned())
        return std::nullopt;
    const auto free = numa_free(pm, region);
    if (config.is_large(spec)) {
        auto shares = split_evenly(spec.demand(), free.size());
        for (std::size_t i = 0; i < free.size(); ++i)
            if (!shares[i].fits_in(free[i]))
                return std::nullopt;
        std::vector<std::size_t> ids(free.size());
        for (std::size_t i = 0; i < ids.size(); ++i)
            ids[i] = i;
        return std::make_pair(std::move(ids), std::move(shares));
    }
    for (std::size_t i = 0; i < free.size(); ++i)
        if (spec.demand().fits_in(free[i]))
            return std::make_pair(std::vector<std::size_t>{i}, std::vector<Resources>{spec.demand()});
    return std::nullopt;
}

} // namespace

bool can_fit(const PhysicalMachine& pm, const VmSpec& spec, std::optional<Role> region,
             const ClusterConfig& config) {
    return plan_numa(pm, spec, region, config).has_value();
}

Placement& place(Cluster& cluster, VmId vm_id, const VmSpec& spec, PmId pm_id, std::optional<Role> region) {
    if (cluster.placements_.contains(vm_id))
        throw Error(Errc::DuplicateVm, "vm " + std::to_string(vm_id) + " is already placed");
    auto& pm = cluster.pm(pm_id);
    auto plan = plan_numa(pm, spec, region, cluster.config_);
    if (!plan)
        throw Error(Errc::CapacityViolation,
                    "vm " + std::to_string(vm_id) + " (" + spec.flavor_id + ") does not fit pm " + std::to_string(pm_id));
    auto& [ids, shares] = *plan;
    for (std::size_t j = 0; j < ids.size(); ++j) {
        auto& node = pm.numa[ids[j]];
        node.used += shares[j];
        if (region)
            node.region_used[index(*region)] += shares[j];
    }
    if (region)
        pm.partition.region_used[index(*region)] += spec.demand();
    Placement p{vm_id, spec, pm_id, std::move(ids), std::move(shares), region};
    return cluster.placements_.emplace(vm_id, std::move(p)).first->second;
}

void release(Cluster& cluster, VmId vm_id) {
    auto it = cluster.placements_.find(vm_id);
    if (it == cluster.placements_.end())
        throw Error(Errc::UnknownVm, "vm " + std::to_string(vm_id) + " is not placed");
    const auto& p = it->second;
    auto& pm = cluster.pm(p.pm_id);
    for (std::size_t j = 0; j < p.numa_ids.size(); ++j) {
        auto& node = pm.numa[p.numa_ids[j]];
        node.used -= p.numa_share[j];
        if (p.role_region)
            node.region_used[index(*p.role_region)] -= p.numa_share[j];
    }
    if (p.role_region)
        pm.partition.region_used[index(*p.role_region)] -= p.spec.demand();
    cluster.placements_.erase(it);
}

} // namespace vmplace
