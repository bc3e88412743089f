#include "vmplace/reassigner.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace vmplace {

Role categorize(const VmSpec& spec, std::int64_t pm_cpu, std::int64_t pm_mem) noexcept {
    return spec.cpu * pm_mem >= spec.mem * pm_cpu ? Role::CpuIntensive : Role::MemIntensive;
}

RoleFlavors split_by_role(std::span<const VmSpec> flavors, const Resources& pm_capacity) {
    RoleFlavors out;
    for (const auto& f : flavors)
        (categorize(f, pm_capacity.cpu, pm_capacity.mem) == Role::CpuIntensive ? out.ci : out.mi).push_back(f);
    return out;
}

double assignment_objective(const RegionSplit& s, std::span<const VmSpec> ci, std::span<const VmSpec> mi,
                            double lambda) {
    const auto cpu = alw_cpu(s.c1, s.m1, ci) + alw_cpu(s.c2, s.m2, mi);
    const auto mem = alw_mem(s.c1, s.m1, ci) + alw_mem(s.c2, s.m2, mi);
    return lambda * static_cast<double>(cpu) + (1.0 - lambda) * static_cast<double>(mem);
}

namespace {

// Minimum region that holds every flavor attaining the maximum of `key`.
template <class Key>
Resources largest_requirement(std::span<const VmSpec> flavors, Key key) {
    std::int64_t top = 0;
    for (const auto& f : flavors)
        top = std::max(top, key(f));
    Resources need;
    for (const auto& f : flavors) {
        if (key(f) == top) {
            need.cpu = std::max(need.cpu, f.cpu);
            need.mem = std::max(need.mem, f.mem);
        }
    }
    return need;
}

std::string describe(const Resources& r) {
    return std::to_string(r.cpu) + "U" + std::to_string(r.mem) + "G";
}

} // namespace

AssignmentPlan solve_assignment(std::int64_t r_c, std::int64_t r_m, std::span<const VmSpec> ci,
                                std::span<const VmSpec> mi, double lambda) {
    if (ci.empty() || mi.empty())
        throw Error(Errc::EmptyFlavorSet, "assignment needs both CPU-intensive and memory-intensive flavors");
    if (lambda < 0.0 || lambda > 1.0)
        throw Error(Errc::Config, "lambda must lie in [0, 1]");

    const auto need1 = largest_requirement(ci, [](const VmSpec& f) { return f.cpu; });
    const auto need2 = largest_requirement(mi, [](const VmSpec& f) { return f.mem; });
    const std::int64_t c1_lo = need1.cpu;
    const std::int64_t c1_hi = r_c - need2.cpu;
    const std::int64_t m1_lo = need1.mem;
    const std::int64_t m1_hi = r_m - need2.mem;
    if (c1_lo > c1_hi || m1_lo > m1_hi) {
        std::ostringstream os;
        os << "region 1 must hold " << describe(need1) << " and region 2 must hold " << describe(need2)
           << " within " << describe({r_c, r_m});
        throw Error(Errc::InfeasibleAssignment, os.str());
    }

    // Lexicographic key: (objective, unweighted ALW sum); iteration order
    // (c1 desc, m1 desc) with strict improvement gives the c1/m1 tie-break.
    std::optional<AssignmentPlan> best;
    double best_secondary = std::numeric_limits<double>::infinity();
    for (std::int64_t c1 = c1_hi; c1 >= c1_lo; --c1) {
        for (std::int64_t m1 = m1_hi; m1 >= m1_lo; --m1) {
            const RegionSplit s{c1, m1, r_c - c1, r_m - m1};
            const auto cpu = alw_cpu(s.c1, s.m1, ci) + alw_cpu(s.c2, s.m2, mi);
            const auto mem = alw_mem(s.c1, s.m1, ci) + alw_mem(s.c2, s.m2, mi);
            const double obj = lambda * static_cast<double>(cpu) + (1.0 - lambda) * static_cast<double>(mem);
            const double secondary = static_cast<double>(cpu + mem);
            if (!best || obj < best->objective || (obj == best->objective && secondary < best_secondary)) {
                best = AssignmentPlan{s, obj, lambda};
                best_secondary = secondary;
            }
        }
    }
    return *best;
}

void initialize(Cluster& cluster, const RegionSplit& split) {
    if (!cluster.empty())
        throw Error(Errc::NonEmptyCluster, "cannot partition a cluster that already hosts VMs");
    const auto& cfg = cluster.config();
    if (split.c1 < 0 || split.c2 < 0 || split.m1 < 0 || split.m2 < 0 || split.c1 + split.c2 != cfg.pm_cpu ||
        split.m1 + split.m2 != cfg.pm_mem)
        throw Error(Errc::Config, "region split does not add up to the PM capacity");
    for (PmId i = 0; i < cfg.n_pms; ++i) {
        auto& pm = cluster.pm(i);
        pm.partition = PartitionState{PartitionMode::Partitioned, split, {}};
        for (auto& n : pm.numa)
            n.region_used = {};
    }
}

std::vector<Candidate> eligible_candidates(const Cluster& cluster, const VmSpec& spec, Role role) {
    std::vector<Candidate> out;
    for (const auto& pm : cluster.pms()) {
        const std::optional<Role> region = pm.partitioned() ? std::optional<Role>(role) : std::nullopt;
        if (can_fit(pm, spec, region, cluster.config()))
            out.push_back(make_candidate(pm, region));
    }
    return out;
}

std::optional<PmId> unassign_emergent(Cluster& cluster, const VmSpec& spec) {
    for (const auto& pm : cluster.pms()) {
        if (pm.partitioned() && can_fit(pm, spec, std::nullopt, cluster.config())) {
            cluster.unassign(pm.id);
            return pm.id;
        }
    }
    return std::nullopt;
}

std::string Alpha::to_string() const {
    std::ostringstream os;
    os << value;
    if (per_pm)
        os << "N";
    return os.str();
}

Alpha Alpha::parse(std::string_view text) {
    Alpha a{0.0, false};
    auto body = text;
    if (!body.empty() && (body.back() == 'N' || body.back() == 'n')) {
        a.per_pm = true;
        body.remove_suffix(1);
    }
    if (body.empty() && a.per_pm) {
        a.value = 1.0;
        return a;
    }
    // std::from_chars for double is unavailable on older libstdc++.
    std::string buf(body);
    std::size_t used = 0;
    try {
        a.value = std::stod(buf, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (buf.empty() || used != buf.size() || a.value < 0.0)
        throw Error(Errc::Config, "bad alpha '" + std::string(text) + "' (expected e.g. 0.3N or 6)");
    return a;
}

ImbalanceInputs IntensifierState::imbalance_inputs() const {
    const auto& ci = role_usage[index(Role::CpuIntensive)];
    const auto& mi = role_usage[index(Role::MemIntensive)];
    return ImbalanceInputs{ci.cpu, ci.mem, mi.cpu, mi.mem, plan.split, n_unassign_imbalance};
}

std::optional<PmId> maybe_unassign_imbalance(Cluster& cluster, IntensifierState& state) {
    if (imbalance(state.imbalance_inputs()) < state.alpha)
        return std::nullopt;
    for (const auto& pm : cluster.pms()) {
        if (pm.partitioned() && pm.used().is_zero()) {
            cluster.unassign(pm.id);
            ++state.n_unassign_imbalance;
            return pm.id;
        }
    }
    return std::nullopt;
}

IntensifiedScheduler::IntensifiedScheduler(SchedulerKind base, IntensifierConfig config,
                                           std::span<const VmSpec> flavors)
    : policy_(std::move(base)), config_(std::move(config)), flavors_(flavors.begin(), flavors.end()) {}

void IntensifiedScheduler::prepare(Cluster& cluster) {
    state_ = IntensifierState{};
    prepared_ = true;
    const auto& cfg = cluster.config();
    state_.alpha = config_.alpha.resolve(cfg.n_pms);
    if (!config_.start_partitioned)
        return;
    auto roles = split_by_role(flavors_, cfg.pm_capacity());
    if (config_.plan) {
        state_.plan = AssignmentPlan{*config_.plan, 0.0, config_.lambda};
        if (!roles.ci.empty() && !roles.mi.empty())
            state_.plan.objective = assignment_objective(*config_.plan, roles.ci, roles.mi, config_.lambda);
    } else {
        state_.plan = solve_assignment(cfg.pm_cpu, cfg.pm_mem, roles.ci, roles.mi, config_.lambda);
    }
    initialize(cluster, state_.plan.split);
}

std::optional<PmId> IntensifiedScheduler::create(Cluster& cluster, VmId vm_id, const VmSpec& spec) {
    if (!prepared_)
        throw Error(Errc::InvariantViolation, "intensified scheduler used before prepare()");
    const auto& cfg = cluster.config();
    const Role role = categorize(spec, cfg.pm_cpu, cfg.pm_mem);
    auto candidates = eligible_candidates(cluster, spec, role);
    if (candidates.empty() && config_.emergent) {
        if (unassign_emergent(cluster, spec)) {
            ++state_.n_unassign_emergent;
            candidates = eligible_candidates(cluster, spec, role);
        }
    }
    if (candidates.empty())
        return std::nullopt;

    const auto& chosen = candidates[policy_.choose_index(candidates, spec)];
    place(cluster, vm_id, spec, chosen.pm_id, chosen.region);
    state_.role_usage[index(role)] += spec.demand();

    if (config_.imbalance && config_.start_partitioned)
        maybe_unassign_imbalance(cluster, state_);
    return chosen.pm_id;
}

void IntensifiedScheduler::remove(Cluster& cluster, VmId vm_id) {
    const auto* p = cluster.find(vm_id);
    if (p == nullptr)
        throw Error(Errc::UnknownVm, "vm " + std::to_string(vm_id) + " is not placed");
    const auto& cfg = cluster.config();
    state_.role_usage[index(categorize(p->spec, cfg.pm_cpu, cfg.pm_mem))] -= p->spec.demand();
    release(cluster, vm_id);
}

UnassignCounts IntensifiedScheduler::unassign_counts() const {
    return {state_.n_unassign_emergent, state_.n_unassign_imbalance};
}

std::unique_ptr<Scheduler> intensify(SchedulerKind base, IntensifierConfig config, std::span<const VmSpec> flavors) {
    return std::make_unique<IntensifiedScheduler>(std::move(base), std::move(config), flavors);
}

} // namespace vmplace
