#include "vmplace/schedulers.hpp"

#include <string>

namespace vmplace {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Stable argmin/argmax helpers: the first candidate wins ties, which is the
// lowest pm_id because candidates arrive ordered by pm_id.
template <class Key>
std::size_t argmin(std::span<const Candidate> c, Key key) {
    std::size_t best = 0;
    double best_key = key(c[0]);
    for (std::size_t i = 1; i < c.size(); ++i) {
        double k = key(c[i]);
        if (k < best_key) {
            best = i;
            best_key = k;
        }
    }
    return best;
}

} // namespace

Candidate make_candidate(const PhysicalMachine& pm, std::optional<Role> region) {
    const auto cap = pm.capacity();
    const auto used = pm.used();
    return Candidate{
        pm.id,
        region,
        free_in(pm, region),
        cap,
        static_cast<double>(used.cpu) / static_cast<double>(cap.cpu),
        static_cast<double>(used.mem) / static_cast<double>(cap.mem),
    };
}

std::string scheduler_name(const SchedulerKind& kind) {
    return std::visit(overloaded{
                          [](const FirstFit&) { return std::string("ff"); },
                          [](const BestFit&) { return std::string("bf"); },
                          [](const Bf2&) { return std::string("bf2"); },
                          [](const RandomSearch&) { return std::string("random"); },
                      },
                      kind);
}

std::string scheduler_label(const SchedulerKind& kind) {
    return std::visit(overloaded{
                          [](const FirstFit&) { return std::string("FF"); },
                          [](const BestFit&) { return std::string("BF"); },
                          [](const Bf2&) { return std::string("BF2"); },
                          [](const RandomSearch&) { return std::string("Random"); },
                      },
                      kind);
}

SchedulerKind parse_scheduler(std::string_view name) {
    if (name == "ff")
        return FirstFit{};
    if (name == "bf")
        return BestFit{};
    if (name == "bf2")
        return Bf2{};
    if (name == "random")
        return RandomSearch{};
    throw Error(Errc::Config, "unknown scheduler '" + std::string(name) + "' (expected ff, bf, bf2, random)");
}

Policy::Policy(SchedulerKind kind) : kind_(std::move(kind)) {
    if (const auto* r = std::get_if<RandomSearch>(&kind_))
        rng_.seed(r->seed);
}

std::size_t Policy::choose_index(std::span<const Candidate> candidates, const VmSpec& spec) {
    (void)spec;
    if (candidates.empty())
        throw Error(Errc::NoFeasiblePm, "no feasible PM for " + spec.flavor_id);
    return std::visit(
        overloaded{
            [](const FirstFit&) -> std::size_t { return 0; },
            [&](const BestFit&) -> std::size_t {
                return argmin(candidates, [](const Candidate& c) { return -c.used_cpu_frac; });
            },
            [&](const Bf2& w) -> std::size_t {
                return argmin(candidates, [&](const Candidate& c) {
                    return w.w_cpu * static_cast<double>(c.free.cpu) / static_cast<double>(c.capacity.cpu) +
                           w.w_mem * static_cast<double>(c.free.mem) / static_cast<double>(c.capacity.mem);
                });
            },
            [&](const RandomSearch&) -> std::size_t {
                std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
                return pick(rng_);
            },
        },
        kind_);
}

const Candidate& choose(const SchedulerKind& kind, std::span<const Candidate> candidates, const VmSpec& spec) {
    Policy policy(kind);
    return candidates[policy.choose_index(candidates, spec)];
}

std::vector<Candidate> plain_candidates(const Cluster& cluster, const VmSpec& spec) {
    std::vector<Candidate> out;
    for (const auto& pm : cluster.pms())
        if (can_fit(pm, spec, std::nullopt, cluster.config()))
            out.push_back(make_candidate(pm, std::nullopt));
    return out;
}

std::optional<PmId> PlainScheduler::create(Cluster& cluster, VmId vm_id, const VmSpec& spec) {
    auto candidates = plain_candidates(cluster, spec);
    if (candidates.empty())
        return std::nullopt;
    const auto& c = candidates[policy_.choose_index(candidates, spec)];
    place(cluster, vm_id, spec, c.pm_id, std::nullopt);
    return c.pm_id;
}

} // namespace vmplace
