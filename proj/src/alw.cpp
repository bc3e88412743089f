#include "vmplace/alw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vmplace {

namespace {

void require_flavors(std::span<const VmSpec> flavors) {
    if (flavors.empty())
        throw Error(Errc::EmptyFlavorSet, "ALW needs at least one flavor");
}

} // namespace

std::int64_t alw_cpu(std::int64_t delta_c, std::int64_t delta_m, std::span<const VmSpec> flavors) {
    require_flavors(flavors);
    auto best = std::numeric_limits<std::int64_t>::max();
    for (const auto& v : flavors) {
        auto copies = std::min(delta_c / v.cpu, delta_m / v.mem);
        best = std::min(best, delta_c - v.cpu * copies);
    }
    return best;
}

std::int64_t alw_mem(std::int64_t delta_c, std::int64_t delta_m, std::span<const VmSpec> flavors) {
    require_flavors(flavors);
    auto best = std::numeric_limits<std::int64_t>::max();
    for (const auto& v : flavors) {
        auto copies = std::min(delta_m / v.mem, delta_c / v.cpu);
        best = std::min(best, delta_m - v.mem * copies);
    }
    return best;
}

AlwPair cluster_alw(const Cluster& cluster, std::span<const VmSpec> flavors) {
    require_flavors(flavors);
    AlwPair total;
    for (const auto& pm : cluster.pms()) {
        auto residual = pm.free();
        total.cpu += alw_cpu(residual.cpu, residual.mem, flavors);
        total.mem += alw_mem(residual.cpu, residual.mem, flavors);
    }
    return total;
}

double imbalance(const ImbalanceInputs& in) {
    const auto& s = in.split;
    if (s.c1 <= 0 || s.m1 <= 0 || s.c2 <= 0 || s.m2 <= 0)
        throw Error(Errc::ZeroRegionCapacity, "imbalance needs positive region capacities");
    const double cpu_gap = std::abs(static_cast<double>(in.sum_ci_cpu) / static_cast<double>(s.c1) -
                                    static_cast<double>(in.sum_mi_cpu) / static_cast<double>(s.c2));
    const double mem_gap = std::abs(static_cast<double>(in.sum_ci_mem) / static_cast<double>(s.m1) -
                                    static_cast<double>(in.sum_mi_mem) / static_cast<double>(s.m2));
    return std::min(cpu_gap, mem_gap) - static_cast<double>(in.n_unassign);
}

} // namespace vmplace
