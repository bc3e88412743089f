#pragma once

// Test-side reference implementations. They share no code with the library
// beyond plain value types.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <tuple>
#include <vector>

namespace oracle {

struct Flavor {
    std::int64_t cpu;
    std::int64_t mem;
};

// Packs copies of one flavor greedily, one at a time, until the next copy no
// longer fits; returns the leftover (cpu, mem).
inline std::pair<std::int64_t, std::int64_t> pack_single(std::int64_t dc, std::int64_t dm, Flavor f) {
    while (dc >= f.cpu && dm >= f.mem) {
        dc -= f.cpu;
        dm -= f.mem;
    }
    return {dc, dm};
}

inline std::int64_t waste_cpu(std::int64_t dc, std::int64_t dm, const std::vector<Flavor>& fs) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (const auto& f : fs)
        best = std::min(best, pack_single(dc, dm, f).first);
    return best;
}

inline std::int64_t waste_mem(std::int64_t dc, std::int64_t dm, const std::vector<Flavor>& fs) {
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    for (const auto& f : fs)
        best = std::min(best, pack_single(dc, dm, f).second);
    return best;
}

inline bool is_cpu_intensive(Flavor f, std::int64_t rc, std::int64_t rm) {
    // cpu/mem >= rc/rm, compared as fractions
    return f.cpu * rm >= f.mem * rc;
}

struct Split {
    std::int64_t c1, m1, c2, m2;
    double objective;
};

// Every integer (c1, m1) in [0, rc] x [0, rm]; region 1 must host each
// CPU-intensive flavor of maximal cpu, region 2 each memory-intensive flavor
// of maximal mem. Key: (objective, cpu+mem waste, -c1, -m1).
inline std::optional<Split> best_split(std::int64_t rc, std::int64_t rm, const std::vector<Flavor>& ci,
                                       const std::vector<Flavor>& mi, double lambda) {
    std::int64_t top_cpu = 0, top_mem = 0;
    for (auto f : ci)
        top_cpu = std::max(top_cpu, f.cpu);
    for (auto f : mi)
        top_mem = std::max(top_mem, f.mem);
    std::optional<Split> best;
    std::tuple<double, std::int64_t, std::int64_t, std::int64_t> best_key;
    for (std::int64_t c1 = 0; c1 <= rc; ++c1) {
        for (std::int64_t m1 = 0; m1 <= rm; ++m1) {
            const std::int64_t c2 = rc - c1, m2 = rm - m1;
            bool ok = true;
            for (auto f : ci)
                if (f.cpu == top_cpu && (f.cpu > c1 || f.mem > m1))
                    ok = false;
            for (auto f : mi)
                if (f.mem == top_mem && (f.cpu > c2 || f.mem > m2))
                    ok = false;
            if (!ok)
                continue;
            const auto wc = waste_cpu(c1, m1, ci) + waste_cpu(c2, m2, mi);
            const auto wm = waste_mem(c1, m1, ci) + waste_mem(c2, m2, mi);
            const double obj = lambda * double(wc) + (1.0 - lambda) * double(wm);
            auto key = std::make_tuple(obj, wc + wm, -c1, -m1);
            if (!best || key < best_key) {
                best = Split{c1, m1, c2, m2, obj};
                best_key = key;
            }
        }
    }
    return best;
}

// Linear-interpolation quantile written from the definition.
inline double quantile(std::vector<double> xs, double q) {
    std::sort(xs.begin(), xs.end());
    const double h = (double(xs.size()) - 1.0) * q;
    const auto i = static_cast<std::size_t>(h);
    if (i + 1 >= xs.size())
        return xs.back();
    return xs[i] + (h - double(i)) * (xs[i + 1] - xs[i]);
}

} // namespace oracle
