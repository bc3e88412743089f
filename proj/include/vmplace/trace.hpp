#pragma once

// Request traces: CSV ingestion in the public Huawei-East-1 layout
// (vmid,cpu,memory,time,type), seeded synthetic generation, scenario start
// sampling and the homogeneity filters.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vmplace/core.hpp"

namespace vmplace {

struct Trace {
    std::vector<Request> requests;
    FlavorSet flavors;
    /// Deletions dropped at load time because their VM was never created.
    std::size_t dropped_deletes = 0;

    std::size_t creations() const noexcept;
    /// Throws Errc::InvariantViolation when seq is not strictly increasing or
    /// a creation uses a flavor outside the set.
    void validate() const;

    friend bool operator==(const Trace&, const Trace&) = default;
};

/// Parses CSV rows `vmid,cpu,memory,time,type` (type 0 create, 1 delete). A
/// header line is recognized by a non-numeric first field. The flavor set is
/// the distinct (cpu, memory) pairs sorted ascending.
/// Throws Errc::ParseError (with the line number) or Errc::EmptyTrace.
Trace parse_csv(std::istream& in);
/// Throws Errc::Io when the file cannot be opened.
Trace load_csv(const std::filesystem::path& path);

void write_csv(const Trace& trace, std::ostream& out);
void write_csv(const Trace& trace, const std::filesystem::path& path);

/// k creation positions drawn uniformly without replacement, sorted.
/// Throws Errc::NotEnoughRequests.
std::vector<std::size_t> sample_scenarios(const Trace& trace, std::size_t k, std::uint64_t seed);

struct FilterKind {
    enum class Kind { All, CpuIntensiveOnly, MemIntensiveOnly, SmallOnly, LargeOnly };
    Kind kind = Kind::All;
    /// Small means cpu <= threshold_cpu, large means cpu > threshold_cpu.
    std::int64_t threshold_cpu = 32;

    std::string name() const;
    std::string label() const;
    /// "all", "ci", "mi", "small", "large"; throws Errc::Config.
    static FilterKind parse(std::string_view text);
    static std::vector<FilterKind> every();

    friend bool operator==(const FilterKind&, const FilterKind&) = default;
};

bool passes(const FilterKind& filter, const VmSpec& spec, std::int64_t pm_cpu, std::int64_t pm_mem);

/// Keeps creations that pass the filter and deletions of kept VMs; seq is
/// renumbered and the flavor set narrowed to passing flavors.
/// Throws Errc::EmptyTrace if nothing survives.
Trace apply_filter(const Trace& trace, const FilterKind& filter, std::int64_t pm_cpu, std::int64_t pm_mem);

struct SynthConfig {
    std::vector<std::pair<VmSpec, double>> flavor_weights;
    double delete_prob = 0.3;
    std::size_t length = 20000;
    std::uint64_t seed = 0;
    /// Mean run length of consecutive creations sharing one flavor
    /// (geometric); 1 draws every creation independently.
    double burst_mean = 1.0;

    /// Throws Errc::Config on bad weights or probabilities.
    void validate() const;

    friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// Twelve flavors over three CPU:memory ratios (3:2, 1:2, 1:4).
std::vector<VmSpec> default_flavors();
/// default_flavors() with weights in which CPU-intensive requests carry
/// roughly 3.6 times the CPU demand of memory-intensive ones, in bursts of
/// mean length 4.
SynthConfig default_synth_config();

/// At each step: with probability delete_prob delete a uniformly chosen live
/// VM (when any), otherwise create one with a flavor drawn from the weights.
/// With burst_mean > 1 a creation repeats the previous creation's flavor with
/// probability 1 - 1/burst_mean, which keeps the flavor mix but clusters it.
Trace synth_generate(const SynthConfig& config);

} // namespace vmplace
