#include "vmplace/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "vmplace/reassigner.hpp"

namespace vmplace {

std::size_t Trace::creations() const noexcept {
    return static_cast<std::size_t>(std::count_if(requests.begin(), requests.end(),
                                                  [](const Request& r) { return r.event == EventKind::Create; }));
}

void Trace::validate() const {
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const auto& r = requests[i];
        if (i > 0 && r.seq <= requests[i - 1].seq)
            throw Error(Errc::InvariantViolation, "trace seq not strictly increasing at " + std::to_string(i));
        if (r.event == EventKind::Create && !flavors.contains(r.spec))
            throw Error(Errc::InvariantViolation, "creation at seq " + std::to_string(r.seq) + " uses flavor " +
                                                      r.spec.flavor_id + " outside the flavor set");
    }
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

bool parse_int(std::string_view s, std::int64_t& out) {
    if (s.empty())
        return false;
    auto r = std::from_chars(s.data(), s.data() + s.size(), out);
    return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

} // namespace

Trace parse_csv(std::istream& in) {
    Trace trace;
    std::unordered_map<VmId, VmSpec> live;
    std::set<std::pair<std::int64_t, std::int64_t>> pairs;
    std::string line;
    std::size_t line_no = 0;
    std::size_t seq = 0;
    auto fail = [&](const std::string& why) {
        return Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        auto view = trim(line);
        if (view.empty())
            continue;
        auto fields = split_fields(view);
        std::int64_t first = 0;
        if (line_no == 1 && trace.requests.empty() && !parse_int(fields[0], first))
            continue;  // header
        if (fields.size() != 5)
            throw fail("expected 5 fields (vmid,cpu,memory,time,type), got " + std::to_string(fields.size()));
        std::int64_t v[5];
        for (std::size_t i = 0; i < 5; ++i)
            if (!parse_int(fields[i], v[i]))
                throw fail("field " + std::to_string(i + 1) + " is not an integer: '" + std::string(fields[i]) + "'");
        const VmId vm = v[0];
        if (v[4] == 0) {
            if (v[1] < 1 || v[2] < 1)
                throw fail("cpu and memory must be positive");
            if (live.contains(vm))
                throw fail("vm " + std::to_string(vm) + " created while still live");
            auto spec = VmSpec::of(v[1], v[2]);
            pairs.emplace(v[1], v[2]);
            live.emplace(vm, spec);
            trace.requests.push_back(Request{vm, EventKind::Create, std::move(spec), seq++, v[3]});
        } else if (v[4] == 1) {
            auto it = live.find(vm);
            if (it == live.end()) {
                ++trace.dropped_deletes;
                continue;
            }
            trace.requests.push_back(Request{vm, EventKind::Delete, it->second, seq++, v[3]});
            live.erase(it);
        } else {
            throw fail("type must be 0 (create) or 1 (delete), got " + std::to_string(v[4]));
        }
    }
    if (pairs.empty())
        throw Error(Errc::EmptyTrace, "trace contains no creation requests");
    std::vector<VmSpec> flavors;
    for (const auto& [c, m] : pairs)
        flavors.push_back(VmSpec::of(c, m));
    trace.flavors = FlavorSet(std::move(flavors));
    trace.validate();
    return trace;
}

Trace load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::Io, "cannot open trace file '" + path.string() + "'");
    return parse_csv(in);
}

void write_csv(const Trace& trace, std::ostream& out) {
    out << "vmid,cpu,memory,time,type\n";
    for (const auto& r : trace.requests) {
        out << r.vm_id << ',' << r.spec.cpu << ',' << r.spec.mem << ','
            << r.timestamp.value_or(static_cast<std::int64_t>(r.seq)) << ','
            << (r.event == EventKind::Create ? 0 : 1) << '\n';
    }
}

void write_csv(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error(Errc::Io, "cannot write trace file '" + path.string() + "'");
    write_csv(trace, out);
    if (!out)
        throw Error(Errc::Io, "failed writing trace file '" + path.string() + "'");
}

std::vector<std::size_t> sample_scenarios(const Trace& trace, std::size_t k, std::uint64_t seed) {
    if (k == 0)
        throw Error(Errc::Config, "scenario count must be >= 1");
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < trace.requests.size(); ++i)
        if (trace.requests[i].event == EventKind::Create)
            positions.push_back(i);
    if (positions.size() < k)
        throw Error(Errc::NotEnoughRequests, "need " + std::to_string(k) + " creation requests, trace has " +
                                                 std::to_string(positions.size()));
    std::vector<std::size_t> out;
    out.reserve(k);
    std::mt19937_64 rng(seed);
    std::sample(positions.begin(), positions.end(), std::back_inserter(out), k, rng);
    std::sort(out.begin(), out.end());
    return out;
}

std::string FilterKind::name() const {
    switch (kind) {
    case Kind::All: return "all";
    case Kind::CpuIntensiveOnly: return "ci";
    case Kind::MemIntensiveOnly: return "mi";
    case Kind::SmallOnly: return "small";
    case Kind::LargeOnly: return "large";
    }
    return "all";
}

std::string FilterKind::label() const {
    switch (kind) {
    case Kind::All: return "All";
    case Kind::CpuIntensiveOnly: return "CPU-Intensive";
    case Kind::MemIntensiveOnly: return "MEM-Intensive";
    case Kind::SmallOnly: return "Small";
    case Kind::LargeOnly: return "Large";
    }
    return "All";
}

FilterKind FilterKind::parse(std::string_view text) {
    if (text == "all")
        return {Kind::All};
    if (text == "ci")
        return {Kind::CpuIntensiveOnly};
    if (text == "mi")
        return {Kind::MemIntensiveOnly};
    if (text == "small")
        return {Kind::SmallOnly};
    if (text == "large")
        return {Kind::LargeOnly};
    throw Error(Errc::Config, "unknown filter '" + std::string(text) + "' (expected all, ci, mi, small, large)");
}

std::vector<FilterKind> FilterKind::every() {
    return {{Kind::All}, {Kind::CpuIntensiveOnly}, {Kind::MemIntensiveOnly}, {Kind::SmallOnly}, {Kind::LargeOnly}};
}

bool passes(const FilterKind& filter, const VmSpec& spec, std::int64_t pm_cpu, std::int64_t pm_mem) {
    switch (filter.kind) {
    case FilterKind::Kind::All: return true;
    case FilterKind::Kind::CpuIntensiveOnly: return categorize(spec, pm_cpu, pm_mem) == Role::CpuIntensive;
    case FilterKind::Kind::MemIntensiveOnly: return categorize(spec, pm_cpu, pm_mem) == Role::MemIntensive;
    case FilterKind::Kind::SmallOnly: return spec.cpu <= filter.threshold_cpu;
    case FilterKind::Kind::LargeOnly: return spec.cpu > filter.threshold_cpu;
    }
    return true;
}

Trace apply_filter(const Trace& trace, const FilterKind& filter, std::int64_t pm_cpu, std::int64_t pm_mem) {
    if (filter.threshold_cpu < 1)
        throw Error(Errc::Config, "filter threshold must be >= 1");
    if (filter.kind == FilterKind::Kind::All)
        return trace;
    Trace out;
    out.dropped_deletes = trace.dropped_deletes;
    std::unordered_set<VmId> kept;
    std::size_t seq = 0;
    for (const auto& r : trace.requests) {
        if (r.event == EventKind::Create) {
            if (!passes(filter, r.spec, pm_cpu, pm_mem))
                continue;
            kept.insert(r.vm_id);
        } else if (!kept.erase(r.vm_id)) {
            continue;
        }
        auto copy = r;
        copy.seq = seq++;
        out.requests.push_back(std::move(copy));
    }
    std::vector<VmSpec> flavors;
    for (const auto& f : trace.flavors.flavors())
        if (passes(filter, f, pm_cpu, pm_mem))
            flavors.push_back(f);
    if (flavors.empty() || out.requests.empty())
        throw Error(Errc::EmptyTrace, "filter '" + filter.name() + "' removes every request");
    out.flavors = FlavorSet(std::move(flavors));
    return out;
}

void SynthConfig::validate() const {
    if (flavor_weights.empty())
        throw Error(Errc::Config, "synthetic trace needs at least one flavor weight");
    double total = 0.0;
    for (const auto& [spec, w] : flavor_weights) {
        if (!(w >= 0.0))
            throw Error(Errc::Config, "weight of " + spec.flavor_id + " must be >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw Error(Errc::Config, "flavor weights must sum to 1 (got " + std::to_string(total) + ")");
    if (!(delete_prob >= 0.0 && delete_prob < 1.0))
        throw Error(Errc::Config, "delete_prob must lie in [0, 1)");
    if (!(burst_mean >= 1.0))
        throw Error(Errc::Config, "burst_mean must be >= 1");
}

std::vector<VmSpec> default_flavors() {
    std::vector<VmSpec> out;
    for (auto [c, m] : std::initializer_list<std::pair<int, int>>{
             {12, 8}, {24, 16}, {48, 32}, {96, 64},           // 3:2
             {2, 4}, {4, 8}, {8, 16}, {16, 32}, {32, 64},     // 1:2
             {2, 8}, {4, 16}, {8, 32}})                       // 1:4
        out.push_back(VmSpec::of(c, m));
    return out;
}

SynthConfig default_synth_config() {
    // Per-request probabilities. CPU-intensive requests carry ~3.6x the CPU
    // and about the same memory as memory-intensive ones.
    static constexpr double weights[] = {
        0.21, 0.13, 0.065, 0.02,             // 12U8G 24U16G 48U32G 96U64G
        0.14, 0.10, 0.06, 0.03, 0.015,       // 2U4G 4U8G 8U16G 16U32G 32U64G
        0.115, 0.07, 0.045,                  // 2U8G 4U16G 8U32G
    };
    SynthConfig cfg;
    auto flavors = default_flavors();
    for (std::size_t i = 0; i < flavors.size(); ++i)
        cfg.flavor_weights.emplace_back(flavors[i], weights[i]);
    cfg.burst_mean = 4.0;
    return cfg;
}

Trace synth_generate(const SynthConfig& config) {
    config.validate();
    std::vector<VmSpec> flavors;
    std::vector<double> weights;
    for (const auto& [spec, w] : config.flavor_weights) {
        if (w > 0.0) {
            flavors.push_back(spec);
            weights.push_back(w);
        }
    }
    std::mt19937_64 rng(config.seed);
    std::bernoulli_distribution do_delete(config.delete_prob);
    std::discrete_distribution<std::size_t> pick_flavor(weights.begin(), weights.end());
    std::bernoulli_distribution repeat(1.0 - 1.0 / config.burst_mean);
    std::optional<std::size_t> last_flavor;

    Trace trace;
    trace.requests.reserve(config.length);
    std::vector<std::pair<VmId, std::size_t>> live;  // vm id, flavor index
    VmId next_id = 0;
    for (std::size_t step = 0; step < config.length; ++step) {
        const auto ts = static_cast<std::int64_t>(step);
        if (do_delete(rng) && !live.empty()) {
            std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
            auto i = pick(rng);
            auto [vm, f] = live[i];
            live[i] = live.back();
            live.pop_back();
            trace.requests.push_back(Request{vm, EventKind::Delete, flavors[f], step, ts});
        } else {
            const auto f = (last_flavor && repeat(rng)) ? *last_flavor : pick_flavor(rng);
            last_flavor = f;
            live.emplace_back(next_id, f);
            trace.requests.push_back(Request{next_id, EventKind::Create, flavors[f], step, ts});
            ++next_id;
        }
    }
    trace.flavors = FlavorSet(std::move(flavors));
    return trace;
}

} // namespace vmplace
