#include "c3sim/workload.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "c3sim/errors.hpp"
#include "json.hpp"

namespace c3sim {

using nlohmann::json;

void validate(const GemmKernel& g) {
    if (g.m < 1 || g.n < 1 || g.k < 1)
        throw ValidationError("gemm '" + g.tag + "': dimensions must be >= 1");
    if (g.dtype_bytes != 1 && g.dtype_bytes != 2 && g.dtype_bytes != 4 && g.dtype_bytes != 8)
        throw ValidationError("gemm '" + g.tag + "': dtype_bytes must be 1, 2, 4 or 8");
    if (g.measured_op_to_byte && !(*g.measured_op_to_byte > 0))
        throw ValidationError("gemm '" + g.tag + "': measured_op_to_byte must be > 0");
    if (g.measured_time && !(*g.measured_time > 0))
        throw ValidationError("gemm '" + g.tag + "': measured_time must be > 0");
}

void validate(const CollectiveOp& c) {
    if (c.payload_bytes < 0) throw ValidationError("collective: payload_bytes must be >= 0");
    if (c.n_ranks < 1) throw ValidationError("collective: n_ranks must be >= 1");
    if (c.payload_bytes % c.n_ranks != 0)
        throw ValidationError("collective: payload_bytes must be divisible by n_ranks");
    if (c.measured_time && !(*c.measured_time > 0))
        throw ValidationError("collective: measured_time must be > 0");
}

void validate(const EfficiencyParams& p) {
    if (!(p.efficiency > 0) || p.efficiency > 1)
        throw ValidationError("params: efficiency must be in (0, 1]");
    if (p.comm_launch_overhead_cu < 0)
        throw ValidationError("params: comm_launch_overhead_cu must be >= 0");
}

double gemm_flops(const GemmKernel& g) {
    return 2.0 * static_cast<double>(g.m) * static_cast<double>(g.n) *
           static_cast<double>(g.k);
}

double gemm_min_bytes(const GemmKernel& g) {
    const double mk = static_cast<double>(g.m) * static_cast<double>(g.k);
    const double kn = static_cast<double>(g.k) * static_cast<double>(g.n);
    const double mn = static_cast<double>(g.m) * static_cast<double>(g.n);
    return static_cast<double>(g.dtype_bytes) * (mk + kn + mn);
}

Boundedness classify_gemm_boundedness(const GemmKernel& g, double machine_ratio) {
    if (!(machine_ratio > 0))
        throw ValidationError("classify_gemm_boundedness: machine_ratio must be > 0");
    if (g.boundedness_override) return *g.boundedness_override;
    const double ratio =
        g.measured_op_to_byte ? *g.measured_op_to_byte : gemm_flops(g) / gemm_min_bytes(g);
    return ratio > machine_ratio ? Boundedness::ComputeBound : Boundedness::MemoryBound;
}

CommBoundedness classify_collective_boundedness(const CollectiveOp& c,
                                                const MachineDescriptor& md,
                                                const EfficiencyParams& p) {
    const double wire = roofline_collective_time(c, md, p, /*include_overhead=*/false);
    return p.comm_launch_overhead_cu >= wire ? CommBoundedness::LatencyBound
                                             : CommBoundedness::BandwidthBound;
}

double roofline_gemm_time(const GemmKernel& g, const MachineDescriptor& md,
                          const EfficiencyParams& p) {
    if (g.measured_time) return *g.measured_time;
    const double compute = gemm_flops(g) / (p.efficiency * md.peak_compute_flops);
    const double memory = gemm_min_bytes(g) / (p.efficiency * md.hbm_bandwidth);
    return std::max(compute, memory);
}

double roofline_collective_time(const CollectiveOp& c, const MachineDescriptor& md,
                                const EfficiencyParams& p, bool include_overhead) {
    if (c.measured_time) return *c.measured_time;
    if (c.n_ranks > md.gpus_per_node)
        throw ValidationError("collective: n_ranks exceeds gpus_per_node");
    if (c.n_ranks == 1) return 0.0;
    const double per_link_bytes =
        static_cast<double>(c.payload_bytes) / static_cast<double>(c.n_ranks);
    double t = per_link_bytes / (p.efficiency * md.link_bandwidth_unidir);
    if (include_overhead) t += p.comm_launch_overhead_cu;
    return t;
}

int estimate_workgroups(const GemmKernel& g, int tile) {
    if (tile < 1) throw ValidationError("estimate_workgroups: tile must be >= 1");
    const auto tiles_m = (g.m + tile - 1) / tile;
    const auto tiles_n = (g.n + tile - 1) / tile;
    const auto wgs = tiles_m * tiles_n;
    return static_cast<int>(std::min<std::int64_t>(wgs, 1 << 30));
}

int estimate_workgroups(const CollectiveOp& c) {
    return c.kind == CollectiveKind::AllGather ? 64 : 56;
}

double gemm_bandwidth_demand(const GemmKernel& g, const MachineDescriptor& md,
                             const EfficiencyParams& p) {
    const double t = roofline_gemm_time(g, md, p);
    if (!(t > 0)) throw ValidationError("gemm_bandwidth_demand: zero roofline time");
    return gemm_min_bytes(g) / t;
}

double collective_bandwidth_demand(const CollectiveOp& c, const MachineDescriptor& md,
                                   const EfficiencyParams& p) {
    if (c.n_ranks == 1 || c.payload_bytes == 0) return 0.0;
    const double wire = roofline_collective_time(c, md, p, /*include_overhead=*/false);
    if (!(wire > 0)) throw ValidationError("collective_bandwidth_demand: zero wire time");
    // All-to-all moves read+write traffic through the cache; all-gather runs
    // about 14% lighter.
    const double traffic_factor = c.kind == CollectiveKind::AllToAll ? 2.0 : 2.0 * 0.86;
    const double frac = static_cast<double>(c.n_ranks - 1) / static_cast<double>(c.n_ranks);
    return traffic_factor * frac * static_cast<double>(c.payload_bytes) / wire;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

GemmKernel gemm_from_json(const json& j) {
    static const std::set<std::string> known = {
        "tag", "m", "n", "k", "dtype_bytes", "measured_op_to_byte",
        "measured_time", "boundedness_override"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ValidationError("dataset: unknown gemm field '" + key + "'");
    GemmKernel g;
    g.tag = j.at("tag").get<std::string>();
    g.m = j.at("m").get<std::int64_t>();
    g.n = j.at("n").get<std::int64_t>();
    g.k = j.at("k").get<std::int64_t>();
    g.dtype_bytes = j.at("dtype_bytes").get<int>();
    if (j.contains("measured_op_to_byte"))
        g.measured_op_to_byte = j.at("measured_op_to_byte").get<double>();
    if (j.contains("measured_time")) g.measured_time = j.at("measured_time").get<double>();
    if (j.contains("boundedness_override")) {
        const auto s = j.at("boundedness_override").get<std::string>();
        if (s == "compute-bound")
            g.boundedness_override = Boundedness::ComputeBound;
        else if (s == "memory-bound")
            g.boundedness_override = Boundedness::MemoryBound;
        else
            throw ValidationError("dataset: bad boundedness_override '" + s + "'");
    }
    validate(g);
    return g;
}

CollectiveOp collective_from_json(const json& j) {
    static const std::set<std::string> known = {"kind", "payload_bytes", "n_ranks",
                                                "measured_time"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw ValidationError("dataset: unknown collective field '" + key + "'");
    CollectiveOp c;
    c.kind = collective_kind_from_string(j.at("kind").get<std::string>());
    c.payload_bytes = j.at("payload_bytes").get<std::int64_t>();
    c.n_ranks = j.at("n_ranks").get<int>();
    if (j.contains("measured_time")) c.measured_time = j.at("measured_time").get<double>();
    validate(c);
    return c;
}

}  // namespace

std::vector<C3Scenario> parse_dataset(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("dataset: parse failure: ") + e.what());
    }
    if (!j.is_array()) throw ValidationError("dataset: top-level value must be an array");

    std::vector<C3Scenario> out;
    std::set<std::pair<std::string, std::string>> seen;
    static const std::set<std::string> known = {"id", "source", "expected_taxonomy", "gemm",
                                                "collective"};
    for (const auto& item : j) {
        for (const auto& [key, _] : item.items())
            if (!known.count(key))
                throw ValidationError("dataset: unknown scenario field '" + key + "'");
        C3Scenario s;
        s.id = item.at("id").get<std::string>();
        s.source = item.value("source", std::string("synthetic"));
        s.gemm = gemm_from_json(item.at("gemm"));
        s.collective = collective_from_json(item.at("collective"));
        if (item.contains("expected_taxonomy"))
            s.expected_taxonomy =
                taxonomy_from_string(item.at("expected_taxonomy").get<std::string>());
        const auto key = std::make_pair(s.id, to_string(s.collective.kind));
        if (!seen.insert(key).second)
            throw ValidationError("dataset: duplicate scenario '" + s.id + "' for " +
                                  to_string(s.collective.kind));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<C3Scenario> load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_file(path));
}

ModelWorkload ingest_model(const ModelConfig& cfg) {
    if (cfg.hidden < 1 || cfg.ffn < 1 || cfg.tokens < 1)
        throw ValidationError("ingest_model: dimensions must be >= 1");
    if (cfg.shards < 1) throw ValidationError("ingest_model: shards must be >= 1");

    ModelWorkload out;
    // Forward GEMMs of one transformer layer, fused-weight convention:
    // qkv projection, attention output, gate+up FFN input, FFN output.
    auto add = [&](const std::string& tag, std::int64_t n, std::int64_t k) {
        GemmKernel g;
        g.tag = tag;
        g.m = cfg.tokens;
        g.n = n;
        g.k = k;
        g.dtype_bytes = cfg.dtype_bytes;
        validate(g);
        out.gemms.push_back(g);
        if (cfg.shards > 1) {
            CollectiveOp ag;
            ag.kind = CollectiveKind::AllGather;
            ag.payload_bytes = n * k * cfg.dtype_bytes;  // full weight, gathered
            ag.n_ranks = cfg.shards;
            // FSDP shards must divide the weight evenly; pad up if not.
            if (ag.payload_bytes % ag.n_ranks != 0)
                ag.payload_bytes += ag.n_ranks - ag.payload_bytes % ag.n_ranks;
            validate(ag);
            out.all_gathers.push_back(ag);
        }
    };
    add("attn_qkv", 3 * cfg.hidden, cfg.hidden);
    add("attn_out", cfg.hidden, cfg.hidden);
    add("ffn_in", 2 * cfg.ffn, cfg.hidden);
    add("ffn_out", cfg.hidden, cfg.ffn);
    return out;
}

std::string to_string(CollectiveKind k) {
    return k == CollectiveKind::AllGather ? "all-gather" : "all-to-all";
}

CollectiveKind collective_kind_from_string(const std::string& s) {
    if (s == "all-gather") return CollectiveKind::AllGather;
    if (s == "all-to-all") return CollectiveKind::AllToAll;
    throw ValidationError("unknown collective kind '" + s + "'");
}

std::string to_string(Boundedness b) {
    return b == Boundedness::ComputeBound ? "compute-bound" : "memory-bound";
}

std::string to_string(CommBoundedness b) {
    return b == CommBoundedness::LatencyBound ? "latency-bound" : "bandwidth-bound";
}

}  // namespace c3sim
