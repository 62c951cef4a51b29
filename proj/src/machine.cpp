#include "c3sim/machine.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "c3sim/errors.hpp"
#include "json.hpp"

namespace c3sim {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void validate(const MachineDescriptor& md) {
    auto fail = [](const std::string& what) { throw ValidationError("machine: " + what); };
    if (md.gpus_per_node < 1) fail("gpus_per_node must be >= 1");
    if (md.cus_per_gpu < 1) fail("cus_per_gpu must be >= 1");
    if (md.xcds_per_gpu < 1) fail("xcds_per_gpu must be >= 1");
    if (md.cus_per_xcd < 1) fail("cus_per_xcd must be >= 1");
    if (md.cus_per_gpu != md.xcds_per_gpu * md.cus_per_xcd)
        fail("cus_per_gpu (" + std::to_string(md.cus_per_gpu) +
             ") != xcds_per_gpu * cus_per_xcd (" +
             std::to_string(md.xcds_per_gpu * md.cus_per_xcd) + ")");
    if (md.min_cu_grain < 1) fail("min_cu_grain must be >= 1");
    if (md.cus_per_gpu % md.min_cu_grain != 0)
        fail("min_cu_grain must divide cus_per_gpu");
    if (md.dma_engines_per_gpu < 1) fail("dma_engines_per_gpu must be >= 1");
    if (!(md.peak_compute_flops > 0)) fail("peak_compute_flops must be > 0");
    if (!(md.hbm_bandwidth > 0)) fail("hbm_bandwidth must be > 0");
    if (md.llc_capacity <= 0) fail("llc_capacity must be > 0");
    if (!(md.link_bandwidth_unidir > 0)) fail("link_bandwidth_unidir must be > 0");
    if (md.links_per_gpu < 0) fail("links_per_gpu must be >= 0");
    if (md.topology == Topology::FullyConnected &&
        md.links_per_gpu != md.gpus_per_node - 1)
        fail("fully-connected topology requires links_per_gpu == gpus_per_node - 1");
    if (md.cpu_launch_overhead < 0) fail("cpu_launch_overhead must be >= 0");
    if (md.dma_sync_overhead < 0) fail("dma_sync_overhead must be >= 0");
}

MachineDescriptor load_machine(const std::string& config_text) {
    json j;
    try {
        j = json::parse(config_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("machine: parse failure: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("machine: top-level value must be an object");

    static const std::set<std::string> known = {
        "gpus_per_node",      "cus_per_gpu",       "xcds_per_gpu",
        "cus_per_xcd",        "min_cu_grain",      "dma_engines_per_gpu",
        "peak_compute_flops", "hbm_bandwidth",     "llc_capacity",
        "link_bandwidth_unidir", "links_per_gpu",  "topology",
        "cpu_launch_overhead", "dma_sync_overhead"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ValidationError("machine: unknown field '" + key + "'");
    for (const auto& key : known)
        if (!j.contains(key)) throw ValidationError("machine: missing field '" + key + "'");

    MachineDescriptor md;
    try {
        md.gpus_per_node = j.at("gpus_per_node").get<int>();
        md.cus_per_gpu = j.at("cus_per_gpu").get<int>();
        md.xcds_per_gpu = j.at("xcds_per_gpu").get<int>();
        md.cus_per_xcd = j.at("cus_per_xcd").get<int>();
        md.min_cu_grain = j.at("min_cu_grain").get<int>();
        md.dma_engines_per_gpu = j.at("dma_engines_per_gpu").get<int>();
        md.peak_compute_flops = j.at("peak_compute_flops").get<double>();
        md.hbm_bandwidth = j.at("hbm_bandwidth").get<double>();
        md.llc_capacity = j.at("llc_capacity").get<std::int64_t>();
        md.link_bandwidth_unidir = j.at("link_bandwidth_unidir").get<double>();
        md.links_per_gpu = j.at("links_per_gpu").get<int>();
        md.cpu_launch_overhead = j.at("cpu_launch_overhead").get<double>();
        md.dma_sync_overhead = j.at("dma_sync_overhead").get<double>();
        const auto topo = j.at("topology").get<std::string>();
        if (topo != "fully-connected")
            throw ValidationError("machine: unsupported topology '" + topo + "'");
        md.topology = Topology::FullyConnected;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("machine: bad field type: ") + e.what());
    }
    validate(md);
    return md;
}

MachineDescriptor load_machine_file(const std::filesystem::path& path) {
    return load_machine(read_file(path));
}

std::string save_machine(const MachineDescriptor& md) {
    json j;
    j["gpus_per_node"] = md.gpus_per_node;
    j["cus_per_gpu"] = md.cus_per_gpu;
    j["xcds_per_gpu"] = md.xcds_per_gpu;
    j["cus_per_xcd"] = md.cus_per_xcd;
    j["min_cu_grain"] = md.min_cu_grain;
    j["dma_engines_per_gpu"] = md.dma_engines_per_gpu;
    j["peak_compute_flops"] = md.peak_compute_flops;
    j["hbm_bandwidth"] = md.hbm_bandwidth;
    j["llc_capacity"] = md.llc_capacity;
    j["link_bandwidth_unidir"] = md.link_bandwidth_unidir;
    j["links_per_gpu"] = md.links_per_gpu;
    j["topology"] = "fully-connected";
    j["cpu_launch_overhead"] = md.cpu_launch_overhead;
    j["dma_sync_overhead"] = md.dma_sync_overhead;
    return j.dump(2) + "\n";
}

double machine_op_to_byte(const MachineDescriptor& md) {
    if (!(md.hbm_bandwidth > 0)) throw ValidationError("machine: hbm_bandwidth must be > 0");
    return md.peak_compute_flops / md.hbm_bandwidth;
}

}  // namespace c3sim
