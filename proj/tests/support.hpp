#pragma once

#include <filesystem>
#include <string>

#include "c3sim/machine.hpp"
#include "c3sim/workload.hpp"

namespace testsupport {

inline std::filesystem::path data_dir() { return C3SIM_DATA_DIR; }

inline c3sim::MachineDescriptor mi300x() {
    return c3sim::load_machine_file(data_dir() / "mi300x-node.json");
}

inline c3sim::MachineDescriptor toy_machine() {
    c3sim::MachineDescriptor md;
    md.gpus_per_node = 2;
    md.cus_per_gpu = 16;
    md.xcds_per_gpu = 2;
    md.cus_per_xcd = 8;
    md.min_cu_grain = 8;
    md.dma_engines_per_gpu = 2;
    md.peak_compute_flops = 1e12;
    md.hbm_bandwidth = 1e11;
    md.llc_capacity = 1 << 20;
    md.link_bandwidth_unidir = 1e10;
    md.links_per_gpu = 1;
    md.cpu_launch_overhead = 1e-6;
    md.dma_sync_overhead = 2e-5;
    c3sim::validate(md);
    return md;
}

inline c3sim::GemmKernel gemm(std::int64_t m, std::int64_t n, std::int64_t k,
                              int dtype_bytes = 2, const std::string& tag = "g") {
    c3sim::GemmKernel g;
    g.tag = tag;
    g.m = m;
    g.n = n;
    g.k = k;
    g.dtype_bytes = dtype_bytes;
    return g;
}

inline c3sim::CollectiveOp collective(c3sim::CollectiveKind kind, std::int64_t payload,
                                      int n_ranks = 8) {
    c3sim::CollectiveOp c;
    c.kind = kind;
    c.payload_bytes = payload;
    c.n_ranks = n_ranks;
    return c;
}

}  // namespace testsupport
