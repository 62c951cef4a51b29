#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace c3sim {

enum class Topology { FullyConnected };

/// Hardware model of one multi-GPU node. All bandwidths are bytes/second,
/// overheads are seconds. Immutable after load; safe to share across threads.
struct MachineDescriptor {
    int gpus_per_node = 0;
    int cus_per_gpu = 0;
    int xcds_per_gpu = 0;
    int cus_per_xcd = 0;
    int min_cu_grain = 0;  // smallest assignable CU block
    int dma_engines_per_gpu = 0;
    double peak_compute_flops = 0.0;  // dtype-matched ops/s
    double hbm_bandwidth = 0.0;
    std::int64_t llc_capacity = 0;
    double link_bandwidth_unidir = 0.0;  // per link
    int links_per_gpu = 0;
    Topology topology = Topology::FullyConnected;
    double cpu_launch_overhead = 0.0;  // per DMA transfer submission
    double dma_sync_overhead = 0.0;    // per completion wait
};

/// Throws ValidationError naming the first violated invariant.
void validate(const MachineDescriptor& md);

/// Parse a machine config from JSON text. Unknown fields are rejected,
/// all fields are required, and the result always satisfies validate().
MachineDescriptor load_machine(const std::string& config_text);
MachineDescriptor load_machine_file(const std::filesystem::path& path);

std::string save_machine(const MachineDescriptor& md);

/// Peak compute / HBM bandwidth (ops per byte).
double machine_op_to_byte(const MachineDescriptor& md);

}  // namespace c3sim
