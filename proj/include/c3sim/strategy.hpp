#pragma once

#include <string>
#include <vector>

#include "c3sim/interference.hpp"
#include "c3sim/workload.hpp"

namespace c3sim {

struct PartitionPlan {
    CommBackend comm_backend = CommBackend::CU;
    int cus_comm = 0;  // 0 only for the DMA backend
    int cus_gemm = 0;
    int cus_idle = 0;
    std::vector<std::string> schedule_order;  // kernel names, launch order
    double predicted_makespan = 0.0;
};

void validate(const PartitionPlan& p, const MachineDescriptor& md);

struct KernelDemand {
    std::string name;
    bool is_comm = false;
    long workgroups = 1;
};

/// Stable ascending sort by workgroup count; on a tie the communication
/// kernel goes first so it cannot be starved by a same-sized GEMM.
std::vector<KernelDemand> schedule_priority_order(std::vector<KernelDemand> kernels);

struct CandidateEval {
    int cus_comm;
    double gemm_term;  // t_gemm * slowdown at (cus_per_gpu - c)
    double comm_term;  // t_comm * slowdown at c
    double predicted;  // max of the two
};

struct PartitionSweep {
    PartitionPlan plan;
    std::vector<CandidateEval> candidates;
};

/// Power-of-two CU candidates for the communication kernel: {8,16,32,64,128,
/// 256} filtered to multiples of the grain that leave the GEMM at least one
/// grain.
std::vector<int> candidate_cu_allocations(const MachineDescriptor& md);

/// CU sweep heuristic: pick the candidate minimizing
/// max(gemm time scaled by its slowdown, comm time scaled by its slowdown);
/// ties go to the smallest candidate.
PartitionSweep partition_heuristic(const C3Scenario& scenario, const MachineDescriptor& md,
                                   const SlowdownTableSet& tables,
                                   const EfficiencyParams& params);

/// DMA-offload partitioning: communication takes no CUs; memory-bound GEMMs
/// idle one grain of CUs (better cache behavior), compute-bound GEMMs keep
/// the whole machine.
PartitionPlan conccl_rp_plan(const C3Scenario& scenario, const MachineDescriptor& md,
                             const SlowdownTableSet& tables);

std::string to_json(const PartitionPlan& p);

}  // namespace c3sim
