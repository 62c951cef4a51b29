#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "c3sim/machine.hpp"
#include "c3sim/workload.hpp"

namespace c3sim {

/// One DMA-engine copy between two GPUs. Offsets are bytes into the source
/// and destination buffers of the respective ranks; seq is the position in
/// the issuing GPU's per-engine FIFO.
struct Transfer {
    int src_gpu = 0;
    int dst_gpu = 0;
    std::int64_t src_offset = 0;
    std::int64_t dst_offset = 0;
    std::int64_t length = 0;
    int engine_id = 0;
    int seq = 0;
};

struct BufferExtents {
    std::int64_t src_bytes = 0;  // per-rank source buffer size
    std::int64_t dst_bytes = 0;  // per-rank destination buffer size
};

/// A collective decomposed into per-engine transfers. For n_ranks >= 2 the
/// plan holds exactly n_ranks*(n_ranks-1) transfers; a 1-rank collective is
/// an empty plan.
struct TransferPlan {
    CollectiveKind kind = CollectiveKind::AllGather;
    int n_ranks = 1;
    std::int64_t chunk_bytes = 0;
    std::vector<Transfer> transfers;
    BufferExtents buffers;
};

/// Every GPU writes its own chunk to slot g of every peer's destination
/// buffer; the self chunk is already resident. Engine = peer index mod
/// engine count, per source GPU.
TransferPlan plan_all_gather(int n_ranks, std::int64_t chunk_bytes,
                             const MachineDescriptor& md);

/// Buffer transpose: source slot p of rank g lands in destination slot g of
/// rank p. The self slot is copied locally and needs no transfer.
TransferPlan plan_all_to_all(int n_ranks, std::int64_t per_peer_bytes,
                             const MachineDescriptor& md);

struct PlanCheck {
    bool ok = true;
    std::string error;  // names the first divergent (rank, slot) when !ok
};

/// Replays the plan on an exact byte-interval state machine and checks the
/// post-state against the collective's definition: full coverage, no
/// overlapping writes, every byte from the right source.
PlanCheck validate_plan(const TransferPlan& plan, const MachineDescriptor& md);

struct PlanCost {
    double total = 0.0;               // makespan incl. launch + sync overheads
    std::vector<double> per_engine;   // completion time per engine index
    double wire = 0.0;                // pure transfer time, no overheads
};

/// Transfers are submitted serially from one CPU thread at
/// cpu_launch_overhead each (transfer i cannot start before i*overhead);
/// each (src,dst) pair owns a dedicated link at efficiency*link bandwidth;
/// per-engine FIFO order is respected. One sync barrier at the end.
PlanCost plan_cost(const TransferPlan& plan, const MachineDescriptor& md,
                   const EfficiencyParams& params);

std::string to_json(const TransferPlan& plan);
TransferPlan plan_from_json(const std::string& json_text);

}  // namespace c3sim
