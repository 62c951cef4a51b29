#pragma once

#include <optional>
#include <string>
#include <vector>

#include "c3sim/conccl.hpp"
#include "c3sim/interference.hpp"
#include "c3sim/strategy.hpp"
#include "c3sim/taxonomy.hpp"
#include "c3sim/workload.hpp"

namespace c3sim {

enum class Strategy { Serial, C3Base, C3Sp, C3Rp, C3SpRp, Conccl, ConcclRp };

inline constexpr Strategy kAllStrategies[] = {
    Strategy::Serial, Strategy::C3Base, Strategy::C3Sp,   Strategy::C3Rp,
    Strategy::C3SpRp, Strategy::Conccl, Strategy::ConcclRp,
};

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct Allocation {
    int cus_gemm = 0;
    int cus_comm = 0;
    int cus_idle = 0;
    CommBackend comm_backend = CommBackend::CU;
    bool comm_first = false;  // launch order
};

/// Per-strategy CU split. c3_base launches the GEMM first so a large GEMM
/// starves the communication kernel down to one grain; c3_sp gives the
/// communication kernel its saturation CUs; the rp variants take the
/// partition heuristic's split; conccl moves communication to the DMA
/// engines.
Allocation allocate_cus(const C3Scenario& scenario, Strategy strategy,
                        const MachineDescriptor& md, const SlowdownTableSet& tables,
                        const EfficiencyParams& params);

struct PhaseRecord {
    double start = 0.0;
    double end = 0.0;
    double rate_gemm = 0.0;  // progress per second of isolated work, 0 if done
    double rate_comm = 0.0;
    int cus_gemm = 0;
    int cus_comm = 0;
};

struct SimTimeline {
    std::vector<PhaseRecord> phases;  // contiguous from 0
    double makespan = 0.0;
    double serial_time = 0.0;  // t_gemm + t_comm, CU-backend isolated times
    double speedup = 0.0;      // serial_time / makespan
    double ideal = 0.0;
    double fraction_of_ideal = 0.0;
    double work_gemm = 0.0;  // isolated seconds simulated for each kernel
    double work_comm = 0.0;
};

struct SimOptions {
    bool freeze_phase2_allocation = false;  // survivor keeps its CU slowdown
    std::optional<int> force_cus_comm;      // rp audit: override the heuristic
};

/// Two-phase fluid model. Phase 1 runs both kernels with rates damped by the
/// CU-loss slowdown, the shared-memory factor and the co-run penalty; after
/// the first kernel retires the survivor finishes at its isolated rate.
SimTimeline simulate(const C3Scenario& scenario, Strategy strategy,
                     const MachineDescriptor& md, const SlowdownTableSet& tables,
                     const CoRunPenalty& penalties, const EfficiencyParams& params,
                     const SimOptions& options = {});

/// Throws ValidationError if any kernel's integrated progress differs from
/// its work by more than 1e-9 relative.
void work_conservation_check(const SimTimeline& timeline);

struct SweepRow {
    std::string scenario_id;
    CollectiveKind collective;
    TaxonomyClass taxonomy;  // expected label when present, else computed
    Strategy strategy;
    double makespan = 0.0;
    double speedup = 0.0;
    double ideal = 0.0;
    double fraction_of_ideal = 0.0;
};

struct AggregateRow {
    std::optional<CollectiveKind> collective;  // nullopt = all
    std::optional<TaxonomyClass> taxonomy;     // nullopt = all
    Strategy strategy;
    int count = 0;
    double mean_speedup = 0.0;
    double mean_ideal = 0.0;
    double mean_fraction_of_ideal = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;          // sorted by (id, collective, strategy)
    std::vector<AggregateRow> aggregates;
};

SweepResult sweep(const std::vector<C3Scenario>& scenarios,
                  const std::vector<Strategy>& strategies, const MachineDescriptor& md,
                  const SlowdownTableSet& tables, const CoRunPenalty& penalties,
                  const EfficiencyParams& params, const SimOptions& options = {});

/// CSV: scenario_id,collective,taxonomy,strategy,makespan_s,speedup,ideal,
/// fraction_of_ideal. Aggregate rows follow the data rows with scenario_id
/// "mean" and empty makespan.
std::string sweep_to_csv(const SweepResult& result);

/// Zero-interference debug reductions: unit tables, unit penalties, zero
/// overheads. Mutates the arguments in place.
void apply_zero_interference(SlowdownTableSet& tables, CoRunPenalty& penalties,
                             EfficiencyParams& params, MachineDescriptor& md);

}  // namespace c3sim
