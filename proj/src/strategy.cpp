#include "c3sim/strategy.hpp"

#include <algorithm>
#include <limits>

#include "c3sim/errors.hpp"
#include "json.hpp"

namespace c3sim {

void validate(const PartitionPlan& p, const MachineDescriptor& md) {
    if (p.cus_comm + p.cus_gemm + p.cus_idle != md.cus_per_gpu)
        throw ValidationError("partition plan: CU counts must sum to cus_per_gpu");
    const int grain = md.min_cu_grain;
    if (p.cus_comm % grain != 0 || p.cus_gemm % grain != 0 || p.cus_idle % grain != 0)
        throw ValidationError("partition plan: CU counts must be grain multiples");
    if (p.comm_backend == CommBackend::CU && p.cus_comm < grain)
        throw ValidationError("partition plan: CU backend needs at least one grain for comm");
    if (p.cus_comm < 0 || p.cus_gemm < 0 || p.cus_idle < 0)
        throw ValidationError("partition plan: CU counts must be non-negative");
}

std::vector<KernelDemand> schedule_priority_order(std::vector<KernelDemand> kernels) {
    for (const auto& k : kernels)
        if (k.workgroups < 1)
            throw ValidationError("schedule_priority_order: workgroups must be >= 1");
    std::stable_sort(kernels.begin(), kernels.end(),
                     [](const KernelDemand& a, const KernelDemand& b) {
                         if (a.workgroups != b.workgroups) return a.workgroups < b.workgroups;
                         return a.is_comm && !b.is_comm;
                     });
    return kernels;
}

std::vector<int> candidate_cu_allocations(const MachineDescriptor& md) {
    std::vector<int> out;
    for (int c : {8, 16, 32, 64, 128, 256}) {
        if (c >= md.cus_per_gpu) continue;
        if (c % md.min_cu_grain != 0) continue;
        if (md.cus_per_gpu - c < md.min_cu_grain) continue;
        out.push_back(c);
    }
    if (out.empty())
        throw ValidationError("partition heuristic: no feasible CU candidate on this machine");
    return out;
}

PartitionSweep partition_heuristic(const C3Scenario& scenario, const MachineDescriptor& md,
                                   const SlowdownTableSet& tables,
                                   const EfficiencyParams& params) {
    const double ratio = machine_op_to_byte(md);
    const auto& gemm_table = tables.at(gemm_kernel_class(scenario.gemm, ratio));
    const auto& comm_table = tables.at(comm_kernel_class(scenario.collective.kind));

    const double t_gemm = roofline_gemm_time(scenario.gemm, md, params);
    const double t_comm =
        roofline_collective_time(scenario.collective, md, params, /*include_overhead=*/true);

    PartitionSweep sweep;
    int best_c = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int c : candidate_cu_allocations(md)) {
        CandidateEval e;
        e.cus_comm = c;
        e.gemm_term = t_gemm * slowdown_at(gemm_table, md.cus_per_gpu - c);
        e.comm_term = t_comm * slowdown_at(comm_table, c);
        e.predicted = std::max(e.gemm_term, e.comm_term);
        sweep.candidates.push_back(e);
        if (e.predicted < best) {  // ties keep the smallest candidate
            best = e.predicted;
            best_c = c;
        }
    }

    PartitionPlan plan;
    plan.comm_backend = CommBackend::CU;
    plan.cus_comm = best_c;
    plan.cus_gemm = md.cus_per_gpu - best_c;
    plan.cus_idle = 0;
    plan.predicted_makespan = best;
    {
        std::vector<KernelDemand> kernels = {
            {scenario.gemm.tag.empty() ? "gemm" : scenario.gemm.tag, false,
             estimate_workgroups(scenario.gemm)},
            {to_string(scenario.collective.kind), true,
             estimate_workgroups(scenario.collective)},
        };
        for (const auto& k : schedule_priority_order(std::move(kernels)))
            plan.schedule_order.push_back(k.name);
    }
    validate(plan, md);
    sweep.plan = std::move(plan);
    return sweep;
}

PartitionPlan conccl_rp_plan(const C3Scenario& scenario, const MachineDescriptor& md,
                             const SlowdownTableSet& tables) {
    (void)tables;  // the rule only needs the GEMM's boundedness
    const double ratio = machine_op_to_byte(md);
    const bool memory_bound =
        classify_gemm_boundedness(scenario.gemm, ratio) == Boundedness::MemoryBound;

    PartitionPlan plan;
    plan.comm_backend = CommBackend::DMA;
    plan.cus_comm = 0;
    plan.cus_idle = memory_bound ? md.min_cu_grain : 0;
    plan.cus_gemm = md.cus_per_gpu - plan.cus_idle;
    plan.predicted_makespan = 0.0;
    plan.schedule_order = {to_string(scenario.collective.kind),
                           scenario.gemm.tag.empty() ? "gemm" : scenario.gemm.tag};
    validate(plan, md);
    return plan;
}

std::string to_json(const PartitionPlan& p) {
    nlohmann::json j;
    j["comm_backend"] = p.comm_backend == CommBackend::CU ? "CU" : "DMA";
    j["cus_comm"] = p.cus_comm;
    j["cus_gemm"] = p.cus_gemm;
    j["cus_idle"] = p.cus_idle;
    j["schedule_order"] = p.schedule_order;
    j["predicted_makespan_s"] = p.predicted_makespan;
    return j.dump(2) + "\n";
}

}  // namespace c3sim
