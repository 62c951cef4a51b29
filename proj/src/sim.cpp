#include "c3sim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "c3sim/errors.hpp"

namespace c3sim {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::Serial: return "serial";
        case Strategy::C3Base: return "c3_base";
        case Strategy::C3Sp: return "c3_sp";
        case Strategy::C3Rp: return "c3_rp";
        case Strategy::C3SpRp: return "c3_sp_rp";
        case Strategy::Conccl: return "conccl";
        case Strategy::ConcclRp: return "conccl_rp";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    for (Strategy st : kAllStrategies)
        if (to_string(st) == s) return st;
    throw UnknownEntityError("unknown strategy '" + s + "'");
}

namespace {

int round_up_to_grain(int value, int grain) {
    return (value + grain - 1) / grain * grain;
}

}  // namespace

Allocation allocate_cus(const C3Scenario& scenario, Strategy strategy,
                        const MachineDescriptor& md, const SlowdownTableSet& tables,
                        const EfficiencyParams& params) {
    const int cus = md.cus_per_gpu;
    const int grain = md.min_cu_grain;
    Allocation a;
    switch (strategy) {
        case Strategy::Serial:
            // Each kernel runs alone with the whole machine.
            a.cus_gemm = cus;
            a.cus_comm = cus;
            a.comm_backend = CommBackend::CU;
            break;
        case Strategy::C3Base: {
            // GEMM launches first; the scheduler hands it one CU per pending
            // workgroup and the late communication kernel keeps only the
            // final grain once the GEMM saturates the machine.
            const int want = round_up_to_grain(estimate_workgroups(scenario.gemm), grain);
            int cus_gemm = std::min(want, cus);
            a.cus_comm = std::max(cus - cus_gemm, grain);
            a.cus_gemm = cus - a.cus_comm;
            a.comm_backend = CommBackend::CU;
            a.comm_first = false;
            break;
        }
        case Strategy::C3Sp: {
            int want = round_up_to_grain(comm_saturation_cus(scenario.collective.kind), grain);
            a.cus_comm = std::clamp(want, grain, cus - grain);
            a.cus_gemm = cus - a.cus_comm;
            a.comm_backend = CommBackend::CU;
            a.comm_first = true;
            break;
        }
        case Strategy::C3Rp:
        case Strategy::C3SpRp: {
            const auto sweep = partition_heuristic(scenario, md, tables, params);
            a.cus_comm = sweep.plan.cus_comm;
            a.cus_gemm = sweep.plan.cus_gemm;
            a.comm_backend = CommBackend::CU;
            a.comm_first = true;
            break;
        }
        case Strategy::Conccl: {
            a.cus_gemm = cus;
            a.cus_comm = 0;
            a.comm_backend = CommBackend::DMA;
            a.comm_first = true;
            break;
        }
        case Strategy::ConcclRp: {
            const auto plan = conccl_rp_plan(scenario, md, tables);
            a.cus_gemm = plan.cus_gemm;
            a.cus_comm = plan.cus_comm;
            a.cus_idle = plan.cus_idle;
            a.comm_backend = CommBackend::DMA;
            a.comm_first = true;
            break;
        }
    }
    return a;
}

namespace {

double dma_comm_work(const C3Scenario& scenario, const MachineDescriptor& md,
                     const EfficiencyParams& params) {
    const auto& c = scenario.collective;
    const std::int64_t chunk = c.n_ranks > 0 ? c.payload_bytes / c.n_ranks : 0;
    const TransferPlan plan = c.kind == CollectiveKind::AllGather
                                  ? plan_all_gather(c.n_ranks, std::max<std::int64_t>(chunk, 1), md)
                                  : plan_all_to_all(c.n_ranks, std::max<std::int64_t>(chunk, 1), md);
    if (chunk == 0 && c.n_ranks > 1) {
        // Degenerate zero-payload collective: overheads only.
        return static_cast<double>(plan.transfers.size() - 1) * md.cpu_launch_overhead +
               md.dma_sync_overhead;
    }
    return plan_cost(plan, md, params).total;
}

}  // namespace

SimTimeline simulate(const C3Scenario& scenario, Strategy strategy,
                     const MachineDescriptor& md, const SlowdownTableSet& tables,
                     const CoRunPenalty& penalties, const EfficiencyParams& params,
                     const SimOptions& options) {
    validate(params);
    validate(penalties);
    validate(scenario.gemm);
    validate(scenario.collective);

    const double ratio = machine_op_to_byte(md);
    const KernelClass gemm_cls = gemm_kernel_class(scenario.gemm, ratio);
    const KernelClass comm_cls = comm_kernel_class(scenario.collective.kind);
    const auto& gemm_table = tables.at(gemm_cls);
    const auto& comm_table = tables.at(comm_cls);

    const double t_gemm = roofline_gemm_time(scenario.gemm, md, params);
    const double t_comm =
        roofline_collective_time(scenario.collective, md, params, /*include_overhead=*/true);
    if (!(t_gemm > 0) || !(t_comm > 0))
        throw ValidationError("simulate: isolated times must be positive");

    SimTimeline tl;
    tl.serial_time = t_gemm + t_comm;
    tl.ideal = ideal_speedup(t_gemm, t_comm);
    tl.work_gemm = t_gemm;

    if (strategy == Strategy::Serial) {
        tl.work_comm = t_comm;
        tl.phases.push_back({0.0, t_gemm, 1.0, 0.0, md.cus_per_gpu, 0});
        tl.phases.push_back({t_gemm, t_gemm + t_comm, 0.0, 1.0, 0, md.cus_per_gpu});
        tl.makespan = t_gemm + t_comm;
        tl.speedup = tl.serial_time / tl.makespan;
        tl.fraction_of_ideal = fraction_of_ideal(tl.speedup, tl.ideal);
        return tl;
    }

    Allocation alloc = allocate_cus(scenario, strategy, md, tables, params);
    if (options.force_cus_comm &&
        (strategy == Strategy::C3Rp || strategy == Strategy::C3SpRp)) {
        alloc.cus_comm = *options.force_cus_comm;
        alloc.cus_gemm = md.cus_per_gpu - alloc.cus_comm;
        alloc.cus_idle = 0;
    }
    const bool dma = alloc.comm_backend == CommBackend::DMA;

    const double work_comm = dma ? dma_comm_work(scenario, md, params) : t_comm;
    tl.work_comm = work_comm;

    // Phase 1: both kernels active.
    const double slow_gemm = slowdown_at(gemm_table, alloc.cus_gemm);
    const double slow_comm = dma ? 1.0 : slowdown_at(comm_table, alloc.cus_comm);
    const std::vector<double> demands = {
        gemm_bandwidth_demand(scenario.gemm, md, params),
        collective_bandwidth_demand(scenario.collective, md, params)};
    const double mem_factor =
        shared_memory_factor(demands, params.efficiency * md.hbm_bandwidth)[0];
    const double rate_gemm =
        1.0 / (slow_gemm * mem_factor * penalties.get(gemm_cls, alloc.comm_backend));
    const double rate_comm =
        1.0 / (slow_comm * mem_factor * penalties.get(comm_cls, alloc.comm_backend));
    if (!(rate_gemm > 0) || !(rate_comm > 0))
        throw ValidationError("simulate: non-positive phase rate");

    const double finish_gemm = t_gemm / rate_gemm;
    const double finish_comm = work_comm / rate_comm;
    const double t1 = std::min(finish_gemm, finish_comm);
    tl.phases.push_back({0.0, t1, rate_gemm, rate_comm, alloc.cus_gemm, alloc.cus_comm});

    if (finish_gemm == finish_comm) {
        tl.makespan = t1;
    } else if (finish_gemm < finish_comm) {
        // Communication survives. Frozen allocation keeps the CU-loss
        // slowdown; otherwise the retired kernel's CUs are rebalanced and the
        // survivor runs at its isolated rate.
        const double rem = std::max(0.0, work_comm - t1 * rate_comm);
        const double rate2 =
            options.freeze_phase2_allocation && !dma ? 1.0 / slow_comm : 1.0;
        const int cus2 = options.freeze_phase2_allocation ? alloc.cus_comm
                         : dma                            ? 0
                                                          : md.cus_per_gpu;
        tl.makespan = t1 + rem / rate2;
        tl.phases.push_back({t1, tl.makespan, 0.0, rate2, 0, cus2});
    } else {
        const double rem = std::max(0.0, t_gemm - t1 * rate_gemm);
        const double rate2 = options.freeze_phase2_allocation ? 1.0 / slow_gemm : 1.0;
        const int cus2 =
            options.freeze_phase2_allocation ? alloc.cus_gemm : md.cus_per_gpu;
        tl.makespan = t1 + rem / rate2;
        tl.phases.push_back({t1, tl.makespan, rate2, 0.0, cus2, 0});
    }

    tl.speedup = tl.serial_time / tl.makespan;
    tl.fraction_of_ideal = fraction_of_ideal(tl.speedup, tl.ideal);
    return tl;
}

void work_conservation_check(const SimTimeline& timeline) {
    double done_gemm = 0.0, done_comm = 0.0;
    double cursor = 0.0;
    for (const auto& ph : timeline.phases) {
        if (std::abs(ph.start - cursor) > 1e-9 * std::max(1.0, timeline.makespan))
            throw ValidationError("work conservation: phases are not contiguous");
        const double dur = ph.end - ph.start;
        if (dur < 0) throw ValidationError("work conservation: negative phase duration");
        done_gemm += dur * ph.rate_gemm;
        done_comm += dur * ph.rate_comm;
        cursor = ph.end;
    }
    const auto check = [](double done, double work, const char* name) {
        const double rel = std::abs(done - work) / std::max(work, 1e-300);
        if (rel > 1e-9)
            throw ValidationError(std::string("work conservation: ") + name +
                                  " progress off by relative " + std::to_string(rel));
    };
    check(done_gemm, timeline.work_gemm, "gemm");
    check(done_comm, timeline.work_comm, "comm");
}

namespace {

TaxonomyClass effective_taxonomy(const C3Scenario& s, const MachineDescriptor& md,
                                 const EfficiencyParams& params) {
    if (s.expected_taxonomy) return *s.expected_taxonomy;
    const double t_g = roofline_gemm_time(s.gemm, md, params);
    const double t_c = roofline_collective_time(s.collective, md, params, true);
    return classify_c3(t_g, t_c).value;
}

struct Acc {
    int count = 0;
    double speedup = 0.0, ideal = 0.0, fraction = 0.0;
};

}  // namespace

SweepResult sweep(const std::vector<C3Scenario>& scenarios,
                  const std::vector<Strategy>& strategies, const MachineDescriptor& md,
                  const SlowdownTableSet& tables, const CoRunPenalty& penalties,
                  const EfficiencyParams& params, const SimOptions& options) {
    SweepResult result;
    for (const auto& s : scenarios) {
        const TaxonomyClass tax = effective_taxonomy(s, md, params);
        for (Strategy st : strategies) {
            const SimTimeline tl = simulate(s, st, md, tables, penalties, params, options);
            work_conservation_check(tl);
            result.rows.push_back({s.id, s.collective.kind, tax, st, tl.makespan,
                                   tl.speedup, tl.ideal, tl.fraction_of_ideal});
        }
    }
    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const SweepRow& a, const SweepRow& b) {
                         if (a.scenario_id != b.scenario_id)
                             return a.scenario_id < b.scenario_id;
                         if (a.collective != b.collective)
                             return static_cast<int>(a.collective) < static_cast<int>(b.collective);
                         return static_cast<int>(a.strategy) < static_cast<int>(b.strategy);
                     });

    // Mean fraction-of-ideal per strategy, grouped by collective x taxonomy
    // plus an overall row, mirroring the usual figure groupings.
    for (Strategy st : strategies) {
        std::map<std::pair<int, int>, Acc> groups;
        Acc overall;
        for (const auto& row : result.rows) {
            if (row.strategy != st) continue;
            auto& g = groups[{static_cast<int>(row.collective), static_cast<int>(row.taxonomy)}];
            for (Acc* a : {&g, &overall}) {
                a->count += 1;
                a->speedup += row.speedup;
                a->ideal += row.ideal;
                a->fraction += row.fraction_of_ideal;
            }
        }
        for (const auto& [key, acc] : groups) {
            result.aggregates.push_back({static_cast<CollectiveKind>(key.first),
                                         static_cast<TaxonomyClass>(key.second), st, acc.count,
                                         acc.speedup / acc.count, acc.ideal / acc.count,
                                         acc.fraction / acc.count});
        }
        if (overall.count > 0)
            result.aggregates.push_back({std::nullopt, std::nullopt, st, overall.count,
                                         overall.speedup / overall.count,
                                         overall.ideal / overall.count,
                                         overall.fraction / overall.count});
    }
    return result;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string sweep_to_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "scenario_id,collective,taxonomy,strategy,makespan_s,speedup,ideal,fraction_of_ideal\n";
    for (const auto& r : result.rows) {
        out << r.scenario_id << ',' << to_string(r.collective) << ',' << to_string(r.taxonomy)
            << ',' << to_string(r.strategy) << ',' << fmt(r.makespan) << ',' << fmt(r.speedup)
            << ',' << fmt(r.ideal) << ',' << fmt(r.fraction_of_ideal) << '\n';
    }
    for (const auto& a : result.aggregates) {
        out << "mean," << (a.collective ? to_string(*a.collective) : "all") << ','
            << (a.taxonomy ? to_string(*a.taxonomy) : "all") << ',' << to_string(a.strategy)
            << ",," << fmt(a.mean_speedup) << ',' << fmt(a.mean_ideal) << ','
            << fmt(a.mean_fraction_of_ideal) << '\n';
    }
    return out.str();
}

void apply_zero_interference(SlowdownTableSet& tables, CoRunPenalty& penalties,
                             EfficiencyParams& params, MachineDescriptor& md) {
    for (int i = 0; i < kNumKernelClasses; ++i) {
        auto& t = tables.tables[i];
        t.kernel_class = static_cast<KernelClass>(i);
        t.points = {{md.cus_per_gpu, 1.0}};
    }
    penalties = CoRunPenalty::ones();
    params.comm_launch_overhead_cu = 0.0;
    md.cpu_launch_overhead = 0.0;
    md.dma_sync_overhead = 0.0;
}

}  // namespace c3sim
