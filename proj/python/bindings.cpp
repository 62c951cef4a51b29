#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "c3sim/calibrate.hpp"
#include "c3sim/conccl.hpp"
#include "c3sim/errors.hpp"
#include "c3sim/machine.hpp"
#include "c3sim/params_io.hpp"
#include "c3sim/sim.hpp"
#include "c3sim/strategy.hpp"

namespace py = pybind11;
using namespace c3sim;

PYBIND11_MODULE(_c3sim, m) {
    m.doc() = "Performance model for concurrent GPU computation and communication";

    py::register_exception<IoError>(m, "IoError");
    py::register_exception<UnknownEntityError>(m, "UnknownEntityError");
    py::register_exception<ValidationError>(m, "ValidationError");
    py::register_exception<FitError>(m, "FitError");

    py::enum_<Topology>(m, "Topology").value("FULLY_CONNECTED", Topology::FullyConnected);
    py::enum_<CollectiveKind>(m, "CollectiveKind")
        .value("ALL_GATHER", CollectiveKind::AllGather)
        .value("ALL_TO_ALL", CollectiveKind::AllToAll);
    py::enum_<Boundedness>(m, "Boundedness")
        .value("COMPUTE_BOUND", Boundedness::ComputeBound)
        .value("MEMORY_BOUND", Boundedness::MemoryBound);
    py::enum_<CommBoundedness>(m, "CommBoundedness")
        .value("LATENCY_BOUND", CommBoundedness::LatencyBound)
        .value("BANDWIDTH_BOUND", CommBoundedness::BandwidthBound);
    py::enum_<TaxonomyClass>(m, "TaxonomyClass")
        .value("G_LONG", TaxonomyClass::GLong)
        .value("C_LONG", TaxonomyClass::CLong)
        .value("GC_EQUAL", TaxonomyClass::GCEqual);
    py::enum_<KernelClass>(m, "KernelClass")
        .value("GEMM_COMPUTE_BOUND", KernelClass::GemmComputeBound)
        .value("GEMM_MEMORY_BOUND", KernelClass::GemmMemoryBound)
        .value("ALL_GATHER", KernelClass::AllGather)
        .value("ALL_TO_ALL", KernelClass::AllToAll);
    py::enum_<CommBackend>(m, "CommBackend")
        .value("CU", CommBackend::CU)
        .value("DMA", CommBackend::DMA);
    py::enum_<Strategy>(m, "Strategy")
        .value("SERIAL", Strategy::Serial)
        .value("C3_BASE", Strategy::C3Base)
        .value("C3_SP", Strategy::C3Sp)
        .value("C3_RP", Strategy::C3Rp)
        .value("C3_SP_RP", Strategy::C3SpRp)
        .value("CONCCL", Strategy::Conccl)
        .value("CONCCL_RP", Strategy::ConcclRp);

    py::class_<MachineDescriptor>(m, "MachineDescriptor")
        .def(py::init<>())
        .def_readwrite("gpus_per_node", &MachineDescriptor::gpus_per_node)
        .def_readwrite("cus_per_gpu", &MachineDescriptor::cus_per_gpu)
        .def_readwrite("xcds_per_gpu", &MachineDescriptor::xcds_per_gpu)
        .def_readwrite("cus_per_xcd", &MachineDescriptor::cus_per_xcd)
        .def_readwrite("min_cu_grain", &MachineDescriptor::min_cu_grain)
        .def_readwrite("dma_engines_per_gpu", &MachineDescriptor::dma_engines_per_gpu)
        .def_readwrite("peak_compute_flops", &MachineDescriptor::peak_compute_flops)
        .def_readwrite("hbm_bandwidth", &MachineDescriptor::hbm_bandwidth)
        .def_readwrite("llc_capacity", &MachineDescriptor::llc_capacity)
        .def_readwrite("link_bandwidth_unidir", &MachineDescriptor::link_bandwidth_unidir)
        .def_readwrite("links_per_gpu", &MachineDescriptor::links_per_gpu)
        .def_readwrite("cpu_launch_overhead", &MachineDescriptor::cpu_launch_overhead)
        .def_readwrite("dma_sync_overhead", &MachineDescriptor::dma_sync_overhead);

    m.def("load_machine", &load_machine, py::arg("config_text"));
    m.def("load_machine_file", &load_machine_file, py::arg("path"));
    m.def("save_machine", &save_machine);
    m.def("machine_op_to_byte", &machine_op_to_byte);

    py::class_<GemmKernel>(m, "GemmKernel")
        .def(py::init<>())
        .def_readwrite("tag", &GemmKernel::tag)
        .def_readwrite("m", &GemmKernel::m)
        .def_readwrite("n", &GemmKernel::n)
        .def_readwrite("k", &GemmKernel::k)
        .def_readwrite("dtype_bytes", &GemmKernel::dtype_bytes)
        .def_readwrite("measured_op_to_byte", &GemmKernel::measured_op_to_byte)
        .def_readwrite("measured_time", &GemmKernel::measured_time)
        .def_readwrite("boundedness_override", &GemmKernel::boundedness_override);
    py::class_<CollectiveOp>(m, "CollectiveOp")
        .def(py::init<>())
        .def_readwrite("kind", &CollectiveOp::kind)
        .def_readwrite("payload_bytes", &CollectiveOp::payload_bytes)
        .def_readwrite("n_ranks", &CollectiveOp::n_ranks)
        .def_readwrite("measured_time", &CollectiveOp::measured_time);
    py::class_<C3Scenario>(m, "C3Scenario")
        .def(py::init<>())
        .def_readwrite("id", &C3Scenario::id)
        .def_readwrite("gemm", &C3Scenario::gemm)
        .def_readwrite("collective", &C3Scenario::collective)
        .def_readwrite("source", &C3Scenario::source)
        .def_readwrite("expected_taxonomy", &C3Scenario::expected_taxonomy);
    py::class_<EfficiencyParams>(m, "EfficiencyParams")
        .def(py::init<>())
        .def_readwrite("efficiency", &EfficiencyParams::efficiency)
        .def_readwrite("comm_launch_overhead_cu", &EfficiencyParams::comm_launch_overhead_cu);

    m.def("gemm_flops", &gemm_flops);
    m.def("gemm_min_bytes", &gemm_min_bytes);
    m.def("classify_gemm_boundedness", &classify_gemm_boundedness);
    m.def("classify_collective_boundedness", &classify_collective_boundedness);
    m.def("roofline_gemm_time", &roofline_gemm_time);
    m.def("roofline_collective_time", &roofline_collective_time, py::arg("collective"),
          py::arg("machine"), py::arg("params"), py::arg("include_overhead"));
    m.def("estimate_gemm_workgroups",
          py::overload_cast<const GemmKernel&, int>(&estimate_workgroups), py::arg("gemm"),
          py::arg("tile") = 128);
    m.def("estimate_collective_workgroups",
          py::overload_cast<const CollectiveOp&>(&estimate_workgroups));
    m.def("gemm_bandwidth_demand", &gemm_bandwidth_demand);
    m.def("collective_bandwidth_demand", &collective_bandwidth_demand);
    m.def("load_dataset", &load_dataset, py::arg("path"));
    m.def("parse_dataset", &parse_dataset);

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_readwrite("hidden", &ModelConfig::hidden)
        .def_readwrite("ffn", &ModelConfig::ffn)
        .def_readwrite("tokens", &ModelConfig::tokens)
        .def_readwrite("dtype_bytes", &ModelConfig::dtype_bytes)
        .def_readwrite("shards", &ModelConfig::shards);
    py::class_<ModelWorkload>(m, "ModelWorkload")
        .def_readonly("gemms", &ModelWorkload::gemms)
        .def_readonly("all_gathers", &ModelWorkload::all_gathers);
    m.def("ingest_model", &ingest_model);

    py::class_<TaxonomyLabel>(m, "TaxonomyLabel")
        .def_readonly("value", &TaxonomyLabel::value)
        .def_readonly("threshold", &TaxonomyLabel::threshold);
    m.def("classify_c3", &classify_c3, py::arg("t_gemm"), py::arg("t_comm"),
          py::arg("threshold") = 1.15);
    m.def("ideal_speedup", &ideal_speedup);
    m.def("fraction_of_ideal", &fraction_of_ideal);

    py::class_<SlowdownPoint>(m, "SlowdownPoint")
        .def_readwrite("cus", &SlowdownPoint::cus)
        .def_readwrite("slowdown", &SlowdownPoint::slowdown);
    py::class_<SlowdownTable>(m, "SlowdownTable")
        .def_readwrite("kernel_class", &SlowdownTable::kernel_class)
        .def_readwrite("points", &SlowdownTable::points);
    py::class_<SlowdownTableSet>(m, "SlowdownTableSet")
        .def("at", py::overload_cast<KernelClass>(&SlowdownTableSet::at, py::const_),
             py::return_value_policy::reference_internal);
    m.def("slowdown_at", &slowdown_at);
    m.def("comm_saturation_cus", &comm_saturation_cus);
    m.def("default_comm_table", &default_comm_table);
    m.def("shared_memory_factor", &shared_memory_factor);
    m.def("load_slowdown_tables", &load_slowdown_tables, py::arg("path"),
          py::arg("min_cu_grain") = 1);
    m.def("save_slowdown_tables", &save_slowdown_tables);

    py::class_<CoRunPenalty>(m, "CoRunPenalty")
        .def(py::init(&CoRunPenalty::defaults))
        .def_static("defaults", &CoRunPenalty::defaults)
        .def_static("ones", &CoRunPenalty::ones)
        .def("get", &CoRunPenalty::get)
        .def("set", &CoRunPenalty::set);

    py::class_<RunParams>(m, "RunParams")
        .def(py::init<>())
        .def_readwrite("eff", &RunParams::eff)
        .def_readwrite("penalties", &RunParams::penalties)
        .def_readwrite("freeze_phase2_allocation", &RunParams::freeze_phase2_allocation);
    m.def("load_params_file", &load_params_file, py::arg("path"));
    m.def("save_params", &save_params);

    py::class_<PartitionPlan>(m, "PartitionPlan")
        .def_readonly("comm_backend", &PartitionPlan::comm_backend)
        .def_readonly("cus_comm", &PartitionPlan::cus_comm)
        .def_readonly("cus_gemm", &PartitionPlan::cus_gemm)
        .def_readonly("cus_idle", &PartitionPlan::cus_idle)
        .def_readonly("schedule_order", &PartitionPlan::schedule_order)
        .def_readonly("predicted_makespan", &PartitionPlan::predicted_makespan);
    py::class_<CandidateEval>(m, "CandidateEval")
        .def_readonly("cus_comm", &CandidateEval::cus_comm)
        .def_readonly("gemm_term", &CandidateEval::gemm_term)
        .def_readonly("comm_term", &CandidateEval::comm_term)
        .def_readonly("predicted", &CandidateEval::predicted);
    py::class_<PartitionSweep>(m, "PartitionSweep")
        .def_readonly("plan", &PartitionSweep::plan)
        .def_readonly("candidates", &PartitionSweep::candidates);
    m.def("partition_heuristic", &partition_heuristic);
    m.def("conccl_rp_plan", &conccl_rp_plan);

    py::class_<Transfer>(m, "Transfer")
        .def_readonly("src_gpu", &Transfer::src_gpu)
        .def_readonly("dst_gpu", &Transfer::dst_gpu)
        .def_readonly("src_offset", &Transfer::src_offset)
        .def_readonly("dst_offset", &Transfer::dst_offset)
        .def_readonly("length", &Transfer::length)
        .def_readonly("engine_id", &Transfer::engine_id)
        .def_readonly("seq", &Transfer::seq);
    py::class_<TransferPlan>(m, "TransferPlan")
        .def_readonly("kind", &TransferPlan::kind)
        .def_readonly("n_ranks", &TransferPlan::n_ranks)
        .def_readonly("chunk_bytes", &TransferPlan::chunk_bytes)
        .def_readonly("transfers", &TransferPlan::transfers);
    py::class_<PlanCheck>(m, "PlanCheck")
        .def_readonly("ok", &PlanCheck::ok)
        .def_readonly("error", &PlanCheck::error);
    py::class_<PlanCost>(m, "PlanCost")
        .def_readonly("total", &PlanCost::total)
        .def_readonly("per_engine", &PlanCost::per_engine)
        .def_readonly("wire", &PlanCost::wire);
    m.def("plan_all_gather", &plan_all_gather);
    m.def("plan_all_to_all", &plan_all_to_all);
    m.def("validate_plan", &validate_plan);
    m.def("plan_cost", &plan_cost);
    m.def("plan_to_json", py::overload_cast<const TransferPlan&>(&to_json));

    py::class_<PhaseRecord>(m, "PhaseRecord")
        .def_readonly("start", &PhaseRecord::start)
        .def_readonly("end", &PhaseRecord::end)
        .def_readonly("rate_gemm", &PhaseRecord::rate_gemm)
        .def_readonly("rate_comm", &PhaseRecord::rate_comm)
        .def_readonly("cus_gemm", &PhaseRecord::cus_gemm)
        .def_readonly("cus_comm", &PhaseRecord::cus_comm);
    py::class_<SimTimeline>(m, "SimTimeline")
        .def_readonly("phases", &SimTimeline::phases)
        .def_readonly("makespan", &SimTimeline::makespan)
        .def_readonly("serial_time", &SimTimeline::serial_time)
        .def_readonly("speedup", &SimTimeline::speedup)
        .def_readonly("ideal", &SimTimeline::ideal)
        .def_readonly("fraction_of_ideal", &SimTimeline::fraction_of_ideal)
        .def_readonly("work_gemm", &SimTimeline::work_gemm)
        .def_readonly("work_comm", &SimTimeline::work_comm);
    py::class_<SimOptions>(m, "SimOptions")
        .def(py::init<>())
        .def_readwrite("freeze_phase2_allocation", &SimOptions::freeze_phase2_allocation)
        .def_readwrite("force_cus_comm", &SimOptions::force_cus_comm);
    py::class_<Allocation>(m, "Allocation")
        .def_readonly("cus_gemm", &Allocation::cus_gemm)
        .def_readonly("cus_comm", &Allocation::cus_comm)
        .def_readonly("cus_idle", &Allocation::cus_idle)
        .def_readonly("comm_backend", &Allocation::comm_backend)
        .def_readonly("comm_first", &Allocation::comm_first);
    m.def("allocate_cus", &allocate_cus);
    m.def("simulate", &simulate, py::arg("scenario"), py::arg("strategy"), py::arg("machine"),
          py::arg("tables"), py::arg("penalties"), py::arg("params"),
          py::arg("options") = SimOptions{});
    m.def("work_conservation_check", &work_conservation_check);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("scenario_id", &SweepRow::scenario_id)
        .def_readonly("collective", &SweepRow::collective)
        .def_readonly("taxonomy", &SweepRow::taxonomy)
        .def_readonly("strategy", &SweepRow::strategy)
        .def_readonly("makespan", &SweepRow::makespan)
        .def_readonly("speedup", &SweepRow::speedup)
        .def_readonly("ideal", &SweepRow::ideal)
        .def_readonly("fraction_of_ideal", &SweepRow::fraction_of_ideal);
    py::class_<AggregateRow>(m, "AggregateRow")
        .def_readonly("collective", &AggregateRow::collective)
        .def_readonly("taxonomy", &AggregateRow::taxonomy)
        .def_readonly("strategy", &AggregateRow::strategy)
        .def_readonly("count", &AggregateRow::count)
        .def_readonly("mean_speedup", &AggregateRow::mean_speedup)
        .def_readonly("mean_ideal", &AggregateRow::mean_ideal)
        .def_readonly("mean_fraction_of_ideal", &AggregateRow::mean_fraction_of_ideal);
    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("rows", &SweepResult::rows)
        .def_readonly("aggregates", &SweepResult::aggregates);
    m.def("sweep", &sweep, py::arg("scenarios"), py::arg("strategies"), py::arg("machine"),
          py::arg("tables"), py::arg("penalties"), py::arg("params"),
          py::arg("options") = SimOptions{});
    m.def("sweep_to_csv", &sweep_to_csv);

    py::class_<MeasuredSample>(m, "MeasuredSample")
        .def(py::init<>())
        .def_readwrite("scenario_id", &MeasuredSample::scenario_id)
        .def_readwrite("collective", &MeasuredSample::collective)
        .def_readwrite("strategy", &MeasuredSample::strategy)
        .def_readwrite("measured_speedup", &MeasuredSample::measured_speedup);
    py::class_<FitResult>(m, "FitResult")
        .def_readonly("penalties", &FitResult::penalties)
        .def_readonly("rms_residual", &FitResult::rms_residual)
        .def_readonly("iterations", &FitResult::iterations);
    m.def("load_measured_csv", &load_measured_csv, py::arg("path"));
    m.def("fit_penalties", &fit_penalties);

    m.def("strategy_name", py::overload_cast<Strategy>(&to_string));
    m.def("taxonomy_name", py::overload_cast<TaxonomyClass>(&to_string));
    m.def("collective_name", py::overload_cast<CollectiveKind>(&to_string));
}
