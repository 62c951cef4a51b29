// c3sim - analytical performance model for concurrent GEMM + collective
// execution on a multi-GPU node. File-based batch tool: subcommands read
// JSON/CSV inputs and write reports; nothing here touches a real GPU.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "c3sim/calibrate.hpp"
#include "c3sim/conccl.hpp"
#include "c3sim/errors.hpp"
#include "c3sim/machine.hpp"
#include "c3sim/params_io.hpp"
#include "c3sim/sim.hpp"
#include "c3sim/strategy.hpp"
#include "json.hpp"

namespace {

using namespace c3sim;

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitUnknownEntity = 3;
constexpr int kExitValidation = 4;
constexpr int kExitFit = 5;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Temp file + rename so readers never observe a partial report.
void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write file: " + path.string());
        out << content;
        if (!out.good()) throw IoError("write failed: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

void emit(const std::optional<std::string>& out_path, const std::string& content) {
    if (out_path)
        write_atomic(*out_path, content);
    else
        std::cout << content;
}

struct CommonInputs {
    std::string machine_path;
    std::string dataset_path;
    std::string tables_path;
    std::string params_path;
    bool zero_interference = false;

    MachineDescriptor md;
    std::vector<C3Scenario> scenarios;
    SlowdownTableSet tables;
    RunParams params;

    void load(bool need_dataset, bool need_tables) {
        md = load_machine_file(machine_path);
        if (need_dataset) scenarios = load_dataset(dataset_path);
        if (!params_path.empty())
            params = load_params_file(params_path);
        if (need_tables) {
            if (tables_path.empty()) throw IoError("--tables is required");
            tables = load_slowdown_tables(tables_path, md.min_cu_grain);
        } else {
            for (int i = 0; i < kNumKernelClasses; ++i) {
                tables.tables[i].kernel_class = static_cast<KernelClass>(i);
                tables.tables[i].points = {{md.cus_per_gpu, 1.0}};
            }
        }
        if (zero_interference)
            apply_zero_interference(tables, params.penalties, params.eff, md);
    }
};

void check_format(const std::string& format) {
    if (format != "csv" && format != "structured-text")
        throw ValidationError("--format must be csv or structured-text, got '" + format + "'");
}

std::vector<C3Scenario> apply_filters(std::vector<C3Scenario> scenarios,
                                      const std::string& filter_collective,
                                      const std::string& filter_taxonomy,
                                      const MachineDescriptor& md,
                                      const EfficiencyParams& params) {
    std::vector<C3Scenario> out;
    std::optional<CollectiveKind> kind;
    if (!filter_collective.empty()) kind = collective_kind_from_string(filter_collective);
    std::optional<TaxonomyClass> tax;
    if (!filter_taxonomy.empty()) tax = taxonomy_from_string(filter_taxonomy);
    for (auto& s : scenarios) {
        if (kind && s.collective.kind != *kind) continue;
        if (tax) {
            // same label the sweep reports: the dataset's when present,
            // otherwise the classifier's
            TaxonomyClass label;
            if (s.expected_taxonomy) {
                label = *s.expected_taxonomy;
            } else {
                const double tg = roofline_gemm_time(s.gemm, md, params);
                const double tc = roofline_collective_time(s.collective, md, params, true);
                label = classify_c3(tg, tc).value;
            }
            if (label != *tax) continue;
        }
        out.push_back(std::move(s));
    }
    return out;
}

int cmd_classify(CommonInputs& in, const std::string& filter_collective,
                 const std::string& filter_taxonomy, const std::optional<std::string>& out_path,
                 const std::string& format) {
    check_format(format);
    in.load(/*need_dataset=*/true, /*need_tables=*/false);
    const auto scenarios = apply_filters(in.scenarios, filter_collective,
                                         filter_taxonomy, in.md, in.params.eff);
    const double ratio = machine_op_to_byte(in.md);

    nlohmann::json jrows = nlohmann::json::array();
    std::ostringstream csv;
    csv << "scenario_id,collective,gemm_tag,gemm_boundedness,collective_boundedness,"
           "t_gemm_s,t_comm_s,taxonomy,ideal_speedup,expected_taxonomy,match\n";
    int mismatches = 0;
    for (const auto& s : scenarios) {
        const double t_g = roofline_gemm_time(s.gemm, in.md, in.params.eff);
        const double t_c =
            roofline_collective_time(s.collective, in.md, in.params.eff, true);
        const auto label = classify_c3(t_g, t_c).value;
        const auto gemm_b = classify_gemm_boundedness(s.gemm, ratio);
        const auto comm_b =
            classify_collective_boundedness(s.collective, in.md, in.params.eff);
        const double ideal = ideal_speedup(t_g, t_c);
        const bool has_expected = s.expected_taxonomy.has_value();
        const bool match = !has_expected || *s.expected_taxonomy == label;
        if (!match) ++mismatches;
        csv << s.id << ',' << to_string(s.collective.kind) << ',' << s.gemm.tag << ','
            << to_string(gemm_b) << ',' << to_string(comm_b) << ',' << fmt(t_g) << ','
            << fmt(t_c) << ',' << to_string(label) << ',' << fmt(ideal) << ','
            << (has_expected ? to_string(*s.expected_taxonomy) : "") << ','
            << (match ? "yes" : "NO") << '\n';
        jrows.push_back({{"scenario_id", s.id},
                         {"collective", to_string(s.collective.kind)},
                         {"gemm_tag", s.gemm.tag},
                         {"gemm_boundedness", to_string(gemm_b)},
                         {"collective_boundedness", to_string(comm_b)},
                         {"t_gemm_s", t_g},
                         {"t_comm_s", t_c},
                         {"taxonomy", to_string(label)},
                         {"ideal_speedup", ideal},
                         {"expected_taxonomy",
                          has_expected ? to_string(*s.expected_taxonomy) : ""},
                         {"match", match}});
    }
    if (format == "structured-text")
        emit(out_path, nlohmann::json(jrows).dump(2) + "\n");
    else
        emit(out_path, csv.str());
    std::cerr << scenarios.size() << " scenarios classified, " << mismatches
              << " taxonomy mismatches\n";
    return kExitOk;
}

const C3Scenario& find_scenario(const std::vector<C3Scenario>& scenarios,
                                const std::string& id, const std::string& filter_collective) {
    std::optional<CollectiveKind> kind;
    if (!filter_collective.empty()) kind = collective_kind_from_string(filter_collective);
    const C3Scenario* any = nullptr;
    for (const auto& s : scenarios) {
        if (s.id != id) continue;
        if (kind && s.collective.kind != *kind) continue;
        if (!any || s.collective.kind == CollectiveKind::AllGather) any = &s;
    }
    if (!any) throw UnknownEntityError("unknown scenario id '" + id + "'");
    return *any;
}

int cmd_plan(CommonInputs& in, const std::string& scenario_id, const std::string& strategy_name,
             const std::string& filter_collective, const std::optional<std::string>& out_path) {
    in.load(/*need_dataset=*/true, /*need_tables=*/true);
    const Strategy strategy = strategy_from_string(strategy_name);
    const C3Scenario& s = find_scenario(in.scenarios, scenario_id, filter_collective);

    PartitionPlan plan;
    std::ostringstream audit;
    if (strategy == Strategy::ConcclRp || strategy == Strategy::Conccl) {
        plan = conccl_rp_plan(s, in.md, in.tables);
        if (strategy == Strategy::Conccl) {
            plan.cus_gemm = in.md.cus_per_gpu;
            plan.cus_idle = 0;
        }
        const auto& c = s.collective;
        const std::int64_t chunk = c.payload_bytes / c.n_ranks;
        const TransferPlan xfer =
            c.kind == CollectiveKind::AllGather
                ? plan_all_gather(c.n_ranks, std::max<std::int64_t>(chunk, 1), in.md)
                : plan_all_to_all(c.n_ranks, std::max<std::int64_t>(chunk, 1), in.md);
        const double ratio = machine_op_to_byte(in.md);
        const auto& gt = in.tables.at(gemm_kernel_class(s.gemm, ratio));
        plan.predicted_makespan =
            std::max(roofline_gemm_time(s.gemm, in.md, in.params.eff) *
                         slowdown_at(gt, plan.cus_gemm),
                     plan_cost(xfer, in.md, in.params.eff).total);
    } else if (strategy == Strategy::C3Rp || strategy == Strategy::C3SpRp) {
        const auto sweep = partition_heuristic(s, in.md, in.tables, in.params.eff);
        plan = sweep.plan;
        audit << "cus_comm,gemm_term_s,comm_term_s,predicted_s\n";
        for (const auto& c : sweep.candidates)
            audit << c.cus_comm << ',' << fmt(c.gemm_term) << ',' << fmt(c.comm_term) << ','
                  << fmt(c.predicted) << '\n';
    } else {
        throw UnknownEntityError("cmd plan supports c3_rp, c3_sp_rp, conccl and conccl_rp");
    }

    std::ostringstream report;
    report << "scenario " << s.id << " (" << to_string(s.collective.kind) << "), strategy "
           << to_string(strategy) << "\n"
           << to_json(plan);
    if (audit.tellp() > 0) report << "candidate sweep:\n" << audit.str();
    if (out_path) write_atomic(*out_path, to_json(plan));
    std::cout << report.str();
    return kExitOk;
}

int cmd_conccl_plan(CommonInputs& in, const std::string& kind_name, int ranks,
                    std::int64_t payload_bytes, const std::optional<std::string>& out_path) {
    in.load(/*need_dataset=*/false, /*need_tables=*/false);
    const CollectiveKind kind = collective_kind_from_string(kind_name);
    if (ranks < 1) throw ValidationError("--ranks must be >= 1");
    if (payload_bytes < 0) throw ValidationError("--payload-bytes must be >= 0");
    if (ranks > 1 && payload_bytes % ranks != 0)
        throw ValidationError("--payload-bytes must be divisible by --ranks");

    std::int64_t chunk = payload_bytes / ranks;
    if (ranks == 1 && chunk == 0) chunk = 1;  // degenerate single-rank no-op
    const TransferPlan plan = kind == CollectiveKind::AllGather
                                  ? plan_all_gather(ranks, chunk, in.md)
                                  : plan_all_to_all(ranks, chunk, in.md);
    const PlanCheck check = validate_plan(plan, in.md);
    if (out_path) write_atomic(*out_path, to_json(plan));

    std::cout << to_string(kind) << " plan: " << plan.transfers.size() << " transfers, "
              << ranks << " ranks, chunk " << plan.chunk_bytes << " B\n";
    const PlanCost cost = plan_cost(plan, in.md, in.params.eff);
    std::cout << "cost: total " << fmt(cost.total) << " s, wire " << fmt(cost.wire)
              << " s (launch " << fmt(in.md.cpu_launch_overhead) << " s/transfer, sync "
              << fmt(in.md.dma_sync_overhead) << " s)\n";
    std::cout << "validation: " << (check.ok ? "ok" : "FAILED: " + check.error) << "\n";
    return check.ok ? kExitOk : kExitValidation;
}

int cmd_sweep(CommonInputs& in, const std::string& strategy_name,
              const std::string& filter_collective, const std::string& filter_taxonomy,
              const std::optional<std::string>& out_path, const std::string& format) {
    check_format(format);
    in.load(/*need_dataset=*/true, /*need_tables=*/true);
    const auto scenarios = apply_filters(in.scenarios, filter_collective,
                                         filter_taxonomy, in.md, in.params.eff);

    std::vector<Strategy> strategies;
    if (strategy_name.empty() || strategy_name == "all")
        strategies.assign(std::begin(kAllStrategies), std::end(kAllStrategies));
    else
        strategies.push_back(strategy_from_string(strategy_name));

    SimOptions options;
    options.freeze_phase2_allocation = in.params.freeze_phase2_allocation;
    const SweepResult result = sweep(scenarios, strategies, in.md, in.tables,
                                     in.params.penalties, in.params.eff, options);
    if (format == "structured-text") {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : result.rows)
            rows.push_back({{"scenario_id", r.scenario_id},
                            {"collective", to_string(r.collective)},
                            {"taxonomy", to_string(r.taxonomy)},
                            {"strategy", to_string(r.strategy)},
                            {"makespan_s", r.makespan},
                            {"speedup", r.speedup},
                            {"ideal", r.ideal},
                            {"fraction_of_ideal", r.fraction_of_ideal}});
        nlohmann::json aggs = nlohmann::json::array();
        for (const auto& a : result.aggregates)
            aggs.push_back({{"collective", a.collective ? to_string(*a.collective) : "all"},
                            {"taxonomy", a.taxonomy ? to_string(*a.taxonomy) : "all"},
                            {"strategy", to_string(a.strategy)},
                            {"count", a.count},
                            {"mean_speedup", a.mean_speedup},
                            {"mean_ideal", a.mean_ideal},
                            {"mean_fraction_of_ideal", a.mean_fraction_of_ideal}});
        emit(out_path, nlohmann::json({{"rows", rows}, {"aggregates", aggs}}).dump(2) + "\n");
    } else {
        emit(out_path, sweep_to_csv(result));
    }
    return kExitOk;
}

int cmd_calibrate(CommonInputs& in, const std::string& measured_path,
                  const std::optional<std::string>& out_path) {
    in.load(/*need_dataset=*/true, /*need_tables=*/true);
    const auto samples = load_measured_csv(measured_path);
    const FitResult fit = fit_penalties(in.scenarios, samples, in.md, in.tables,
                                        in.params.eff, in.params.penalties);
    RunParams fitted = in.params;
    fitted.penalties = fit.penalties;
    const std::string text = save_params(fitted);
    if (out_path) write_atomic(*out_path, text);
    std::cout << text;
    std::cerr << "fit: rms residual " << fmt(fit.rms_residual) << " over " << samples.size()
              << " samples, " << fit.iterations << " iterations\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"c3sim: performance model for concurrent GPU computation and communication"};
    app.require_subcommand(1);

    CommonInputs in;
    std::optional<std::string> out_path;
    std::string format = "csv";
    std::string filter_collective, filter_taxonomy;

    auto add_common = [&](CLI::App* cmd, bool dataset, bool /*tables*/) {
        cmd->add_option("--machine", in.machine_path, "machine config JSON")->required();
        if (dataset)
            cmd->add_option("--dataset", in.dataset_path, "scenario dataset JSON")->required();
        cmd->add_option("--tables", in.tables_path, "slowdown tables CSV");
        cmd->add_option("--params", in.params_path, "model params JSON");
        cmd->add_flag("--zero-interference", in.zero_interference,
                      "force unit slowdowns/penalties and zero overheads");
        cmd->add_option("--out", out_path, "output file (default stdout)");
    };

    auto* classify = app.add_subcommand("classify", "boundedness + taxonomy per scenario");
    add_common(classify, true, false);
    classify->add_option("--format", format, "csv or structured-text");
    classify->add_option("--filter-collective", filter_collective, "all-gather or all-to-all");
    classify->add_option("--filter-taxonomy", filter_taxonomy, "G-long, C-long or GC-equal");

    std::string scenario_id, strategy_name;
    auto* plan = app.add_subcommand("plan", "partition plan for one scenario");
    add_common(plan, true, true);
    plan->add_option("--scenario", scenario_id, "scenario id")->required();
    plan->add_option("--strategy", strategy_name, "c3_rp, c3_sp_rp, conccl or conccl_rp")
        ->required();
    plan->add_option("--filter-collective", filter_collective,
                     "pick the all-gather or all-to-all instance of the id");

    std::string kind_name = "all-gather";
    int ranks = 8;
    std::int64_t payload_bytes = 0;
    auto* conccl = app.add_subcommand("conccl-plan", "DMA transfer plan for one collective");
    add_common(conccl, false, false);
    conccl->add_option("--kind", kind_name, "all-gather or all-to-all")->required();
    conccl->add_option("--ranks", ranks, "participating GPUs")->required();
    conccl->add_option("--payload-bytes", payload_bytes, "total collective payload")->required();

    auto* sweepc = app.add_subcommand("sweep", "simulate scenarios x strategies");
    add_common(sweepc, true, true);
    sweepc->add_option("--strategy", strategy_name, "one strategy name or 'all'");
    sweepc->add_option("--format", format, "csv or structured-text");
    sweepc->add_option("--filter-collective", filter_collective, "all-gather or all-to-all");
    sweepc->add_option("--filter-taxonomy", filter_taxonomy, "G-long, C-long or GC-equal");

    std::string measured_path;
    auto* calibrate = app.add_subcommand("calibrate", "fit co-run penalties to measurements");
    add_common(calibrate, true, true);
    calibrate->add_option("--measured", measured_path,
                          "CSV scenario_id,collective,strategy,measured_speedup")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (classify->parsed())
            return cmd_classify(in, filter_collective, filter_taxonomy, out_path, format);
        if (plan->parsed())
            return cmd_plan(in, scenario_id, strategy_name, filter_collective, out_path);
        if (conccl->parsed())
            return cmd_conccl_plan(in, kind_name, ranks, payload_bytes, out_path);
        if (sweepc->parsed())
            return cmd_sweep(in, strategy_name, filter_collective, filter_taxonomy, out_path,
                             format);
        if (calibrate->parsed()) return cmd_calibrate(in, measured_path, out_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const UnknownEntityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnknownEntity;
    } catch (const FitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFit;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
