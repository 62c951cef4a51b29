// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Everything runs from the shipped data files.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "c3sim/calibrate.hpp"
#include "c3sim/conccl.hpp"
#include "c3sim/errors.hpp"
#include "c3sim/machine.hpp"
#include "c3sim/params_io.hpp"
#include "c3sim/sim.hpp"
#include "c3sim/strategy.hpp"

using namespace c3sim;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion,
                name.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass) ++g_failures;
}

struct Env {
    MachineDescriptor md;
    SlowdownTableSet tables;
    RunParams params;
    std::vector<C3Scenario> scenarios;

    Env() {
        const fs::path dir = C3SIM_DATA_DIR;
        md = load_machine_file(dir / "mi300x-node.json");
        tables = load_slowdown_tables(dir / "slowdown-tables.csv", md.min_cu_grain);
        params = load_params_file(dir / "default-params.json");
        scenarios = load_dataset(dir / "c3-dataset.json");
    }

    const C3Scenario& find(const std::string& id, CollectiveKind kind) const {
        for (const auto& s : scenarios)
            if (s.id == id && s.collective.kind == kind) return s;
        throw UnknownEntityError(id);
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. Taxonomy reproduction for the compute-bound scenario families. The
//    memory-bound families and cb5_13G are excluded: the model has no
//    measured memory-bound execution times, and cb5_13G sits on the 1.15
//    boundary of the classifier.
void criterion_taxonomy(const Env& env) {
    const std::vector<std::string> excluded = {"cb5_13G"};
    int checked = 0, mismatches = 0;
    std::string detail;
    for (const auto& s : env.scenarios) {
        if (s.gemm.tag.rfind("cb", 0) != 0) continue;
        if (std::find(excluded.begin(), excluded.end(), s.id) != excluded.end()) continue;
        const double tg = roofline_gemm_time(s.gemm, env.md, env.params.eff);
        const double tc =
            roofline_collective_time(s.collective, env.md, env.params.eff, true);
        const auto label = classify_c3(tg, tc).value;
        ++checked;
        if (!s.expected_taxonomy || label != *s.expected_taxonomy) {
            ++mismatches;
            detail += s.id + " ";
        }
    }
    report(1, "taxonomy matches the reference labels for cb families",
           checked == 16 && mismatches == 0,
           std::to_string(checked) + " instances, " + std::to_string(mismatches) +
               " mismatches (mb families and cb5_13G excluded) " + detail);
}

// 2. Ideal speedups stay in (1.05, 2]; GC-equal classifications imply the
//    derived lower bound; the balanced unit case is exactly 2.
void criterion_ideal_bounds(const Env& env) {
    bool pass = true;
    std::string detail;
    double lo = 1e300, hi = 0;
    for (const auto& s : env.scenarios) {
        const double tg = roofline_gemm_time(s.gemm, env.md, env.params.eff);
        const double tc =
            roofline_collective_time(s.collective, env.md, env.params.eff, true);
        const double ideal = ideal_speedup(tg, tc);
        lo = std::min(lo, ideal);
        hi = std::max(hi, ideal);
        if (!(ideal > 1.05 && ideal <= 2.0)) {
            pass = false;
            detail += s.id + "=" + fmt(ideal) + " ";
        }
        if (classify_c3(tg, tc).value == TaxonomyClass::GCEqual &&
            ideal < 2.15 / 1.15 - 1e-12)
            pass = false;
    }
    // classifier-level property, independent of the bundled data
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> time(1e-6, 1e0);
    for (int i = 0; i < 20000; ++i) {
        const double tg = time(rng), tc = time(rng);
        if (classify_c3(tg, tc).value == TaxonomyClass::GCEqual &&
            ideal_speedup(tg, tc) < 2.15 / 1.15 - 1e-12)
            pass = false;
    }
    if (ideal_speedup(1.0, 1.0) != 2.0) pass = false;
    report(2, "ideal speedups within (1.05, 2]", pass,
           "range [" + fmt(lo) + ", " + fmt(hi) + "] " + detail);
}

// 3. Fraction-of-ideal arithmetic.
void criterion_fraction(const Env&) {
    const double f = fraction_of_ideal(1.13, 1.60);
    report(3, "fraction_of_ideal(1.13, 1.60) == 0.2167 +/- 0.0005",
           std::abs(f - 0.2167) <= 0.0005, "got " + fmt(f));
}

// 4. Transfer plans replay correctly; mutations are always rejected.
void criterion_plan_oracle(const Env& env) {
    std::mt19937 rng(20240814);
    std::uniform_int_distribution<std::int64_t> size(1, 4096);
    int failures = 0;
    for (const int n : {1, 2, 4, 8}) {
        for (int i = 0; i < 50; ++i) {
            const std::int64_t s = size(rng);
            for (const auto kind : {CollectiveKind::AllGather, CollectiveKind::AllToAll}) {
                const auto plan = kind == CollectiveKind::AllGather
                                      ? plan_all_gather(n, s, env.md)
                                      : plan_all_to_all(n, s, env.md);
                if (!validate_plan(plan, env.md).ok) ++failures;
                if (n < 2) continue;
                std::uniform_int_distribution<std::size_t> at(0, plan.transfers.size() - 1);
                auto dropped = plan;
                dropped.transfers.erase(dropped.transfers.begin() + at(rng));
                if (validate_plan(dropped, env.md).ok) ++failures;
                auto duplicated = plan;
                duplicated.transfers.push_back(duplicated.transfers[at(rng)]);
                if (validate_plan(duplicated, env.md).ok) ++failures;
                auto retargeted = plan;
                auto& t = retargeted.transfers[at(rng)];
                t.dst_offset = (t.dst_offset + 1) % (plan.buffers.dst_bytes - t.length + 1);
                if (validate_plan(retargeted, env.md).ok) ++failures;
            }
        }
    }
    report(4, "transfer plans valid, mutations rejected (400 plans)", failures == 0,
           std::to_string(failures) + " failures");
}

// 5. Zero-interference reduction: concurrent speedup equals the ideal, the
//    serial makespan is the exact sum.
void criterion_zero_interference(Env env) {
    apply_zero_interference(env.tables, env.params.penalties, env.params.eff, env.md);
    double worst = 0;
    bool serial_ok = true;
    for (const auto& s : env.scenarios) {
        const double tg = roofline_gemm_time(s.gemm, env.md, env.params.eff);
        const double tc =
            roofline_collective_time(s.collective, env.md, env.params.eff, true);
        const double ideal = ideal_speedup(tg, tc);
        for (Strategy st : kAllStrategies) {
            const auto tl = simulate(s, st, env.md, env.tables, env.params.penalties,
                                     env.params.eff);
            if (st == Strategy::Serial) {
                if (tl.makespan != tg + tc) serial_ok = false;
            } else {
                worst = std::max(worst, std::abs(tl.speedup - ideal) / ideal);
            }
        }
    }
    report(5, "zero-interference speedup equals ideal (rel 1e-12), serial exact",
           worst <= 1e-12 && serial_ok, "worst rel err " + fmt(worst));
}

// 6. Work conservation across the full sweep.
void criterion_conservation(const Env& env) {
    const std::vector<Strategy> all(std::begin(kAllStrategies), std::end(kAllStrategies));
    int rows = 0, bad = 0;
    for (const auto& s : env.scenarios)
        for (Strategy st : all) {
            const auto tl = simulate(s, st, env.md, env.tables, env.params.penalties,
                                     env.params.eff);
            ++rows;
            try {
                work_conservation_check(tl);
            } catch (const ValidationError&) {
                ++bad;
            }
        }
    report(6, "per-kernel progress equals work within 1e-9 over the sweep",
           rows == 210 && bad == 0,
           std::to_string(rows) + " rows, " + std::to_string(bad) + " violations");
}

// 7. Heuristic vs oracle: exact argmin agreement on randomized scenarios and
//    a 5% bound against the simulator's best candidate on the bundled set.
void criterion_heuristic(const Env& env) {
    std::mt19937 rng(20240815);
    std::uniform_int_distribution<std::int64_t> dim(64, 1 << 15);
    std::uniform_int_distribution<std::int64_t> mib(1, 4096);
    std::uniform_int_distribution<int> coin(0, 1);
    int argmin_mismatch = 0;
    for (int i = 0; i < 100; ++i) {
        C3Scenario s;
        s.id = "rand";
        s.source = "synthetic";
        s.gemm.tag = "g";
        s.gemm.m = dim(rng);
        s.gemm.n = dim(rng);
        s.gemm.k = dim(rng);
        s.gemm.dtype_bytes = 2;
        if (coin(rng)) s.gemm.boundedness_override = Boundedness::MemoryBound;
        s.collective.kind = coin(rng) ? CollectiveKind::AllGather : CollectiveKind::AllToAll;
        s.collective.payload_bytes = mib(rng) * (1 << 20) * 8;
        s.collective.n_ranks = 8;

        const auto sweep = partition_heuristic(s, env.md, env.tables, env.params.eff);
        // independent brute force over the same candidates
        const double ratio = machine_op_to_byte(env.md);
        const auto& gt = env.tables.at(gemm_kernel_class(s.gemm, ratio));
        const auto& ct = env.tables.at(comm_kernel_class(s.collective.kind));
        const double tg = roofline_gemm_time(s.gemm, env.md, env.params.eff);
        const double tc =
            roofline_collective_time(s.collective, env.md, env.params.eff, true);
        int best_c = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int c : {8, 16, 32, 64, 128, 256}) {
            const double v = std::max(tg * slowdown_at(gt, env.md.cus_per_gpu - c),
                                      tc * slowdown_at(ct, c));
            if (v < best) {
                best = v;
                best_c = c;
            }
        }
        if (sweep.plan.cus_comm != best_c) ++argmin_mismatch;
    }

    double worst_ratio = 0;
    std::string worst_row;
    for (const auto& s : env.scenarios) {
        const auto chosen = simulate(s, Strategy::C3Rp, env.md, env.tables,
                                     env.params.penalties, env.params.eff);
        double best = std::numeric_limits<double>::infinity();
        for (int c : {8, 16, 32, 64, 128, 256}) {
            SimOptions forced;
            forced.force_cus_comm = c;
            best = std::min(best, simulate(s, Strategy::C3Rp, env.md, env.tables,
                                           env.params.penalties, env.params.eff, forced)
                                      .makespan);
        }
        const double r = chosen.makespan / best;
        if (r > worst_ratio) {
            worst_ratio = r;
            worst_row = s.id + "/" + to_string(s.collective.kind);
        }
    }
    report(7, "heuristic matches brute force; within 5% of simulator best",
           argmin_mismatch == 0 && worst_ratio <= 1.05,
           std::to_string(argmin_mismatch) + " argmin mismatches, worst sim ratio " +
               fmt(worst_ratio) + " (" + worst_row + ")");
}

struct Means {
    std::map<Strategy, double> overall;
    double base_ag = 0, base_aa = 0;
};

Means collect_means(const Env& env) {
    const std::vector<Strategy> all(std::begin(kAllStrategies), std::end(kAllStrategies));
    const auto result = sweep(env.scenarios, all, env.md, env.tables, env.params.penalties,
                              env.params.eff);
    Means m;
    for (const auto& a : result.aggregates) {
        if (!a.collective && !a.taxonomy) m.overall[a.strategy] = a.mean_fraction_of_ideal;
    }
    int n_ag = 0, n_aa = 0;
    for (const auto& r : result.rows) {
        if (r.strategy != Strategy::C3Base) continue;
        if (r.collective == CollectiveKind::AllGather) {
            m.base_ag += r.fraction_of_ideal;
            ++n_ag;
        } else {
            m.base_aa += r.fraction_of_ideal;
            ++n_aa;
        }
    }
    m.base_ag /= n_ag;
    m.base_aa /= n_aa;
    return m;
}

// 8. Strategy ordering of the overall means plus the per-collective baseline
//    ordering.
void criterion_ordering(const Means& m) {
    const double base = m.overall.at(Strategy::C3Base);
    const double sp = m.overall.at(Strategy::C3Sp);
    const double rp = m.overall.at(Strategy::C3Rp);
    const double sp_rp = m.overall.at(Strategy::C3SpRp);
    const double conccl = m.overall.at(Strategy::Conccl);
    const double conccl_rp = m.overall.at(Strategy::ConcclRp);
    const bool pass = base < sp && base < rp && std::max({sp, rp, sp_rp}) < conccl &&
                      conccl <= conccl_rp && m.base_ag > m.base_aa;
    report(8, "strategy ordering of mean fraction-of-ideal", pass,
           "base=" + fmt(base) + " sp=" + fmt(sp) + " rp=" + fmt(rp) + " sp_rp=" +
               fmt(sp_rp) + " conccl=" + fmt(conccl) + " conccl_rp=" + fmt(conccl_rp) +
               " | base ag=" + fmt(m.base_ag) + " > aa=" + fmt(m.base_aa));
}

// 9. Calibrated means sit within +/-10 points of the reference percentages.
void criterion_windows(const Means& m) {
    struct Target {
        Strategy st;
        double center;
    };
    const Target targets[] = {{Strategy::C3Base, 0.21},
                              {Strategy::C3Sp, 0.42},
                              {Strategy::Conccl, 0.66},
                              {Strategy::ConcclRp, 0.72}};
    bool pass = true;
    std::string detail;
    for (const auto& t : targets) {
        const double v = m.overall.at(t.st);
        if (std::abs(v - t.center) > 0.10) pass = false;
        detail += to_string(t.st) + "=" + fmt(v) + " (target " + fmt(t.center) + ") ";
    }
    report(9, "calibrated means within 10 points of the reference", pass, detail);
}

// 10. DMA-vs-CU cost crossover: slower at small sizes, bounded below 32 MiB,
//     at par from 128 MiB up.
void criterion_crossover(const Env& env) {
    const auto ratio_at = [&](double mib) {
        const auto payload = static_cast<std::int64_t>(mib * (1 << 20));
        const std::int64_t chunk = payload / 8;
        const auto plan = plan_all_gather(8, chunk, env.md);
        CollectiveOp op;
        op.kind = CollectiveKind::AllGather;
        op.payload_bytes = chunk * 8;
        op.n_ranks = 8;
        const double dma = plan_cost(plan, env.md, env.params.eff).total;
        const double cu = roofline_collective_time(op, env.md, env.params.eff, true);
        return dma / cu;
    };
    const double at16 = ratio_at(16);
    double worst_small = 0;
    for (double mib : {1.0, 2.0, 4.0, 8.0, 16.0, 24.0, 31.0})
        worst_small = std::max(worst_small, ratio_at(mib));
    bool par_ok = true;
    std::string par;
    for (double mib : {128.0, 256.0, 896.0}) {
        const double r = ratio_at(mib);
        if (std::abs(r - 1.0) > 0.10) par_ok = false;
        par += fmt(r) + " ";
    }
    report(10, "DMA/CU cost ratio: >1 at 16 MiB, <=4.5 below 32 MiB, par at >=128 MiB",
           at16 > 1.0 && worst_small <= 4.5 && par_ok,
           "16MiB=" + fmt(at16) + " worst<32MiB=" + fmt(worst_small) + " par: " + par);
}

// 11. Byte-identical sweep output across two CLI runs.
void criterion_determinism(const Env&) {
    const fs::path dir =
        fs::temp_directory_path() / ("c3sim_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const fs::path data = C3SIM_DATA_DIR;
    const std::string common =
        std::string(C3SIM_CLI_PATH) + " sweep --machine " + (data / "mi300x-node.json").string() +
        " --dataset " + (data / "c3-dataset.json").string() + " --tables " +
        (data / "slowdown-tables.csv").string() + " --params " +
        (data / "default-params.json").string() + " --strategy all --out ";
    const auto a = dir / "a.csv";
    const auto b = dir / "b.csv";
    const int rc1 = std::system((common + a.string() + " >/dev/null 2>&1").c_str());
    const int rc2 = std::system((common + b.string() + " >/dev/null 2>&1").c_str());

    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const std::string ca = slurp(a), cb = slurp(b);
    const bool pass = WIFEXITED(rc1) && WEXITSTATUS(rc1) == 0 && WIFEXITED(rc2) &&
                      WEXITSTATUS(rc2) == 0 && !ca.empty() && ca == cb;
    fs::remove_all(dir);
    report(11, "two sweep runs produce byte-identical CSV", pass,
           std::to_string(ca.size()) + " bytes");
}

}  // namespace

int main() {
    try {
        Env env;
        criterion_taxonomy(env);
        criterion_ideal_bounds(env);
        criterion_fraction(env);
        criterion_plan_oracle(env);
        criterion_zero_interference(env);
        criterion_conservation(env);
        criterion_heuristic(env);
        const Means means = collect_means(env);
        criterion_ordering(means);
        criterion_windows(means);
        criterion_crossover(env);
        criterion_determinism(env);
    } catch (const std::exception& e) {
        std::cerr << "acceptance suite aborted: " << e.what() << "\n";
        return 2;
    }
    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
