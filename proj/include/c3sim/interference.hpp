#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "c3sim/machine.hpp"
#include "c3sim/workload.hpp"

namespace c3sim {

enum class KernelClass { GemmComputeBound, GemmMemoryBound, AllGather, AllToAll };
enum class CommBackend { CU, DMA };

inline constexpr int kNumKernelClasses = 4;

struct SlowdownPoint {
    int cus;
    double slowdown;  // relative to full-allocation isolated time
};

/// Per-class mapping from available CUs to slowdown. Points are strictly
/// increasing in cus; slowdown at the largest point is 1.0.
struct SlowdownTable {
    KernelClass kernel_class;
    std::vector<SlowdownPoint> points;
};

void validate(const SlowdownTable& t, int min_cu_grain = 1);

/// Linear interpolation between bracketing points, clamped to the endpoint
/// values outside the covered range. Throws on an empty table.
double slowdown_at(const SlowdownTable& t, int cus);

/// CUs beyond which a CU-based collective gains nothing: all-gather 32,
/// all-to-all 64.
int comm_saturation_cus(CollectiveKind kind);

/// Bandwidth-proportional model: below saturation slowdown = sat/cus, at or
/// above saturation 1.0. Knots at every min_cu_grain multiple up to
/// saturation plus the full-machine point.
SlowdownTable default_comm_table(CollectiveKind kind, const MachineDescriptor& md);

/// Proportional fair sharing: if the summed demands fit in effective_peak all
/// factors are 1.0, otherwise every kernel stretches by sum/effective_peak.
std::vector<double> shared_memory_factor(const std::vector<double>& demands,
                                         double effective_peak);

struct SlowdownTableSet {
    std::array<SlowdownTable, kNumKernelClasses> tables;

    const SlowdownTable& at(KernelClass c) const;
    SlowdownTable& at(KernelClass c);
};

/// CSV with header kernel_class,cus,slowdown. Requires all four classes.
SlowdownTableSet load_slowdown_tables(const std::filesystem::path& path,
                                      int min_cu_grain = 1);
SlowdownTableSet parse_slowdown_tables(const std::string& csv_text,
                                       int min_cu_grain = 1);
std::string save_slowdown_tables(const SlowdownTableSet& set);

/// Residual co-run interference applied to each kernel's rate while both
/// kernels are active, keyed by the kernel's class and the backend the
/// communication runs on. DMA-backend factors never exceed CU-backend ones
/// for the same class.
struct CoRunPenalty {
    std::array<std::array<double, 2>, kNumKernelClasses> factor;

    double get(KernelClass c, CommBackend b) const;
    void set(KernelClass c, CommBackend b, double v);
    static CoRunPenalty defaults();
    static CoRunPenalty ones();
};

void validate(const CoRunPenalty& p);

KernelClass comm_kernel_class(CollectiveKind kind);
KernelClass gemm_kernel_class(const GemmKernel& g, double machine_ratio);

std::string to_string(KernelClass c);
KernelClass kernel_class_from_string(const std::string& s);

}  // namespace c3sim
