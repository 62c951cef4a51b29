#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "c3sim/machine.hpp"
#include "c3sim/taxonomy.hpp"

namespace c3sim {

enum class CollectiveKind { AllGather, AllToAll };
enum class Boundedness { ComputeBound, MemoryBound };
enum class CommBoundedness { LatencyBound, BandwidthBound };

struct GemmKernel {
    std::string tag;
    std::int64_t m = 1, n = 1, k = 1;  // elements
    int dtype_bytes = 2;
    std::optional<double> measured_op_to_byte;  // ops/byte from profiling
    std::optional<double> measured_time;        // seconds
    std::optional<Boundedness> boundedness_override;
};

struct CollectiveOp {
    CollectiveKind kind = CollectiveKind::AllGather;
    // All-gather: total gathered result per rank (each rank contributes 1/n).
    // All-to-all: each rank's total send buffer (1/n per peer). Both give the
    // same per-link volume on a fully connected node.
    std::int64_t payload_bytes = 0;
    int n_ranks = 1;
    std::optional<double> measured_time;
};

struct C3Scenario {
    std::string id;  // e.g. "cb1_896M"
    GemmKernel gemm;
    CollectiveOp collective;
    std::string source;  // model name or "synthetic"
    std::optional<TaxonomyClass> expected_taxonomy;
};

struct EfficiencyParams {
    double efficiency = 0.7;                 // fraction of peak throughputs
    double comm_launch_overhead_cu = 50e-6;  // CU-based collective fixed cost
};

void validate(const GemmKernel& g);
void validate(const CollectiveOp& c);
void validate(const EfficiencyParams& p);

double gemm_flops(const GemmKernel& g);      // 2*m*n*k
double gemm_min_bytes(const GemmKernel& g);  // cold read/write lower bound

Boundedness classify_gemm_boundedness(const GemmKernel& g, double machine_ratio);
CommBoundedness classify_collective_boundedness(const CollectiveOp& c,
                                                const MachineDescriptor& md,
                                                const EfficiencyParams& p);

double roofline_gemm_time(const GemmKernel& g, const MachineDescriptor& md,
                          const EfficiencyParams& p);
// Direct-algorithm wire model: payload/n_ranks per link, concurrently over
// distinct links. n_ranks == 1 is a no-op (0 s).
double roofline_collective_time(const CollectiveOp& c, const MachineDescriptor& md,
                                const EfficiencyParams& p, bool include_overhead);

int estimate_workgroups(const GemmKernel& g, int tile = 128);
int estimate_workgroups(const CollectiveOp& c);

double gemm_bandwidth_demand(const GemmKernel& g, const MachineDescriptor& md,
                             const EfficiencyParams& p);
double collective_bandwidth_demand(const CollectiveOp& c, const MachineDescriptor& md,
                                   const EfficiencyParams& p);

std::vector<C3Scenario> load_dataset(const std::filesystem::path& path);
std::vector<C3Scenario> parse_dataset(const std::string& json_text);

/// One transformer layer's forward GEMMs plus per-weight FSDP all-gathers.
struct ModelConfig {
    std::int64_t hidden = 0;
    std::int64_t ffn = 0;
    std::int64_t tokens = 0;
    int dtype_bytes = 2;
    int shards = 1;
};

struct ModelWorkload {
    std::vector<GemmKernel> gemms;
    std::vector<CollectiveOp> all_gathers;  // empty when shards == 1
};

ModelWorkload ingest_model(const ModelConfig& cfg);

std::string to_string(CollectiveKind k);
CollectiveKind collective_kind_from_string(const std::string& s);
std::string to_string(Boundedness b);
std::string to_string(CommBoundedness b);

}  // namespace c3sim
