#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "c3sim/sim.hpp"

namespace c3sim {

struct MeasuredSample {
    std::string scenario_id;
    CollectiveKind collective;
    Strategy strategy;
    double measured_speedup = 0.0;
};

/// CSV with header scenario_id,collective,strategy,measured_speedup.
std::vector<MeasuredSample> load_measured_csv(const std::filesystem::path& path);
std::vector<MeasuredSample> parse_measured_csv(const std::string& csv_text);

struct FitResult {
    CoRunPenalty penalties;
    double rms_residual = 0.0;
    int iterations = 0;
};

/// Least-squares fit of the eight co-run penalty factors against measured
/// speedups, Levenberg-Marquardt with a numeric Jacobian. Refuses fewer than
/// three samples or samples covering a single strategy.
FitResult fit_penalties(const std::vector<C3Scenario>& scenarios,
                        const std::vector<MeasuredSample>& samples,
                        const MachineDescriptor& md, const SlowdownTableSet& tables,
                        const EfficiencyParams& params, const CoRunPenalty& initial);

}  // namespace c3sim
