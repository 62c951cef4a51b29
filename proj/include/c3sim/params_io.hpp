#pragma once

#include <filesystem>
#include <string>

#include "c3sim/interference.hpp"
#include "c3sim/workload.hpp"

namespace c3sim {

/// Tunable model parameters shipped alongside the machine file.
struct RunParams {
    EfficiencyParams eff;
    CoRunPenalty penalties = CoRunPenalty::defaults();
    bool freeze_phase2_allocation = false;
};

RunParams load_params(const std::string& json_text);
RunParams load_params_file(const std::filesystem::path& path);
std::string save_params(const RunParams& p);

}  // namespace c3sim
