#include "c3sim/params_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "c3sim/errors.hpp"
#include "json.hpp"

namespace c3sim {

using nlohmann::json;

RunParams load_params(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("params: parse failure: ") + e.what());
    }
    static const std::set<std::string> known = {"efficiency", "comm_launch_overhead_cu",
                                                "co_run_penalty",
                                                "freeze_phase2_allocation"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ValidationError("params: unknown field '" + key + "'");

    RunParams p;
    try {
        p.eff.efficiency = j.at("efficiency").get<double>();
        p.eff.comm_launch_overhead_cu = j.at("comm_launch_overhead_cu").get<double>();
        if (j.contains("freeze_phase2_allocation"))
            p.freeze_phase2_allocation = j.at("freeze_phase2_allocation").get<bool>();
        if (j.contains("co_run_penalty")) {
            const auto& pen = j.at("co_run_penalty");
            for (const auto& [cls_name, entry] : pen.items()) {
                const KernelClass cls = kernel_class_from_string(cls_name);
                p.penalties.set(cls, CommBackend::CU, entry.at("cu").get<double>());
                p.penalties.set(cls, CommBackend::DMA, entry.at("dma").get<double>());
            }
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("params: bad field: ") + e.what());
    }
    validate(p.eff);
    validate(p.penalties);
    return p;
}

RunParams load_params_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_params(ss.str());
}

std::string save_params(const RunParams& p) {
    json pen;
    for (int c = 0; c < kNumKernelClasses; ++c) {
        const auto cls = static_cast<KernelClass>(c);
        pen[to_string(cls)] = {{"cu", p.penalties.get(cls, CommBackend::CU)},
                               {"dma", p.penalties.get(cls, CommBackend::DMA)}};
    }
    json j;
    j["efficiency"] = p.eff.efficiency;
    j["comm_launch_overhead_cu"] = p.eff.comm_launch_overhead_cu;
    j["co_run_penalty"] = pen;
    j["freeze_phase2_allocation"] = p.freeze_phase2_allocation;
    return j.dump(2) + "\n";
}

}  // namespace c3sim
