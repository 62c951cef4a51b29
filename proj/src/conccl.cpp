#include "c3sim/conccl.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "c3sim/errors.hpp"
#include "json.hpp"

namespace c3sim {

namespace {

void check_plan_args(int n_ranks, std::int64_t chunk_bytes, const MachineDescriptor& md) {
    if (n_ranks < 1) throw ValidationError("transfer plan: n_ranks must be >= 1");
    if (n_ranks > md.gpus_per_node)
        throw ValidationError("transfer plan: n_ranks exceeds gpus_per_node");
    if (n_ranks > 1 && chunk_bytes <= 0)
        throw ValidationError("transfer plan: chunk_bytes must be > 0");
}

}  // namespace

TransferPlan plan_all_gather(int n_ranks, std::int64_t chunk_bytes,
                             const MachineDescriptor& md) {
    check_plan_args(n_ranks, chunk_bytes, md);
    TransferPlan plan;
    plan.kind = CollectiveKind::AllGather;
    plan.n_ranks = n_ranks;
    plan.chunk_bytes = chunk_bytes;
    plan.buffers = {chunk_bytes, chunk_bytes * n_ranks};
    if (n_ranks == 1) return plan;

    const int engines = md.dma_engines_per_gpu;
    for (int g = 0; g < n_ranks; ++g) {
        int peer_index = 0;
        std::map<int, int> seq_on_engine;
        for (int p = 0; p < n_ranks; ++p) {
            if (p == g) continue;  // self chunk already resident
            Transfer t;
            t.src_gpu = g;
            t.dst_gpu = p;
            t.src_offset = 0;
            t.dst_offset = static_cast<std::int64_t>(g) * chunk_bytes;
            t.length = chunk_bytes;
            t.engine_id = peer_index % engines;
            t.seq = seq_on_engine[t.engine_id]++;
            plan.transfers.push_back(t);
            ++peer_index;
        }
    }
    return plan;
}

TransferPlan plan_all_to_all(int n_ranks, std::int64_t per_peer_bytes,
                             const MachineDescriptor& md) {
    check_plan_args(n_ranks, per_peer_bytes, md);
    TransferPlan plan;
    plan.kind = CollectiveKind::AllToAll;
    plan.n_ranks = n_ranks;
    plan.chunk_bytes = per_peer_bytes;
    plan.buffers = {per_peer_bytes * n_ranks, per_peer_bytes * n_ranks};
    if (n_ranks == 1) return plan;

    const int engines = md.dma_engines_per_gpu;
    for (int g = 0; g < n_ranks; ++g) {
        int peer_index = 0;
        std::map<int, int> seq_on_engine;
        for (int p = 0; p < n_ranks; ++p) {
            if (p == g) continue;  // self slot copied locally
            Transfer t;
            t.src_gpu = g;
            t.dst_gpu = p;
            t.src_offset = static_cast<std::int64_t>(p) * per_peer_bytes;
            t.dst_offset = static_cast<std::int64_t>(g) * per_peer_bytes;
            t.length = per_peer_bytes;
            t.engine_id = peer_index % engines;
            t.seq = seq_on_engine[t.engine_id]++;
            plan.transfers.push_back(t);
            ++peer_index;
        }
    }
    return plan;
}

namespace {

// A contiguous run of destination bytes with its source position. Kept sorted
// and non-overlapping per destination rank.
struct Segment {
    std::int64_t dst_begin, dst_end;  // [begin, end)
    int src_gpu;
    std::int64_t src_begin;
};

std::string slot_name(int rank, std::int64_t offset, std::int64_t chunk) {
    return "(rank " + std::to_string(rank) + ", slot " + std::to_string(offset / chunk) + ")";
}

}  // namespace

PlanCheck validate_plan(const TransferPlan& plan, const MachineDescriptor& md) {
    const auto fail = [](std::string msg) { return PlanCheck{false, std::move(msg)}; };

    if (plan.n_ranks < 1) return fail("n_ranks must be >= 1");
    if (plan.n_ranks > md.gpus_per_node) return fail("n_ranks exceeds gpus_per_node");
    const std::int64_t expected_count =
        plan.n_ranks >= 2 ? static_cast<std::int64_t>(plan.n_ranks) * (plan.n_ranks - 1) : 0;
    if (static_cast<std::int64_t>(plan.transfers.size()) != expected_count)
        return fail("transfer count " + std::to_string(plan.transfers.size()) +
                    " != n*(n-1) = " + std::to_string(expected_count));
    if (plan.n_ranks == 1) return {};
    if (plan.chunk_bytes <= 0) return fail("chunk_bytes must be > 0");
    const std::int64_t want_src_bytes = plan.kind == CollectiveKind::AllGather
                                            ? plan.chunk_bytes
                                            : plan.chunk_bytes * plan.n_ranks;
    if (plan.buffers.src_bytes != want_src_bytes ||
        plan.buffers.dst_bytes != plan.chunk_bytes * plan.n_ranks)
        return fail("buffer extents do not match kind/chunk/n_ranks");

    // Structural invariants.
    std::map<std::pair<int, int>, std::vector<int>> seqs;  // (gpu, engine) -> seq list
    for (const auto& t : plan.transfers) {
        if (t.src_gpu == t.dst_gpu) return fail("self transfer on rank " + std::to_string(t.src_gpu));
        if (t.src_gpu < 0 || t.src_gpu >= plan.n_ranks || t.dst_gpu < 0 ||
            t.dst_gpu >= plan.n_ranks)
            return fail("rank id out of range");
        if (t.length <= 0) return fail("non-positive transfer length");
        if (t.engine_id < 0 || t.engine_id >= md.dma_engines_per_gpu)
            return fail("engine_id out of range");
        if (t.src_offset < 0 || t.src_offset + t.length > plan.buffers.src_bytes)
            return fail("source range out of bounds on rank " + std::to_string(t.src_gpu));
        if (t.dst_offset < 0 || t.dst_offset + t.length > plan.buffers.dst_bytes)
            return fail("destination range out of bounds on rank " + std::to_string(t.dst_gpu));
        seqs[{t.src_gpu, t.engine_id}].push_back(t.seq);
    }
    for (auto& [key, list] : seqs) {
        std::sort(list.begin(), list.end());
        for (std::size_t i = 0; i < list.size(); ++i)
            if (list[i] != static_cast<int>(i))
                return fail("seq numbers not contiguous from 0 on gpu " +
                            std::to_string(key.first) + " engine " + std::to_string(key.second));
    }

    // Replay writes per destination rank, exact byte intervals.
    const std::int64_t chunk = plan.chunk_bytes;
    std::vector<std::vector<Segment>> written(plan.n_ranks);
    for (const auto& t : plan.transfers) {
        auto& segs = written[t.dst_gpu];
        Segment s{t.dst_offset, t.dst_offset + t.length, t.src_gpu, t.src_offset};
        for (const auto& other : segs)
            if (s.dst_begin < other.dst_end && other.dst_begin < s.dst_end)
                return fail("overlapping writes at " + slot_name(t.dst_gpu, s.dst_begin, chunk));
        segs.push_back(s);
    }

    // The resident region needs no transfer but must not be overwritten:
    // all-gather keeps the own chunk in slot g, all-to-all the self slot.
    for (int r = 0; r < plan.n_ranks; ++r) {
        const std::int64_t self_begin = static_cast<std::int64_t>(r) * chunk;
        for (const auto& s : written[r])
            if (s.dst_begin < self_begin + chunk && self_begin < s.dst_end)
                return fail("write into resident slot " + slot_name(r, self_begin, chunk));
    }

    // Post-state: every non-self slot fully covered from the right source.
    for (int r = 0; r < plan.n_ranks; ++r) {
        auto segs = written[r];
        std::sort(segs.begin(), segs.end(),
                  [](const Segment& a, const Segment& b) { return a.dst_begin < b.dst_begin; });
        std::size_t i = 0;
        for (int slot = 0; slot < plan.n_ranks; ++slot) {
            if (slot == r) continue;
            std::int64_t cursor = static_cast<std::int64_t>(slot) * chunk;
            const std::int64_t slot_end = cursor + chunk;
            while (cursor < slot_end) {
                if (i >= segs.size() || segs[i].dst_begin != cursor)
                    return fail("incomplete coverage at " + slot_name(r, cursor, chunk));
                const Segment& s = segs[i];
                if (s.dst_end > slot_end)
                    return fail("write crosses slot boundary at " + slot_name(r, cursor, chunk));
                // Which bytes must land here: all-gather slot g holds rank g's
                // chunk; all-to-all slot g holds rank g's send-slot r.
                const int want_src = slot;
                const std::int64_t want_off =
                    plan.kind == CollectiveKind::AllGather
                        ? cursor - slot * chunk
                        : static_cast<std::int64_t>(r) * chunk + (cursor - slot * chunk);
                if (s.src_gpu != want_src || s.src_begin != want_off)
                    return fail("wrong source data at " + slot_name(r, cursor, chunk));
                cursor = s.dst_end;
                ++i;
            }
        }
        if (i != segs.size()) return fail("unexpected extra write on rank " + std::to_string(r));
    }
    return {};
}

PlanCost plan_cost(const TransferPlan& plan, const MachineDescriptor& md,
                   const EfficiencyParams& params) {
    PlanCost cost;
    cost.per_engine.assign(md.dma_engines_per_gpu, 0.0);
    if (plan.transfers.empty()) return cost;

    const double link_bw = params.efficiency * md.link_bandwidth_unidir;
    std::map<std::pair<int, int>, double> engine_free;  // (gpu, engine)
    std::map<std::pair<int, int>, double> link_free;    // (src, dst)

    double last_end = 0.0;
    double max_wire = 0.0;
    for (std::size_t i = 0; i < plan.transfers.size(); ++i) {
        const auto& t = plan.transfers[i];
        const double ready = static_cast<double>(i) * md.cpu_launch_overhead;
        const double wire = static_cast<double>(t.length) / link_bw;
        max_wire = std::max(max_wire, wire);
        double start = ready;
        start = std::max(start, engine_free[{t.src_gpu, t.engine_id}]);
        start = std::max(start, link_free[{t.src_gpu, t.dst_gpu}]);
        const double end = start + wire;
        engine_free[{t.src_gpu, t.engine_id}] = end;
        link_free[{t.src_gpu, t.dst_gpu}] = end;
        cost.per_engine[t.engine_id] = std::max(cost.per_engine[t.engine_id], end);
        last_end = std::max(last_end, end);
    }
    cost.wire = max_wire;
    cost.total = last_end + md.dma_sync_overhead;
    return cost;
}

std::string to_json(const TransferPlan& plan) {
    nlohmann::json j;
    j["kind"] = to_string(plan.kind);
    j["n_ranks"] = plan.n_ranks;
    j["chunk_bytes"] = plan.chunk_bytes;
    j["src_buffer_bytes"] = plan.buffers.src_bytes;
    j["dst_buffer_bytes"] = plan.buffers.dst_bytes;
    auto& arr = j["transfers"] = nlohmann::json::array();
    for (const auto& t : plan.transfers) {
        arr.push_back({{"src", t.src_gpu},
                       {"dst", t.dst_gpu},
                       {"src_off", t.src_offset},
                       {"dst_off", t.dst_offset},
                       {"len", t.length},
                       {"engine", t.engine_id},
                       {"seq", t.seq}});
    }
    return j.dump(2) + "\n";
}

TransferPlan plan_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("transfer plan: parse failure: ") + e.what());
    }
    TransferPlan plan;
    try {
        plan.kind = collective_kind_from_string(j.at("kind").get<std::string>());
        plan.n_ranks = j.at("n_ranks").get<int>();
        plan.chunk_bytes = j.at("chunk_bytes").get<std::int64_t>();
        plan.buffers.src_bytes = j.at("src_buffer_bytes").get<std::int64_t>();
        plan.buffers.dst_bytes = j.at("dst_buffer_bytes").get<std::int64_t>();
        for (const auto& item : j.at("transfers")) {
            Transfer t;
            t.src_gpu = item.at("src").get<int>();
            t.dst_gpu = item.at("dst").get<int>();
            t.src_offset = item.at("src_off").get<std::int64_t>();
            t.dst_offset = item.at("dst_off").get<std::int64_t>();
            t.length = item.at("len").get<std::int64_t>();
            t.engine_id = item.at("engine").get<int>();
            t.seq = item.at("seq").get<int>();
            plan.transfers.push_back(t);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("transfer plan: bad field: ") + e.what());
    }
    return plan;
}

}  // namespace c3sim
