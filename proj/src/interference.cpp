#include "c3sim/interference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "c3sim/errors.hpp"

namespace c3sim {

void validate(const SlowdownTable& t, int min_cu_grain) {
    const std::string cls = to_string(t.kernel_class);
    if (t.points.empty()) throw ValidationError("slowdown table " + cls + ": empty");
    for (std::size_t i = 0; i < t.points.size(); ++i) {
        const auto& p = t.points[i];
        if (!(p.slowdown > 0))
            throw ValidationError("slowdown table " + cls + ": slowdown must be > 0 at cus=" +
                                  std::to_string(p.cus));
        if (p.cus < 1)
            throw ValidationError("slowdown table " + cls + ": cus must be >= 1");
        if (min_cu_grain > 1 && p.cus % min_cu_grain != 0)
            throw ValidationError("slowdown table " + cls + ": cus=" + std::to_string(p.cus) +
                                  " is not a multiple of the CU grain");
        if (i > 0 && t.points[i - 1].cus >= p.cus)
            throw ValidationError("slowdown table " + cls + ": cus values must be strictly increasing");
    }
    if (t.points.back().slowdown != 1.0)
        throw ValidationError("slowdown table " + cls + ": slowdown at max CUs must be 1.0");
}

double slowdown_at(const SlowdownTable& t, int cus) {
    if (t.points.empty()) throw ValidationError("slowdown_at: empty table");
    if (cus <= t.points.front().cus) return t.points.front().slowdown;
    if (cus >= t.points.back().cus) return t.points.back().slowdown;
    for (std::size_t i = 1; i < t.points.size(); ++i) {
        const auto& lo = t.points[i - 1];
        const auto& hi = t.points[i];
        if (cus <= hi.cus) {
            const double f = static_cast<double>(cus - lo.cus) /
                             static_cast<double>(hi.cus - lo.cus);
            return lo.slowdown + f * (hi.slowdown - lo.slowdown);
        }
    }
    return t.points.back().slowdown;  // unreachable
}

int comm_saturation_cus(CollectiveKind kind) {
    return kind == CollectiveKind::AllGather ? 32 : 64;
}

SlowdownTable default_comm_table(CollectiveKind kind, const MachineDescriptor& md) {
    SlowdownTable t;
    t.kernel_class = comm_kernel_class(kind);
    const int grain = std::max(1, md.min_cu_grain);
    // Machines smaller than the saturation point normalize at full allocation.
    int sat = std::min(comm_saturation_cus(kind), md.cus_per_gpu);
    sat -= sat % grain;
    if (sat < grain) sat = grain;
    for (int c = grain; c < sat; c += grain)
        t.points.push_back({c, static_cast<double>(sat) / c});
    t.points.push_back({sat, 1.0});
    if (md.cus_per_gpu > sat) t.points.push_back({md.cus_per_gpu, 1.0});
    validate(t, md.min_cu_grain);
    return t;
}

std::vector<double> shared_memory_factor(const std::vector<double>& demands,
                                         double effective_peak) {
    if (!(effective_peak > 0))
        throw ValidationError("shared_memory_factor: effective_peak must be > 0");
    const double total = std::accumulate(demands.begin(), demands.end(), 0.0);
    const double factor = total <= effective_peak ? 1.0 : total / effective_peak;
    return std::vector<double>(demands.size(), factor);
}

const SlowdownTable& SlowdownTableSet::at(KernelClass c) const {
    return tables[static_cast<int>(c)];
}

SlowdownTable& SlowdownTableSet::at(KernelClass c) {
    return tables[static_cast<int>(c)];
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

SlowdownTableSet parse_slowdown_tables(const std::string& csv_text, int min_cu_grain) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "kernel_class,cus,slowdown")
        throw ValidationError("slowdown tables: expected header kernel_class,cus,slowdown");

    SlowdownTableSet set;
    std::array<bool, kNumKernelClasses> present{};
    for (int i = 0; i < kNumKernelClasses; ++i)
        set.tables[i].kernel_class = static_cast<KernelClass>(i);

    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto row = trim(line);
        if (row.empty()) continue;
        std::istringstream cells(row);
        std::string cls_s, cus_s, slow_s, extra;
        if (!std::getline(cells, cls_s, ',') || !std::getline(cells, cus_s, ',') ||
            !std::getline(cells, slow_s, ','))
            throw ValidationError("slowdown tables: malformed row at line " +
                                  std::to_string(lineno));
        if (std::getline(cells, extra, ','))
            throw ValidationError("slowdown tables: too many cells at line " +
                                  std::to_string(lineno));
        const KernelClass cls = kernel_class_from_string(trim(cls_s));
        int cus = 0;
        double slow = 0;
        try {
            cus = std::stoi(trim(cus_s));
            slow = std::stod(trim(slow_s));
        } catch (const std::exception&) {
            throw ValidationError("slowdown tables: bad number at line " +
                                  std::to_string(lineno));
        }
        set.at(cls).points.push_back({cus, slow});
        present[static_cast<int>(cls)] = true;
    }
    for (int i = 0; i < kNumKernelClasses; ++i) {
        if (!present[i])
            throw ValidationError("slowdown tables: missing class " +
                                  to_string(static_cast<KernelClass>(i)));
        validate(set.tables[i], min_cu_grain);
    }
    return set;
}

SlowdownTableSet load_slowdown_tables(const std::filesystem::path& path, int min_cu_grain) {
    return parse_slowdown_tables(read_file(path), min_cu_grain);
}

std::string save_slowdown_tables(const SlowdownTableSet& set) {
    std::ostringstream out;
    out << "kernel_class,cus,slowdown\n";
    char buf[64];
    for (const auto& t : set.tables) {
        for (const auto& p : t.points) {
            std::snprintf(buf, sizeof buf, "%.17g", p.slowdown);
            out << to_string(t.kernel_class) << ',' << p.cus << ',' << buf << '\n';
        }
    }
    return out.str();
}

double CoRunPenalty::get(KernelClass c, CommBackend b) const {
    return factor[static_cast<int>(c)][static_cast<int>(b)];
}

void CoRunPenalty::set(KernelClass c, CommBackend b, double v) {
    factor[static_cast<int>(c)][static_cast<int>(b)] = v;
}

CoRunPenalty CoRunPenalty::defaults() {
    // Calibrated against the bundled scenario sweep; CU column first.
    CoRunPenalty p;
    p.set(KernelClass::GemmComputeBound, CommBackend::CU, 1.02);
    p.set(KernelClass::GemmComputeBound, CommBackend::DMA, 1.02);
    p.set(KernelClass::GemmMemoryBound, CommBackend::CU, 1.08);
    p.set(KernelClass::GemmMemoryBound, CommBackend::DMA, 1.05);
    p.set(KernelClass::AllGather, CommBackend::CU, 1.40);
    p.set(KernelClass::AllGather, CommBackend::DMA, 1.35);
    p.set(KernelClass::AllToAll, CommBackend::CU, 3.50);
    p.set(KernelClass::AllToAll, CommBackend::DMA, 1.80);
    return p;
}

CoRunPenalty CoRunPenalty::ones() {
    CoRunPenalty p;
    for (auto& row : p.factor) row = {1.0, 1.0};
    return p;
}

void validate(const CoRunPenalty& p) {
    for (int c = 0; c < kNumKernelClasses; ++c) {
        const double cu = p.factor[c][static_cast<int>(CommBackend::CU)];
        const double dma = p.factor[c][static_cast<int>(CommBackend::DMA)];
        const std::string cls = to_string(static_cast<KernelClass>(c));
        if (!(cu >= 1.0) || !(dma >= 1.0))
            throw ValidationError("co-run penalty " + cls + ": factors must be >= 1");
        if (dma > cu)
            throw ValidationError("co-run penalty " + cls + ": DMA factor must not exceed CU factor");
    }
}

KernelClass comm_kernel_class(CollectiveKind kind) {
    return kind == CollectiveKind::AllGather ? KernelClass::AllGather : KernelClass::AllToAll;
}

KernelClass gemm_kernel_class(const GemmKernel& g, double machine_ratio) {
    return classify_gemm_boundedness(g, machine_ratio) == Boundedness::ComputeBound
               ? KernelClass::GemmComputeBound
               : KernelClass::GemmMemoryBound;
}

std::string to_string(KernelClass c) {
    switch (c) {
        case KernelClass::GemmComputeBound: return "gemm-compute-bound";
        case KernelClass::GemmMemoryBound: return "gemm-memory-bound";
        case KernelClass::AllGather: return "all-gather";
        case KernelClass::AllToAll: return "all-to-all";
    }
    return "?";
}

KernelClass kernel_class_from_string(const std::string& s) {
    if (s == "gemm-compute-bound") return KernelClass::GemmComputeBound;
    if (s == "gemm-memory-bound") return KernelClass::GemmMemoryBound;
    if (s == "all-gather") return KernelClass::AllGather;
    if (s == "all-to-all") return KernelClass::AllToAll;
    throw ValidationError("unknown kernel class '" + s + "'");
}

}  // namespace c3sim
