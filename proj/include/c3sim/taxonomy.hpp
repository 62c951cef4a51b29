#pragma once

#include <string>

namespace c3sim {

enum class TaxonomyClass { GLong, CLong, GCEqual };

struct TaxonomyLabel {
    TaxonomyClass value;
    double threshold;  // > 1
};

/// G-long iff t_gemm > threshold*t_comm, C-long iff t_comm > threshold*t_gemm,
/// GC-equal otherwise. Strict inequalities: the boundary belongs to GC-equal.
TaxonomyLabel classify_c3(double t_gemm, double t_comm, double threshold = 1.15);

/// (t_gemm + t_comm) / max(t_gemm, t_comm); always in (1, 2].
double ideal_speedup(double t_gemm, double t_comm);

/// Excess-speedup ratio (achieved - 1) / (ideal - 1), clamped to 0 when the
/// concurrent run is a slowdown. Requires ideal > 1.
double fraction_of_ideal(double achieved_speedup, double ideal);

std::string to_string(TaxonomyClass c);
TaxonomyClass taxonomy_from_string(const std::string& s);

}  // namespace c3sim
