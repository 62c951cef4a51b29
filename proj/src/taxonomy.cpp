#include "c3sim/taxonomy.hpp"

#include <algorithm>

#include "c3sim/errors.hpp"

namespace c3sim {

TaxonomyLabel classify_c3(double t_gemm, double t_comm, double threshold) {
    if (!(t_gemm > 0) || !(t_comm > 0))
        throw ValidationError("classify_c3: times must be positive");
    if (!(threshold > 1)) throw ValidationError("classify_c3: threshold must be > 1");
    TaxonomyClass value;
    if (t_gemm > threshold * t_comm)
        value = TaxonomyClass::GLong;
    else if (t_comm > threshold * t_gemm)
        value = TaxonomyClass::CLong;
    else
        value = TaxonomyClass::GCEqual;
    return {value, threshold};
}

double ideal_speedup(double t_gemm, double t_comm) {
    if (!(t_gemm > 0) || !(t_comm > 0))
        throw ValidationError("ideal_speedup: times must be positive");
    return (t_gemm + t_comm) / std::max(t_gemm, t_comm);
}

double fraction_of_ideal(double achieved_speedup, double ideal) {
    if (!(ideal > 1)) throw ValidationError("fraction_of_ideal: ideal must be > 1");
    if (achieved_speedup < 1.0) return 0.0;
    return (achieved_speedup - 1.0) / (ideal - 1.0);
}

std::string to_string(TaxonomyClass c) {
    switch (c) {
        case TaxonomyClass::GLong: return "G-long";
        case TaxonomyClass::CLong: return "C-long";
        case TaxonomyClass::GCEqual: return "GC-equal";
    }
    return "?";
}

TaxonomyClass taxonomy_from_string(const std::string& s) {
    if (s == "G-long") return TaxonomyClass::GLong;
    if (s == "C-long") return TaxonomyClass::CLong;
    if (s == "GC-equal") return TaxonomyClass::GCEqual;
    throw ValidationError("unknown taxonomy label '" + s + "'");
}

}  // namespace c3sim
