#include <random>

#include "c3sim/errors.hpp"
#include "c3sim/taxonomy.hpp"
#include "doctest.h"

using namespace c3sim;

// Roofline times of the cb1 + 896 MiB all-gather pair on the default machine
// at efficiency 0.7, frozen from the closed-form arithmetic.
static constexpr double kTGemmCb1 = 0.001201415708140475;
static constexpr double kTComm896M = 0.00262144 + 5.0e-5;

TEST_CASE("classify_c3 basic labels") {
    CHECK(classify_c3(kTGemmCb1, kTComm896M).value == TaxonomyClass::CLong);
    CHECK(classify_c3(1.0, 1.0).value == TaxonomyClass::GCEqual);
    CHECK(classify_c3(1.151, 1.0).value == TaxonomyClass::GLong);
    CHECK(classify_c3(1.15, 1.0).value == TaxonomyClass::GCEqual);  // boundary is not G-long
    CHECK(classify_c3(1.0, 1.15).value == TaxonomyClass::GCEqual);
    CHECK(classify_c3(kTGemmCb1, kTComm896M).threshold == doctest::Approx(1.15));
}

TEST_CASE("classify_c3 rejects bad input") {
    CHECK_THROWS_AS(classify_c3(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(classify_c3(1.0, -1.0), ValidationError);
    CHECK_THROWS_AS(classify_c3(1.0, 1.0, 1.0), ValidationError);
}

TEST_CASE("classification is scale invariant and total") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> time(1e-6, 1e-1);
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    for (int i = 0; i < 500; ++i) {
        const double tg = time(rng), tc = time(rng), a = scale(rng);
        const auto lab = classify_c3(tg, tc).value;
        CHECK(classify_c3(a * tg, a * tc).value == lab);
        // each label implies its defining region
        if (lab == TaxonomyClass::GLong) CHECK(tg > 1.15 * tc);
        if (lab == TaxonomyClass::CLong) CHECK(tc > 1.15 * tg);
        if (lab == TaxonomyClass::GCEqual) {
            CHECK(tg <= 1.15 * tc);
            CHECK(tc <= 1.15 * tg);
        }
        const double i1 = ideal_speedup(tg, tc);
        CHECK(ideal_speedup(a * tg, a * tc) == doctest::Approx(i1).epsilon(1e-12));
    }
}

TEST_CASE("ideal speedup values and bounds") {
    CHECK(ideal_speedup(1.0, 1.0) == 2.0);
    CHECK(ideal_speedup(kTGemmCb1, kTComm896M) ==
          doctest::Approx(1.449725881225285).epsilon(1e-12));
    CHECK_THROWS_AS(ideal_speedup(0.0, 1.0), ValidationError);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> time(1e-9, 1e2);
    for (int i = 0; i < 1000; ++i) {
        const double tg = time(rng), tc = time(rng);
        const double ideal = ideal_speedup(tg, tc);
        CHECK(ideal > 1.0);
        CHECK(ideal <= 2.0);
        // GC-equal pairs cannot be far from balanced
        if (classify_c3(tg, tc).value == TaxonomyClass::GCEqual)
            CHECK(ideal >= 2.15 / 1.15 - 1e-12);
    }
}

TEST_CASE("fraction_of_ideal matches the reference arithmetic") {
    CHECK(std::abs(fraction_of_ideal(1.13, 1.60) - 0.2167) < 0.0005);
    CHECK(fraction_of_ideal(1.60, 1.60) == doctest::Approx(1.0));
    CHECK(fraction_of_ideal(1.0, 1.5) == 0.0);
    CHECK(fraction_of_ideal(0.8, 1.5) == 0.0);  // slowdown clamps to zero
    CHECK_THROWS_AS(fraction_of_ideal(1.2, 1.0), ValidationError);
}
