#include <sstream>

#include "c3sim/errors.hpp"
#include "c3sim/interference.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace c3sim;

namespace {

SlowdownTableSet bundled_tables() {
    return load_slowdown_tables(testsupport::data_dir() / "slowdown-tables.csv", 8);
}

}  // namespace

TEST_CASE("slowdown lookup on the shipped tables") {
    const auto set = bundled_tables();
    const auto& cb = set.at(KernelClass::GemmComputeBound);
    CHECK(slowdown_at(cb, 304) == 1.0);
    CHECK(slowdown_at(cb, 240) == doctest::Approx(1.22));
    const auto& mb = set.at(KernelClass::GemmMemoryBound);
    CHECK(slowdown_at(mb, 296) == doctest::Approx(0.97));
    CHECK(slowdown_at(mb, 304) == 1.0);

    // piecewise linear: midpoint of (240, 1.22)-(272, 1.06)
    CHECK(slowdown_at(cb, 256) == doctest::Approx((1.22 + 1.06) / 2).epsilon(1e-12));
    // clamped outside the covered range
    CHECK(slowdown_at(cb, 4) == doctest::Approx(38.0));
    CHECK(slowdown_at(cb, 10000) == 1.0);

    SlowdownTable empty;
    empty.kernel_class = KernelClass::AllGather;
    CHECK_THROWS_AS(slowdown_at(empty, 8), ValidationError);
}

TEST_CASE("communication saturation points") {
    CHECK(comm_saturation_cus(CollectiveKind::AllGather) == 32);
    CHECK(comm_saturation_cus(CollectiveKind::AllToAll) == 64);
}

TEST_CASE("default communication tables") {
    const auto md = testsupport::mi300x();
    const auto ag = default_comm_table(CollectiveKind::AllGather, md);
    CHECK(slowdown_at(ag, 8) == doctest::Approx(4.0));
    CHECK(slowdown_at(ag, 16) == doctest::Approx(2.0));
    CHECK(slowdown_at(ag, 32) == 1.0);
    CHECK(slowdown_at(ag, 304) == 1.0);

    const auto aa = default_comm_table(CollectiveKind::AllToAll, md);
    CHECK(slowdown_at(aa, 64) == 1.0);
    CHECK(slowdown_at(aa, 8) == doctest::Approx(8.0));

    // bandwidth proportionality at grain multiples below saturation
    for (int c = 8; c < 64; c += 8)
        CHECK(slowdown_at(aa, c) * c == doctest::Approx(64.0).epsilon(1e-12));
    for (int c = 64; c <= 304; c += 8) CHECK(slowdown_at(aa, c) == 1.0);

    // a machine smaller than the saturation point normalizes at its own size
    const auto toy = testsupport::toy_machine();
    const auto toy_ag = default_comm_table(CollectiveKind::AllGather, toy);
    CHECK(slowdown_at(toy_ag, 16) == 1.0);
    CHECK(slowdown_at(toy_ag, 8) == doctest::Approx(2.0));
}

TEST_CASE("bundled comm tables match the generated defaults at grain points") {
    const auto md = testsupport::mi300x();
    const auto set = bundled_tables();
    for (const auto kind : {CollectiveKind::AllGather, CollectiveKind::AllToAll}) {
        const auto gen = default_comm_table(kind, md);
        const auto& shipped = set.at(comm_kernel_class(kind));
        for (int c = 8; c <= 304; c += 8)
            CHECK(slowdown_at(shipped, c) == doctest::Approx(slowdown_at(gen, c)).epsilon(1e-9));
    }
}

TEST_CASE("shared memory factor") {
    const auto f1 = shared_memory_factor({335e9, 627e9}, 3.71e12);
    CHECK(f1[0] == 1.0);
    CHECK(f1[1] == 1.0);

    const auto f2 = shared_memory_factor({3e12, 3e12}, 5.3e12);
    CHECK(f2[0] == doctest::Approx(1.1320754716981132).epsilon(1e-12));
    CHECK(f2[1] == f2[0]);

    CHECK(shared_memory_factor({1e12}, 5.3e12)[0] == 1.0);
    CHECK_THROWS_AS(shared_memory_factor({1.0}, 0.0), ValidationError);

    // stretching preserves total bytes: sum of demand/factor equals peak
    const auto f3 = shared_memory_factor({4e12, 3e12, 1e12}, 5.3e12);
    double achieved = 0;
    for (std::size_t i = 0; i < f3.size(); ++i) {
        CHECK(f3[i] >= 1.0);
        achieved += std::vector<double>{4e12, 3e12, 1e12}[i] / f3[i];
    }
    CHECK(achieved == doctest::Approx(5.3e12).epsilon(1e-12));
}

TEST_CASE("slowdown CSV validation and round-trip") {
    const auto set = bundled_tables();
    const auto again = parse_slowdown_tables(save_slowdown_tables(set), 8);
    for (int i = 0; i < kNumKernelClasses; ++i) {
        REQUIRE(again.tables[i].points.size() == set.tables[i].points.size());
        for (std::size_t p = 0; p < set.tables[i].points.size(); ++p) {
            CHECK(again.tables[i].points[p].cus == set.tables[i].points[p].cus);
            CHECK(again.tables[i].points[p].slowdown == set.tables[i].points[p].slowdown);
        }
    }

    const char* header = "kernel_class,cus,slowdown\n";
    CHECK_THROWS_AS(parse_slowdown_tables(std::string(header) +
                                          "gemm-compute-bound,8,-1\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_slowdown_tables(std::string(header) +
                                          "gemm-compute-bound,16,2\n"
                                          "gemm-compute-bound,8,1\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_slowdown_tables("bogus\n"), ValidationError);
    // all four classes are required
    CHECK_THROWS_AS(parse_slowdown_tables(std::string(header) + "all-gather,304,1.0\n"),
                    ValidationError);
    // grain mismatch
    CHECK_THROWS_AS(parse_slowdown_tables(save_slowdown_tables(set), 7), ValidationError);
}

TEST_CASE("co-run penalties") {
    auto p = CoRunPenalty::defaults();
    CHECK_NOTHROW(validate(p));
    CHECK(p.get(KernelClass::AllToAll, CommBackend::CU) >
          p.get(KernelClass::AllGather, CommBackend::CU));
    for (int c = 0; c < kNumKernelClasses; ++c) {
        const auto cls = static_cast<KernelClass>(c);
        CHECK(p.get(cls, CommBackend::DMA) <= p.get(cls, CommBackend::CU));
    }

    p.set(KernelClass::AllGather, CommBackend::DMA, 99.0);  // above its CU factor
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = CoRunPenalty::defaults();
    p.set(KernelClass::AllGather, CommBackend::CU, 0.5);
    CHECK_THROWS_AS(validate(p), ValidationError);
}
