#include <random>

#include "c3sim/errors.hpp"
#include "c3sim/machine.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace c3sim;

TEST_CASE("default MI300X node file") {
    const auto md = testsupport::mi300x();
    CHECK(md.gpus_per_node == 8);
    CHECK(md.cus_per_gpu == 304);
    CHECK(md.xcds_per_gpu == 8);
    CHECK(md.cus_per_xcd == 38);
    CHECK(md.min_cu_grain == 8);
    CHECK(md.dma_engines_per_gpu == 14);
    CHECK(md.hbm_bandwidth == doctest::Approx(5.3e12));
    CHECK(md.llc_capacity == 268435456);
    CHECK(md.link_bandwidth_unidir == doctest::Approx(64e9));
    CHECK(md.links_per_gpu == 7);
}

TEST_CASE("machine op-to-byte ratio") {
    auto md = testsupport::mi300x();
    CHECK(machine_op_to_byte(md) == doctest::Approx(246.67924528301887).epsilon(1e-12));

    md.peak_compute_flops = 5.3e12;  // equal to bandwidth
    CHECK(machine_op_to_byte(md) == doctest::Approx(1.0));

    md.hbm_bandwidth = 0.0;
    CHECK_THROWS_AS(machine_op_to_byte(md), ValidationError);
}

TEST_CASE("invariant violations are reported") {
    const std::string base = save_machine(testsupport::mi300x());
    auto j = nlohmann::json::parse(base);

    SUBCASE("xcd product mismatch") {
        j["cus_per_gpu"] = 300;  // 8 * 38 != 300
        CHECK_THROWS_WITH_AS(load_machine(j.dump()),
                             doctest::Contains("cus_per_gpu"), ValidationError);
    }
    SUBCASE("grain does not divide") {
        j["min_cu_grain"] = 7;
        CHECK_THROWS_AS(load_machine(j.dump()), ValidationError);
    }
    SUBCASE("link count vs topology") {
        j["links_per_gpu"] = 5;
        CHECK_THROWS_AS(load_machine(j.dump()), ValidationError);
    }
    SUBCASE("unknown field") {
        j["nonsense"] = 1;
        CHECK_THROWS_WITH_AS(load_machine(j.dump()), doctest::Contains("unknown field"),
                             ValidationError);
    }
    SUBCASE("missing field") {
        j.erase("hbm_bandwidth");
        CHECK_THROWS_WITH_AS(load_machine(j.dump()), doctest::Contains("missing field"),
                             ValidationError);
    }
    SUBCASE("negative overhead") {
        j["dma_sync_overhead"] = -1e-6;
        CHECK_THROWS_AS(load_machine(j.dump()), ValidationError);
    }
}

TEST_CASE("toy machine is valid") {
    const auto md = testsupport::toy_machine();
    CHECK(md.cus_per_gpu == 16);
    CHECK_NOTHROW(validate(md));
}

TEST_CASE("save/load round-trip is field-identical") {
    const auto md = testsupport::mi300x();
    const auto again = load_machine(save_machine(md));
    CHECK(again.gpus_per_node == md.gpus_per_node);
    CHECK(again.cus_per_gpu == md.cus_per_gpu);
    CHECK(again.xcds_per_gpu == md.xcds_per_gpu);
    CHECK(again.cus_per_xcd == md.cus_per_xcd);
    CHECK(again.min_cu_grain == md.min_cu_grain);
    CHECK(again.dma_engines_per_gpu == md.dma_engines_per_gpu);
    CHECK(again.peak_compute_flops == md.peak_compute_flops);
    CHECK(again.hbm_bandwidth == md.hbm_bandwidth);
    CHECK(again.llc_capacity == md.llc_capacity);
    CHECK(again.link_bandwidth_unidir == md.link_bandwidth_unidir);
    CHECK(again.links_per_gpu == md.links_per_gpu);
    CHECK(again.cpu_launch_overhead == md.cpu_launch_overhead);
    CHECK(again.dma_sync_overhead == md.dma_sync_overhead);
}

TEST_CASE("fuzzed configs never yield an invalid descriptor") {
    const std::string base = save_machine(testsupport::mi300x());
    std::mt19937 rng(20240811);
    std::uniform_int_distribution<int> pick(0, 5);
    std::uniform_int_distribution<int> val(-10, 400);

    static const char* keys[] = {"gpus_per_node", "cus_per_gpu",   "xcds_per_gpu",
                                 "cus_per_xcd",   "min_cu_grain",  "links_per_gpu",
                                 "hbm_bandwidth", "llc_capacity",  "dma_engines_per_gpu",
                                 "topology",      "peak_compute_flops"};
    std::uniform_int_distribution<std::size_t> key_at(0, std::size(keys) - 1);

    for (int i = 0; i < 300; ++i) {
        auto j = nlohmann::json::parse(base);
        const std::string key = keys[key_at(rng)];
        switch (pick(rng)) {
            case 0: j.erase(key); break;
            case 1: j[key] = val(rng); break;
            case 2: j[key] = "garbage"; break;
            case 3: j[key] = -1; break;
            case 4: j["extra_" + key] = 1; break;
            case 5: j[key] = nullptr; break;
        }
        try {
            const auto md = load_machine(j.dump());
            CHECK_NOTHROW(validate(md));  // loader only returns valid machines
        } catch (const ValidationError&) {
            // rejection is fine
        }
    }
}
