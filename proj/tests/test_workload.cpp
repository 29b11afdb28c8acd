#include <doctest.h>

#include <algorithm>

#include "fedsim/workload.hpp"

using namespace fedsim;

TEST_CASE("generate: constant shape") {
    WorkloadGenerator gen{ConstantShape{10.0}, 1, "flat"};
    auto trace = generate(gen, 4, 60.0);
    CHECK(trace.demand == std::vector<double>{10, 10, 10, 10});
    CHECK(trace.slice_width == 60.0);
    CHECK(trace.pattern_label == "flat");
}

TEST_CASE("generate: sinusoidal shape spans trough to peak") {
    WorkloadGenerator gen{SinusoidalShape{4.0, 20.0, 0.0}, 1, ""};
    auto trace = generate(gen, 4, 60.0);
    REQUIRE(trace.demand.size() == 4);
    double lo = *std::min_element(trace.demand.begin(), trace.demand.end());
    double hi = *std::max_element(trace.demand.begin(), trace.demand.end());
    CHECK(lo == doctest::Approx(0.0));
    CHECK(hi == doctest::Approx(20.0));
    for (double v : trace.demand) {
        CHECK(v >= 0.0);
        CHECK(v <= 20.0);
    }
    // starts at the trough
    CHECK(trace.demand[0] == doctest::Approx(0.0));
}

TEST_CASE("generate: deterministic per seed and shape") {
    WorkloadGenerator gen{SinusoidalShape{24.0, 400.0, 40.0}, 99, ""};
    auto a = generate(gen, 48, 300.0);
    auto b = generate(gen, 48, 300.0);
    CHECK(a.demand == b.demand);
}

TEST_CASE("generate: trace shape repeats cyclically") {
    WorkloadGenerator gen{TraceShape{{1, 2, 3}}, 0, ""};
    auto trace = generate(gen, 5, 10.0);
    CHECK(trace.demand == std::vector<double>{1, 2, 3, 1, 2});
}

TEST_CASE("generate: invalid shapes are rejected") {
    auto expect_invalid = [](WorkloadGenerator gen) {
        try {
            generate(gen, 4, 10.0);
            FAIL("expected throw");
        } catch (const SimError& e) {
            CHECK(e.code() == ErrorCode::invalid_shape);
        }
    };
    expect_invalid({ConstantShape{-1.0}, 0, ""});
    expect_invalid({SinusoidalShape{4.0, -5.0, 0.0}, 0, ""});
    expect_invalid({SinusoidalShape{0.0, 5.0, 0.0}, 0, ""});
    expect_invalid({SinusoidalShape{4.0, 5.0, 10.0}, 0, ""}); // peak below trough
    expect_invalid({TraceShape{{1, -2}}, 0, ""});
    expect_invalid({TraceShape{{}}, 0, ""});
}
