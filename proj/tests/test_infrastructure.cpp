#include <doctest.h>

#include <random>

#include "fedsim/infrastructure.hpp"
#include "oracles.hpp"

using namespace fedsim;

namespace {

PhysicalNode make_node(const std::string& id, ResourceSpec capacity,
                       NodeRole role = NodeRole::compute) {
    PhysicalNode n;
    n.id = id;
    n.endpoint = NetEndpoint{id, {0, 0},
                             role == NodeRole::compute ? EndpointRole::compute_node
                                                       : EndpointRole::storage_node};
    n.capacity = capacity;
    n.role = role;
    return n;
}

VmImageTemplate make_image(const std::string& id, ResourceSpec spec) {
    return VmImageTemplate{id, OsKind{"linux"}, spec};
}

} // namespace

TEST_CASE("per_node_max: componentwise floor division") {
    CHECK(per_node_max(make_node("n", {8, 16384, 400}), {2, 4096, 50}) == 4);
    CHECK(per_node_max(make_node("n", {2, 4096, 50}), {2, 4096, 50}) == 1);
    // min(floor(4/3), floor(8192/2048), floor(100/20)) = 1
    CHECK(per_node_max(make_node("n", {4, 8192, 100}), {3, 2048, 20}) == 1);
    try {
        per_node_max(make_node("s", {4, 4096, 100}, NodeRole::storage), {1, 1024, 10});
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::wrong_node_role);
    }
}

TEST_CASE("datacenter_capacity: sums per-node maxima") {
    Datacenter dc;
    for (int i = 0; i < 3; ++i) {
        dc.add_node(make_node("n" + std::to_string(i), {8, 16384, 400}));
    }
    CapacityModel model = dc.capacity_for({2, 4096, 50});
    CHECK(model.per_node_max == 4);
    CHECK(model.datacenter_max == 12);

    Datacenter one;
    one.add_node(make_node("only", {2, 4096, 50}));
    CHECK(one.capacity_for({2, 4096, 50}).datacenter_max == 1);

    // heterogeneous: per-node maxima {2, 3, 0} sum to 5
    Datacenter mixed;
    mixed.add_node(make_node("a", {4, 16384, 400}));  // min(2, 4, 8) = 2
    mixed.add_node(make_node("b", {6, 16384, 400}));  // min(3, 4, 8) = 3
    mixed.add_node(make_node("c", {1, 16384, 400}));  // min(0, ...) = 0
    CHECK(mixed.capacity_for({2, 4096, 50}).datacenter_max == 5);
}

TEST_CASE("datacenter_capacity: storage-only datacenter is empty") {
    Datacenter dc;
    dc.add_node(make_node("s1", {8, 16384, 4000}, NodeRole::storage));
    try {
        dc.capacity_for({1, 1024, 10});
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::empty_datacenter);
    }
}

TEST_CASE("try_launch: fills to the capacity bound, then fails") {
    Datacenter dc;
    for (int i = 0; i < 3; ++i) {
        dc.add_node(make_node("n" + std::to_string(i), {8, 16384, 400}));
    }
    VmImageTemplate image = make_image("img", {2, 4096, 50});
    for (int i = 0; i < 12; ++i) {
        CHECK_NOTHROW(dc.try_launch(image));
    }
    CHECK(dc.running_count() == 12);
    try {
        dc.try_launch(image); // the 13th identical launch
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::capacity_exceeded);
    }
    CHECK(dc.running_count() == 12); // failure left the ledger unchanged

    Datacenter empty;
    try {
        empty.try_launch(image);
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::empty_datacenter);
    }
}

TEST_CASE("terminate: releases resources and invalidates the id") {
    Datacenter dc;
    dc.add_node(make_node("n0", {8, 16384, 400}));
    ResourceSpec before = dc.nodes().front().used;
    VmInstance& vm = dc.try_launch(make_image("img", {2, 4096, 50}));
    std::string id = vm.id;
    CHECK(dc.nodes().front().used == ResourceSpec{2, 4096, 50});

    ResourceSpec released = dc.terminate(id);
    CHECK(released == ResourceSpec{2, 4096, 50});
    CHECK(dc.nodes().front().used == before);

    try {
        dc.terminate(id);
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::unknown_vm);
    }
}

TEST_CASE("terminate then relaunch at full capacity") {
    Datacenter dc;
    for (int i = 0; i < 3; ++i) {
        dc.add_node(make_node("n" + std::to_string(i), {8, 16384, 400}));
    }
    VmImageTemplate image = make_image("img", {2, 4096, 50});
    std::vector<std::string> ids;
    for (int i = 0; i < 12; ++i) ids.push_back(dc.try_launch(image).id);
    dc.terminate(ids[4]);
    CHECK_NOTHROW(dc.try_launch(image));
    CHECK_THROWS_AS(dc.try_launch(image), SimError);
}

TEST_CASE("capacity bound holds on randomized datacenters against a counting oracle") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> nodes_dist(1, 6);
    std::uniform_int_distribution<std::int64_t> k_dist(1, 5);
    std::uniform_int_distribution<std::int64_t> cpu_dist(1, 8);
    std::uniform_int_distribution<std::int64_t> mem_dist(256, 8192);
    std::uniform_int_distribution<std::int64_t> disk_dist(10, 500);

    for (int trial = 0; trial < 60; ++trial) {
        ResourceSpec spec{cpu_dist(rng), mem_dist(rng), disk_dist(rng)};
        int n = nodes_dist(rng);
        Datacenter dc;
        std::int64_t expected = 0;
        for (int i = 0; i < n; ++i) {
            std::int64_t k = k_dist(rng);
            ResourceSpec capacity{spec.cpu * k + (i % 2), spec.mem_mib * k + (i % 3),
                                  spec.disk_gib * k + (i % 2)};
            dc.add_node(make_node("n" + std::to_string(i), capacity));
            expected += oracle::count_fit(capacity, spec);
        }
        CHECK(dc.capacity_for(spec).datacenter_max == expected);

        VmImageTemplate image = make_image("img", spec);
        std::int64_t launched = 0;
        for (;;) {
            try {
                dc.try_launch(image);
                ++launched;
            } catch (const SimError& e) {
                CHECK(e.code() == ErrorCode::capacity_exceeded);
                break;
            }
        }
        CHECK(launched == expected);
        for (const auto& node : dc.nodes()) {
            CHECK(node.capacity.dominates(node.used));
        }
    }
}

TEST_CASE("launch followed by terminate is a no-op on the ledger") {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::int64_t> dim(1, 16);
    Datacenter dc;
    dc.add_node(make_node("a", {32, 65536, 2000}));
    dc.add_node(make_node("b", {16, 32768, 1000}));
    for (int i = 0; i < 50; ++i) {
        ResourceSpec spec{dim(rng), dim(rng) * 512, dim(rng) * 10};
        std::vector<ResourceSpec> before;
        for (const auto& n : dc.nodes()) before.push_back(n.used);
        std::string id = dc.try_launch(make_image("img", spec)).id;
        dc.terminate(id);
        for (std::size_t n = 0; n < dc.nodes().size(); ++n) {
            CHECK(dc.nodes()[n].used == before[n]);
        }
    }
}

TEST_CASE("mark_failed keeps resources committed until terminate") {
    Datacenter dc;
    dc.add_node(make_node("n0", {2, 4096, 50}));
    VmInstance& vm = dc.try_launch(make_image("img", {2, 4096, 50}));
    std::string id = vm.id;
    dc.mark_failed(id);
    CHECK(dc.find_vm(id)->state == VmState::failed);
    CHECK(dc.nodes().front().used == ResourceSpec{2, 4096, 50});
    CHECK_THROWS_AS(dc.try_launch(make_image("img", {2, 4096, 50})), SimError);
    dc.terminate(id); // failed instances can still be terminated
    CHECK(dc.nodes().front().used == ResourceSpec{0, 0, 0});
    CHECK_NOTHROW(dc.try_launch(make_image("img", {2, 4096, 50})));
}
