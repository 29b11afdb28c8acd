#include <doctest.h>

#include <cmath>
#include <random>

#include "fedsim/scheduler.hpp"
#include "oracles.hpp"

using namespace fedsim;

namespace {

WorkloadTrace make_trace(std::vector<double> demand) {
    return WorkloadTrace{60.0, std::move(demand), ""};
}

ReplicaEntry replica(const std::string& vm, const std::string& cloud = "A") {
    return ReplicaEntry{vm, NetEndpoint{vm, {0, 0}, EndpointRole::compute_node}, cloud};
}

} // namespace

TEST_CASE("plan_outsourcing: flat, starved, and hand-replayed cases") {
    // flat demand below capacity: all local, zero cost
    auto flat = plan_outsourcing(make_trace({5, 5, 5}), 10.0, 1.0, BudgetCap{100.0, 180.0});
    CHECK(flat.total_projected_cost == 0.0);
    CHECK(flat.total_shortfall == 0.0);
    for (const auto& d : flat.slices) {
        CHECK(d.local_share == doctest::Approx(5.0));
        CHECK(d.outsourced_share == 0.0);
    }

    // budget zero: nothing outsourced, the excess is shortfall
    auto starved = plan_outsourcing(make_trace({20, 20}), 10.0, 1.0, BudgetCap{0.0, 120.0});
    CHECK(starved.total_projected_cost == 0.0);
    CHECK(starved.total_shortfall == doctest::Approx(20.0));
    for (const auto& d : starved.slices) {
        CHECK(d.outsourced_share == 0.0);
        CHECK(d.shortfall == doctest::Approx(10.0));
    }

    // demand [10,10,30,10], capacity 20, price 1, budget 10:
    // only the third slice outsources, exactly 10, no shortfall
    auto spike = plan_outsourcing(make_trace({10, 10, 30, 10}), 20.0, 1.0, BudgetCap{10.0, 240.0});
    CHECK(spike.slices[2].outsourced_share == doctest::Approx(10.0));
    CHECK(spike.slices[2].projected_cost == doctest::Approx(10.0));
    CHECK(spike.total_projected_cost == doctest::Approx(10.0));
    CHECK(spike.total_shortfall == 0.0);
}

TEST_CASE("plan_outsourcing: randomized against the greedy oracle, never over budget") {
    std::mt19937_64 rng(67);
    std::uniform_real_distribution<double> demand_dist(0.0, 100.0);
    std::uniform_real_distribution<double> cap_dist(0.0, 60.0);
    std::uniform_real_distribution<double> price_dist(0.0, 3.0);
    std::uniform_real_distribution<double> budget_dist(0.0, 50.0);
    std::uniform_int_distribution<int> len_dist(1, 30);

    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> demand;
        int len = len_dist(rng);
        for (int i = 0; i < len; ++i) demand.push_back(demand_dist(rng));
        double capacity = cap_dist(rng);
        double price = price_dist(rng);
        BudgetCap budget{budget_dist(rng), double(len) * 60.0};

        auto plan = plan_outsourcing(make_trace(demand), capacity, price, budget);
        CHECK(plan.total_projected_cost <= budget.amount);
        auto expected = oracle::greedy_slices(demand, capacity, price, budget.amount);
        double total_cost = 0.0;
        for (std::size_t i = 0; i < demand.size(); ++i) {
            const auto& d = plan.slices[i];
            CHECK(d.local_share == doctest::Approx(expected[i].local));
            CHECK(d.outsourced_share == doctest::Approx(expected[i].outsourced));
            CHECK(d.shortfall == doctest::Approx(expected[i].shortfall));
            CHECK(d.local_share + d.outsourced_share <= demand[i] + 1e-9);
            CHECK(d.local_share <= capacity);
            total_cost += d.projected_cost;
        }
        CHECK(plan.total_projected_cost == doctest::Approx(total_cost));
    }
}

TEST_CASE("plan_outsourcing: shortfall is zero whenever the budget covers the excess") {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> demand_dist(0.0, 100.0);
    std::uniform_real_distribution<double> price_dist(0.01, 3.0);
    std::uniform_int_distribution<int> len_dist(1, 24);
    for (int trial = 0; trial < 200; ++trial) {
        int len = len_dist(rng);
        std::vector<double> demand;
        for (int i = 0; i < len; ++i) demand.push_back(demand_dist(rng));
        double capacity = 40.0;
        double price = price_dist(rng);
        double excess = 0.0;
        for (double d : demand) excess += std::max(0.0, d - capacity);
        BudgetCap budget{excess * price * 1.0000001 + 1e-6, double(len) * 60.0};
        auto plan = plan_outsourcing(make_trace(demand), capacity, price, budget);
        CHECK(plan.total_shortfall == doctest::Approx(0.0));
    }
}

TEST_CASE("service map and locate") {
    ServiceMap map;
    CHECK(locate(map, "nope").empty());
    map.add("web", replica("vm-1"));
    map.add("web", replica("B:rvm-1", "B"));
    CHECK(locate(map, "web").size() == 2);
    map.add("web", replica("vm-2"));
    CHECK(locate(map, "web").size() == 3);
    map.remove_vm("vm-1");
    CHECK(locate(map, "web").size() == 2);
    map.remove("web", "vm-2");
    CHECK(locate(map, "web").size() == 1);
    CHECK(locate(map, "web").front().cloud_id == "B");
}

TEST_CASE("dispatch: least outstanding, tie by id, health and contract filters") {
    std::map<std::string, ReplicaStatus> status{
        {"vm-1", {3, VmState::running, true}},
        {"vm-2", {1, VmState::running, true}},
    };
    auto status_fn = [&](const ReplicaEntry& r) { return status.at(r.vm_id); };

    CHECK(dispatch({replica("vm-1"), replica("vm-2")}, status_fn).vm_id == "vm-2");

    status["vm-2"].outstanding = 3;
    CHECK(dispatch({replica("vm-1"), replica("vm-2")}, status_fn).vm_id == "vm-1");

    CHECK(dispatch({replica("vm-1")}, status_fn).vm_id == "vm-1");

    status["vm-1"].state = VmState::failed;
    status["vm-2"].state = VmState::terminated;
    try {
        dispatch({replica("vm-1"), replica("vm-2")}, status_fn);
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::service_unavailable);
    }

    // a remote replica without an open contract is ineligible
    status["B:rvm-1"] = {0, VmState::running, false};
    CHECK_THROWS_AS(dispatch({replica("B:rvm-1", "B")}, status_fn), SimError);
}

TEST_CASE("update_billing: ledger arithmetic preserves the cap identity") {
    BillingState state(BudgetCap{12.0, 3600.0});
    CHECK(state.remaining() == 12.0);

    state = update_billing(state, ContractOpened{"c1", 5.0});
    CHECK(state.remaining() == doctest::Approx(7.0));
    CHECK(state.committed() == doctest::Approx(5.0));

    state = update_billing(state, ContractClosed{"c1", 4.0});
    CHECK(state.spent() == doctest::Approx(4.0));
    CHECK(state.committed() == 0.0);
    CHECK(state.remaining() == doctest::Approx(8.0));
    CHECK(state.spent() + state.committed() + state.remaining() ==
          doctest::Approx(state.cap_amount()));

    // no events: unchanged
    BillingState untouched(BudgetCap{5.0, 60.0});
    CHECK(untouched.spent() == 0.0);
    CHECK(untouched.committed() == 0.0);
    CHECK(untouched.remaining() == 5.0);
}

TEST_CASE("update_billing: breaches and unknown contracts") {
    BillingState state(BudgetCap{10.0, 3600.0});
    try {
        update_billing(state, ContractOpened{"c1", 11.0});
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::budget_breach);
    }

    state = update_billing(state, ContractOpened{"c1", 4.0});
    state = update_billing(state, UsageTick{"c1", 2.0});
    CHECK(state.committed_for("c1") == doctest::Approx(6.0));

    try {
        update_billing(state, UsageTick{"zz", 1.0});
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::unknown_contract);
    }
    // closing with a fee above the whole cap breaches
    CHECK_THROWS_AS(update_billing(state, ContractClosed{"c1", 11.0}), SimError);
}

namespace {

CapacityPlanner::Inputs planner_inputs(const Datacenter& dc, ResourceSpec spec,
                                       std::vector<ReplicaEntry> local,
                                       std::vector<ReplicaEntry> remote) {
    CapacityPlanner::Inputs in;
    in.dc = &dc;
    in.image_spec = spec;
    in.local_replicas = std::move(local);
    in.remote_replicas = std::move(remote);
    in.replica_idle = [](const std::string&) { return true; };
    return in;
}

Datacenter two_slot_dc() {
    Datacenter dc;
    PhysicalNode n;
    n.id = "n0";
    n.endpoint = NetEndpoint{"n0", {0, 0}, EndpointRole::compute_node};
    n.capacity = {4, 4096, 40};
    n.role = NodeRole::compute;
    dc.add_node(n);
    return dc;
}

} // namespace

TEST_CASE("plan_capacity: no actions when the forecast fits") {
    Datacenter dc = two_slot_dc();
    CapacityPlanner planner(50.0, HaPolicy{2});
    auto in = planner_inputs(dc, {2, 2048, 20}, {replica("vm-1"), replica("vm-2")}, {});
    in.local_forecast = 80.0;
    auto decision = planner.plan(in);
    CHECK(decision.actions.empty());
    CHECK_FALSE(decision.degraded);
}

TEST_CASE("plan_capacity: local exhaustion becomes a remote-scaling trigger") {
    Datacenter dc = two_slot_dc();
    dc.try_launch(VmImageTemplate{"img", OsKind{"linux"}, {2, 2048, 20}});
    dc.try_launch(VmImageTemplate{"img", OsKind{"linux"}, {2, 2048, 20}});
    CapacityPlanner planner(50.0, HaPolicy{2});

    // wants 3 local replicas, datacenter is full, contract open and budget available
    BillingState billing(BudgetCap{100.0, 3600.0});
    auto in = planner_inputs(dc, {2, 2048, 20}, {replica("vm-1"), replica("vm-2")}, {});
    in.local_forecast = 150.0;
    in.contract_open = true;
    in.billing = &billing;
    in.remote_cost_per_replica_slice = 1.0;
    auto decision = planner.plan(in);
    REQUIRE(decision.actions.size() == 1);
    CHECK(decision.actions[0].kind == ReplicaActionKind::add_remote);
    CHECK_FALSE(decision.degraded);

    // same but no budget: no actions, degradation flagged
    BillingState broke(BudgetCap{0.0, 3600.0});
    in.billing = &broke;
    auto starved = planner.plan(in);
    CHECK(starved.actions.empty());
    CHECK(starved.degraded);
}

TEST_CASE("plan_capacity: removals respect min replicas and idleness") {
    Datacenter dc = two_slot_dc();
    CapacityPlanner planner(50.0, HaPolicy{2});
    auto in = planner_inputs(dc, {2, 2048, 20},
                             {replica("vm-1"), replica("vm-2"), replica("vm-3")}, {});
    in.local_forecast = 10.0; // needs 1, floor is min_replicas = 2
    auto decision = planner.plan(in);
    REQUIRE(decision.actions.size() == 1);
    CHECK(decision.actions[0].kind == ReplicaActionKind::remove_local);
    CHECK(decision.actions[0].vm_id == "vm-3"); // youngest first

    in.replica_idle = [](const std::string& id) { return id == "vm-1"; };
    auto busy = planner.plan(in);
    REQUIRE(busy.actions.size() == 1);
    CHECK(busy.actions[0].vm_id == "vm-1"); // only idle replicas are removable
}

TEST_CASE("scale_out requires an active covering contract and accrues usage") {
    BrokerLedger ledger;
    VirtualResourceManager vrm(ledger);

    try {
        vrm.scale_out({1, 512, 5}, "B", "web", 0.0);
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::no_active_contract);
    }

    ledger.record_offer({"B", OutsourcingOffer{"o1", {2, 2048, 20}, 1.0, 7200.0, 3.0}});
    ledger.confirm_offer("o1");
    ledger.initiate("c1", "o1", "A", 0.0);

    // spec not covered by the contract
    CHECK_THROWS_AS(vrm.scale_out({4, 512, 5}, "B", "web", 0.0), SimError);

    const auto& vm1 = vrm.scale_out({1, 512, 5}, "B", "web", 0.0);
    const auto& vm2 = vrm.scale_out({2, 2048, 20}, "B", "web", 1800.0);
    CHECK(vm1.contract_id == "c1");
    CHECK(vm2.contract_id == "c1");

    // both replicas accrue: 1 hour + 0.5 hours
    vrm.accrue_all(3600.0);
    CHECK(ledger.find("c1")->vm_hours_used == doctest::Approx(1.5));

    vrm.scale_in(vm1.vm_id, 7200.0);
    CHECK(ledger.find("c1")->vm_hours_used == doctest::Approx(2.5));
    CHECK(vrm.active_vms().size() == 1);
    CHECK_THROWS_AS(vrm.scale_in("no-such", 0.0), SimError);
}
