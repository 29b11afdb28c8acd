#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fedsim/harness.hpp"
#include "fedsim/simengine.hpp"
#include "scenario_fixtures.hpp"

using namespace fedsim;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "fedsim_tests" / name;
    std::filesystem::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("differentiate: partitions by the verifiable flag") {
    Checklist list{{{"budget-cap", false, ""}, {"san-available", true, "yes"}}};
    auto result = differentiate(list);
    REQUIRE(result.constraints.size() == 1);
    REQUIRE(result.verified.size() == 1);
    CHECK(result.constraints[0].name == "budget-cap");
    CHECK(result.verified[0].name == "san-available");

    auto empty = differentiate(Checklist{});
    CHECK(empty.verified.empty());
    CHECK(empty.constraints.empty());

    Checklist all_constraints{{{"a", false, ""}, {"b", false, ""}, {"c", false, ""}}};
    CHECK(differentiate(all_constraints).constraints.size() == 3);

    Checklist dup{{{"a", false, ""}, {"a", true, ""}}};
    try {
        differentiate(dup);
        FAIL("expected throw");
    } catch (const SimError& e) {
        CHECK(e.code() == ErrorCode::invalid_checklist);
    }
}

TEST_CASE("checklist drives the scheduler mode when none is given") {
    Scenario s = fixtures::federated_scenario(FederationMode::restrained);
    s.scheduler_mode.reset();
    s.checklist = Checklist{{{"budget-cap", false, ""}}};
    CHECK(s.effective_mode() == SchedulerMode::budget_constrained);

    s.checklist = Checklist{{{"budget-cap", true, ""}}}; // verifiable: not a constraint
    s.budget.reset();
    CHECK(s.effective_mode() == SchedulerMode::unconstrained);
}

TEST_CASE("validate: the shipped scenarios are clean") {
    Scenario flagship = load_scenario(std::filesystem::path(FEDSIM_SCENARIO_DIR) / "flagship.json");
    CHECK(validate(flagship).empty());
    Scenario minimal = load_scenario(std::filesystem::path(FEDSIM_SCENARIO_DIR) / "minimal.json");
    CHECK(validate(minimal).empty());
}

TEST_CASE("validate: structural violations are reported as values") {
    // no compute nodes left (G = N)
    {
        Scenario s = fixtures::local_scenario({5, 0});
        for (auto& n : s.clouds[0].nodes) n.role = NodeRole::storage;
        auto violations = validate(s);
        bool found = false;
        for (const auto& v : violations) found |= v.find("no compute nodes") != std::string::npos;
        CHECK(found);
    }
    // storage assignment referencing a missing node names the app
    {
        Scenario s = fixtures::local_scenario({5, 0});
        s.apps[0].storage.storage_node_id = "nowhere";
        auto violations = validate(s);
        REQUIRE(!violations.empty());
        bool found = false;
        for (const auto& v : violations) {
            found |= v.find("web") != std::string::npos &&
                     v.find("nowhere") != std::string::npos;
        }
        CHECK(found);
    }
    // an infeasible placement is caught by the dry run
    {
        Scenario s = fixtures::local_scenario({5, 0});
        s.templates[0].spec = {64, 262144, 4000};
        auto violations = validate(s);
        bool found = false;
        for (const auto& v : violations) {
            found |= v.find("transformation infeasible") != std::string::npos;
        }
        CHECK(found);
    }
    // duplicate endpoint ids across clouds
    {
        Scenario s = fixtures::federated_scenario(FederationMode::full);
        s.clouds[1].nodes[0].id = "a1";
        s.clouds[1].nodes[0].endpoint.id = "a1";
        CHECK(!validate(s).empty());
    }
}

TEST_CASE("validate ok implies run accepts") {
    Scenario s = fixtures::federated_scenario(FederationMode::restrained);
    REQUIRE(validate(s).empty());
    CHECK_NOTHROW(run_scenario(s, 1));

    s.replica_throughput = 0.0;
    REQUIRE(!validate(s).empty());
    CHECK_THROWS_AS(run_scenario(s, 1), SimError);
}

TEST_CASE("write_report: empty report yields header-only tables") {
    auto dir = temp_dir("empty");
    ReportPaths paths = write_report(MetricsReport{}, dir);
    CHECK(slurp(paths.requests) ==
          "id,app,arrival,path,outcome,user_to_gateway,gateway_processing,federation_hop,"
          "remote_gateway_processing,gateway_to_vm,vm_processing,vm_to_user,total,sla_violated\n");
    CHECK(slurp(paths.utilization) == "time,node,cpu_ratio,mem_ratio,disk_ratio\n");
    CHECK(slurp(paths.vm_count) == "time,running_vms\n");
    CHECK(slurp(paths.billing) == "time,spent,committed,remaining\n");
}

TEST_CASE("write_report: one data row per request record") {
    MetricsReport report;
    for (int i = 0; i < 3; ++i) {
        RequestRecord r;
        r.id = std::uint64_t(i);
        r.app_id = "web";
        r.arrival = double(i) / 3.0;
        r.path = "private";
        r.outcome = "completed";
        r.breakdown.total = 1.25 + i;
        report.requests.push_back(r);
    }
    auto dir = temp_dir("rows");
    ReportPaths paths = write_report(report, dir);
    std::string text = slurp(paths.requests);
    std::size_t lines = std::count(text.begin(), text.end(), '\n');
    CHECK(lines == 4); // header + 3 rows
}

TEST_CASE("write_report: identical runs produce byte-identical files") {
    Scenario s = fixtures::federated_scenario(FederationMode::restrained);
    s.service_time = ServiceTimeModel{ServiceTimeModel::Kind::exponential, 0.4};

    auto dir_a = temp_dir("det_a");
    auto dir_b = temp_dir("det_b");
    ReportPaths a = write_report(run_scenario(s, 21), dir_a);
    ReportPaths b = write_report(run_scenario(s, 21), dir_b);

    CHECK(slurp(a.requests) == slurp(b.requests));
    CHECK(slurp(a.summary) == slurp(b.summary));
    CHECK(slurp(a.plan) == slurp(b.plan));
    CHECK(slurp(a.decisions) == slurp(b.decisions));
    CHECK(slurp(a.utilization) == slurp(b.utilization));
    CHECK(slurp(a.vm_count) == slurp(b.vm_count));
    CHECK(slurp(a.billing) == slurp(b.billing));
}

TEST_CASE("emitted numbers round-trip at nine significant digits") {
    for (double value : {1.0 / 3.0, 123456.789, 0.000123456789, 2.0, 1e-9, 0.05}) {
        std::string text = format_number(value);
        double parsed = std::strtod(text.c_str(), nullptr);
        CHECK(format_number(parsed) == text);
    }
}

TEST_CASE("scenario json round trip") {
    Scenario s = load_scenario(std::filesystem::path(FEDSIM_SCENARIO_DIR) / "flagship.json");
    CHECK(s.schema_version == 1);
    CHECK(s.seed == 42);
    CHECK(s.clouds.size() == 2);
    CHECK(s.home_cloud()->id == "A");
    CHECK(s.provider_clouds().size() == 1);
    CHECK(s.apps.size() == 1);
    CHECK(s.apps[0].app.id == "web");
    CHECK(s.slices == 48);
    CHECK(s.horizon() == doctest::Approx(14400.0));
    CHECK(s.effective_mode() == SchedulerMode::budget_constrained);
    REQUIRE(s.checklist.has_value());
    auto diff = differentiate(*s.checklist);
    CHECK(diff.constraints.size() == 1);
    CHECK(diff.constraints[0].name == "budget-cap");

    CHECK_THROWS_AS(load_scenario("does-not-exist.json"), SimError);
    CHECK_THROWS_AS(parse_scenario("{not json"), SimError);
    CHECK_THROWS_AS(parse_scenario("{\"schema_version\": 1}"), SimError);
}
