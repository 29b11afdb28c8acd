#ifndef FEDSIM_SCENARIO_HPP
#define FEDSIM_SCENARIO_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/federation.hpp"
#include "fedsim/infrastructure.hpp"
#include "fedsim/latency.hpp"
#include "fedsim/scheduler.hpp"
#include "fedsim/topology.hpp"
#include "fedsim/transformation.hpp"
#include "fedsim/workload.hpp"

namespace fedsim {

struct ChecklistItem {
    std::string name;
    bool verifiable = false;
    std::string value;
};

struct Checklist {
    std::vector<ChecklistItem> items;
};

struct LinkSpec {
    std::string from;
    std::string to;
    double speed = 1.0;
};

/// Member cloud: gateway, optional node inventory, and (for providers) the
/// outsourcing capability it advertises on the bus.
struct CloudSpec {
    std::string id;
    bool home = false;
    GatewayProfile gateway;
    FederationMode federation = FederationMode::restrained; // capability toward the home cloud
    std::optional<FederationLink> fed_link; // defaults to the gateway-to-gateway plane hop
    StatusUpdate capability;                // advertised by providers
    std::vector<PhysicalNode> nodes;
};

struct ServiceTimeModel {
    enum class Kind { constant, exponential } kind = Kind::constant;
    double mean = 0.0;
};

struct AppSpec {
    Application app;
    StorageAssignment storage;
    double sla_threshold = 0.0;
    std::optional<WorkloadGenerator> workload;
};

struct FailureSpec {
    double time = 0.0;
    std::string app_id;
    std::int64_t replica = 0; // ordinal among the app's running local replicas, by vm id
};

enum class SchedulerMode { budget_constrained, unconstrained };

struct Scenario {
    int schema_version = 1;
    std::uint64_t seed = 0;

    NetEndpoint user;
    double default_speed = 1.0;
    std::vector<LinkSpec> links;

    std::vector<CloudSpec> clouds;
    std::vector<VmImageTemplate> templates;
    std::vector<AppSpec> apps;
    ColocationPolicy colocation_policy = ColocationPolicy::singleton;

    double slice_width = 0.0;
    std::size_t slices = 0;
    double replica_throughput = 0.0;   // requests per slice per replica
    double requests_per_vm_hour = 0.0; // converts vm-hour prices to per-request prices

    std::optional<BudgetCap> budget;
    std::optional<SchedulerMode> scheduler_mode; // may be derived from the checklist
    HaPolicy ha_policy;
    ServiceTimeModel service_time;
    double bus_latency = 0.0;
    double repository_deploy_delay = 0.0;
    std::vector<FailureSpec> failures;
    std::optional<Checklist> checklist;

    double horizon() const { return slice_width * double(slices); }
    const CloudSpec* home_cloud() const;
    std::vector<const CloudSpec*> provider_clouds() const;
    SpeedTable speed_table() const;
    /// Explicit mode if set, else budget-constrained when the checklist
    /// carries a non-verifiable budget-cap item or a budget is present.
    SchedulerMode effective_mode() const;
};

/// Parses a schema-versioned JSON scenario document. Throws IoError when
/// the file cannot be read and InvalidScenario on malformed content.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text);

} // namespace fedsim

#endif
