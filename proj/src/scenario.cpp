#include "fedsim/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fedsim {

using nlohmann::json;

const CloudSpec* Scenario::home_cloud() const {
    for (const auto& c : clouds) {
        if (c.home) return &c;
    }
    return nullptr;
}

std::vector<const CloudSpec*> Scenario::provider_clouds() const {
    std::vector<const CloudSpec*> out;
    for (const auto& c : clouds) {
        if (!c.home) out.push_back(&c);
    }
    return out;
}

SpeedTable Scenario::speed_table() const {
    SpeedTable table(NetworkSpeed{default_speed});
    for (const auto& l : links) {
        table.set_link(l.from, l.to, NetworkSpeed{l.speed});
    }
    return table;
}

SchedulerMode Scenario::effective_mode() const {
    if (scheduler_mode.has_value()) return *scheduler_mode;
    if (checklist.has_value()) {
        for (const auto& item : checklist->items) {
            if (!item.verifiable && item.name == "budget-cap") {
                return SchedulerMode::budget_constrained;
            }
        }
    }
    return budget.has_value() ? SchedulerMode::budget_constrained : SchedulerMode::unconstrained;
}

namespace {

[[noreturn]] void bad(const std::string& what) {
    throw SimError(ErrorCode::invalid_scenario, what);
}

ResourceSpec parse_spec(const json& j) {
    ResourceSpec spec;
    spec.cpu = j.at("cpu").get<std::int64_t>();
    spec.mem_mib = j.at("mem_mib").get<std::int64_t>();
    spec.disk_gib = j.at("disk_gib").get<std::int64_t>();
    return spec;
}

NetEndpoint parse_endpoint(const json& j, const std::string& id, EndpointRole role) {
    NetEndpoint ep;
    ep.id = id;
    ep.coord.x = j.at("x").get<double>();
    ep.coord.y = j.at("y").get<double>();
    ep.role = role;
    return ep;
}

WorkloadGenerator parse_workload(const json& j) {
    WorkloadGenerator gen;
    gen.seed = j.value("seed", std::uint64_t{0});
    gen.label = j.value("label", std::string{});
    std::string shape = j.at("shape").get<std::string>();
    if (shape == "constant") {
        gen.shape = ConstantShape{j.at("value").get<double>()};
    } else if (shape == "sinusoidal") {
        gen.shape = SinusoidalShape{j.at("period").get<double>(), j.at("peak").get<double>(),
                                    j.at("trough").get<double>()};
    } else if (shape == "trace") {
        gen.shape = TraceShape{j.at("values").get<std::vector<double>>()};
    } else {
        bad("unknown workload shape '" + shape + "'");
    }
    return gen;
}

CloudSpec parse_cloud(const json& j) {
    CloudSpec cloud;
    cloud.id = j.at("id").get<std::string>();
    cloud.home = j.value("home", false);

    const json& gw = j.at("gateway");
    cloud.gateway.endpoint =
        parse_endpoint(gw, gw.at("id").get<std::string>(), EndpointRole::gateway);
    cloud.gateway.processing_time = gw.value("processing_time", 0.0);

    std::string fed = j.value("federation", std::string{"restrained"});
    if (fed == "restrained") {
        cloud.federation = FederationMode::restrained;
    } else if (fed == "full") {
        cloud.federation = FederationMode::full;
    } else {
        bad("cloud " + cloud.id + ": unknown federation mode '" + fed + "'");
    }

    if (j.contains("fed_link")) {
        FederationLink link;
        link.distance = NetworkDistance{j.at("fed_link").at("distance").get<double>()};
        link.speed = NetworkSpeed{j.at("fed_link").at("speed").get<double>()};
        cloud.fed_link = link;
    }

    if (j.contains("capability")) {
        const json& cap = j.at("capability");
        for (const auto& s : cap.value("supported_specs", json::array())) {
            cloud.capability.supported_specs.push_back(parse_spec(s));
        }
        cloud.capability.supported_sla = cap.value("supported_sla", 0.0);
        cloud.capability.contract_duration = cap.value("contract_duration", 0.0);
        cloud.capability.price_per_vm_hour = cap.value("price_per_vm_hour", 0.0);
    }

    for (const auto& n : j.value("nodes", json::array())) {
        PhysicalNode node;
        node.id = n.at("id").get<std::string>();
        std::string role = n.at("role").get<std::string>();
        if (role == "compute") {
            node.role = NodeRole::compute;
        } else if (role == "storage") {
            node.role = NodeRole::storage;
        } else {
            bad("node " + node.id + ": unknown role '" + role + "'");
        }
        node.endpoint = parse_endpoint(n, node.id,
                                       node.role == NodeRole::compute ? EndpointRole::compute_node
                                                                      : EndpointRole::storage_node);
        node.capacity = parse_spec(n);
        cloud.nodes.push_back(std::move(node));
    }
    return cloud;
}

} // namespace

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        bad(std::string("cannot parse scenario: ") + e.what());
    }

    try {
        Scenario s;
        s.schema_version = j.at("schema_version").get<int>();
        s.seed = j.value("seed", std::uint64_t{0});

        const json& user = j.at("user");
        s.user = parse_endpoint(user, user.at("id").get<std::string>(), EndpointRole::user);

        if (j.contains("network")) {
            const json& net = j.at("network");
            s.default_speed = net.value("default_speed", 1.0);
            for (const auto& l : net.value("links", json::array())) {
                s.links.push_back(LinkSpec{l.at("from").get<std::string>(),
                                           l.at("to").get<std::string>(),
                                           l.at("speed").get<double>()});
            }
        }

        for (const auto& c : j.at("clouds")) s.clouds.push_back(parse_cloud(c));

        for (const auto& t : j.value("templates", json::array())) {
            VmImageTemplate tpl;
            tpl.id = t.at("id").get<std::string>();
            tpl.os = OsKind{t.at("os").get<std::string>()};
            tpl.spec = parse_spec(t);
            s.templates.push_back(std::move(tpl));
        }

        for (const auto& a : j.value("applications", json::array())) {
            AppSpec app;
            app.app.id = a.at("id").get<std::string>();
            app.app.os = OsKind{a.at("os").get<std::string>()};
            app.app.demand = parse_spec(a);
            if (a.contains("colocation_tag") && !a.at("colocation_tag").is_null()) {
                app.app.colocation_tag = a.at("colocation_tag").get<std::string>();
            }
            app.sla_threshold = a.at("sla_threshold").get<double>();
            app.storage.app_id = app.app.id;
            app.storage.storage_node_id = a.at("storage").at("node").get<std::string>();
            app.storage.space_gib = a.at("storage").at("space_gib").get<std::int64_t>();
            if (a.contains("workload")) app.workload = parse_workload(a.at("workload"));
            s.apps.push_back(std::move(app));
        }

        std::string policy = j.value("colocation_policy", std::string{"singleton"});
        if (policy == "singleton") {
            s.colocation_policy = ColocationPolicy::singleton;
        } else if (policy == "by-tag") {
            s.colocation_policy = ColocationPolicy::by_tag;
        } else {
            bad("unknown colocation policy '" + policy + "'");
        }

        s.slice_width = j.at("slice_width").get<double>();
        s.slices = j.at("slices").get<std::size_t>();
        s.replica_throughput = j.at("replica_throughput").get<double>();
        s.requests_per_vm_hour = j.value("requests_per_vm_hour", 1.0);

        if (j.contains("budget")) {
            BudgetCap cap;
            cap.amount = j.at("budget").at("amount").get<double>();
            cap.horizon = j.at("budget").value("horizon", s.slice_width * double(s.slices));
            s.budget = cap;
        }
        if (j.contains("scheduler_mode")) {
            std::string mode = j.at("scheduler_mode").get<std::string>();
            if (mode == "budget-constrained") {
                s.scheduler_mode = SchedulerMode::budget_constrained;
            } else if (mode == "unconstrained") {
                s.scheduler_mode = SchedulerMode::unconstrained;
            } else {
                bad("unknown scheduler mode '" + mode + "'");
            }
        }
        if (j.contains("ha_policy")) {
            s.ha_policy.min_replicas = j.at("ha_policy").value("min_replicas", std::int64_t{2});
        }
        if (j.contains("service_time")) {
            std::string dist = j.at("service_time").at("dist").get<std::string>();
            if (dist == "constant") {
                s.service_time.kind = ServiceTimeModel::Kind::constant;
            } else if (dist == "exponential") {
                s.service_time.kind = ServiceTimeModel::Kind::exponential;
            } else {
                bad("unknown service time distribution '" + dist + "'");
            }
            s.service_time.mean = j.at("service_time").at("mean").get<double>();
        }
        s.bus_latency = j.value("bus_latency", 0.0);
        s.repository_deploy_delay = j.value("repository_deploy_delay", 0.0);

        for (const auto& f : j.value("failures", json::array())) {
            FailureSpec spec;
            spec.time = f.at("time").get<double>();
            spec.app_id = f.at("app").get<std::string>();
            spec.replica = f.value("replica", std::int64_t{0});
            s.failures.push_back(std::move(spec));
        }

        if (j.contains("checklist")) {
            Checklist list;
            for (const auto& item : j.at("checklist")) {
                ChecklistItem ci;
                ci.name = item.at("name").get<std::string>();
                ci.verifiable = item.at("verifiable").get<bool>();
                ci.value = item.value("value", std::string{});
                list.items.push_back(std::move(ci));
            }
            s.checklist = std::move(list);
        }
        return s;
    } catch (const json::exception& e) {
        bad(std::string("malformed scenario: ") + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw SimError(ErrorCode::io_error, "cannot read scenario file " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

} // namespace fedsim
