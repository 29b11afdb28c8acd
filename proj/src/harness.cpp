#include "fedsim/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

namespace fedsim {

std::string format_number(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

DifferentiationResult differentiate(const Checklist& checklist) {
    std::set<std::string> seen;
    DifferentiationResult result;
    for (const auto& item : checklist.items) {
        if (!seen.insert(item.name).second) {
            throw SimError(ErrorCode::invalid_checklist, "duplicate checklist item " + item.name);
        }
        (item.verifiable ? result.verified : result.constraints).push_back(item);
    }
    return result;
}

namespace {

bool finite(double v) { return std::isfinite(v); }

void check_endpoint(const NetEndpoint& ep, const std::string& what,
                    std::vector<std::string>& out) {
    if (ep.id.empty()) out.push_back(what + ": empty endpoint id");
    if (!finite(ep.coord.x) || !finite(ep.coord.y)) {
        out.push_back(what + " '" + ep.id + "': coordinates must be finite");
    }
}

} // namespace

std::vector<std::string> validate(const Scenario& s) {
    std::vector<std::string> v;

    if (s.schema_version != 1) {
        v.push_back("unsupported schema_version " + std::to_string(s.schema_version));
    }

    // Clouds and endpoints.
    std::size_t home_count = 0;
    std::set<std::string> cloud_ids;
    std::set<std::string> endpoint_ids;
    check_endpoint(s.user, "user", v);
    endpoint_ids.insert(s.user.id);
    for (const auto& c : s.clouds) {
        if (c.id.empty()) v.push_back("cloud with empty id");
        if (!cloud_ids.insert(c.id).second) v.push_back("duplicate cloud id " + c.id);
        if (c.home) ++home_count;
        check_endpoint(c.gateway.endpoint, "gateway of cloud " + c.id, v);
        if (!endpoint_ids.insert(c.gateway.endpoint.id).second) {
            v.push_back("duplicate endpoint id " + c.gateway.endpoint.id);
        }
        if (!(c.gateway.processing_time >= 0.0) || !finite(c.gateway.processing_time)) {
            v.push_back("cloud " + c.id + ": gateway processing time must be finite and >= 0");
        }
        std::size_t compute = 0;
        for (const auto& n : c.nodes) {
            check_endpoint(n.endpoint, "node of cloud " + c.id, v);
            if (!endpoint_ids.insert(n.id).second) v.push_back("duplicate endpoint id " + n.id);
            if (!n.capacity.positive()) {
                v.push_back("node " + n.id + ": capacity must be strictly positive");
            }
            if (n.role == NodeRole::compute) ++compute;
        }
        if (!c.nodes.empty() && compute == 0) {
            v.push_back("cloud " + c.id + ": no compute nodes");
        }
        if (!c.home) {
            const StatusUpdate& cap = c.capability;
            for (const auto& spec : cap.supported_specs) {
                if (!spec.positive()) {
                    v.push_back("cloud " + c.id + ": capability spec must be strictly positive");
                }
            }
            if (!cap.supported_specs.empty()) {
                if (!(cap.supported_sla > 0.0)) {
                    v.push_back("cloud " + c.id + ": supported SLA must be > 0");
                }
                if (!(cap.contract_duration > 0.0)) {
                    v.push_back("cloud " + c.id + ": contract duration must be > 0");
                }
                if (!(cap.price_per_vm_hour >= 0.0)) {
                    v.push_back("cloud " + c.id + ": price must be >= 0");
                }
                if (compute == 0) {
                    v.push_back("cloud " + c.id + ": offers capacity but has no compute nodes");
                }
            }
            if (c.fed_link.has_value()) {
                if (!(c.fed_link->distance.value >= 0.0) || !(c.fed_link->speed.value > 0.0)) {
                    v.push_back("cloud " + c.id + ": invalid federation link");
                }
            }
        }
    }
    if (home_count != 1) {
        v.push_back("expected exactly one home cloud, found " + std::to_string(home_count));
    }

    // Network.
    if (!(s.default_speed > 0.0) || !finite(s.default_speed)) {
        v.push_back("default network speed must be > 0");
    }
    for (const auto& l : s.links) {
        if (!(l.speed > 0.0) || !finite(l.speed)) {
            v.push_back("link " + l.from + "->" + l.to + ": speed must be > 0");
        }
    }

    // Templates.
    std::set<std::string> template_ids;
    for (const auto& t : s.templates) {
        if (!template_ids.insert(t.id).second) v.push_back("duplicate template id " + t.id);
        if (!t.spec.positive()) v.push_back("template " + t.id + ": spec must be strictly positive");
        if (t.os.name.empty()) v.push_back("template " + t.id + ": empty os name");
    }

    // Applications and storage assignments.
    const CloudSpec* home = s.home_cloud();
    std::set<std::string> app_ids;
    for (const auto& a : s.apps) {
        if (!app_ids.insert(a.app.id).second) v.push_back("duplicate application id " + a.app.id);
        if (!a.app.demand.positive()) {
            v.push_back("application " + a.app.id + ": demand must be strictly positive");
        }
        if (!(a.sla_threshold > 0.0) || !finite(a.sla_threshold)) {
            v.push_back("application " + a.app.id + ": sla threshold must be > 0");
        }
        if (a.storage.space_gib <= 0) {
            v.push_back("application " + a.app.id + ": storage space must be > 0");
        }
        const PhysicalNode* node = nullptr;
        if (home != nullptr) {
            for (const auto& n : home->nodes) {
                if (n.id == a.storage.storage_node_id) node = &n;
            }
        }
        if (node == nullptr || node->role != NodeRole::storage) {
            v.push_back("application " + a.app.id + ": storage assignment refers to missing " +
                        "storage node " + a.storage.storage_node_id);
        }
        if (a.workload.has_value()) {
            try {
                generate(*a.workload, s.slices, s.slice_width > 0.0 ? s.slice_width : 1.0);
            } catch (const SimError& e) {
                v.push_back("application " + a.app.id + ": " + e.what());
            }
        }
    }

    // Run parameters.
    if (!(s.slice_width > 0.0) || !finite(s.slice_width)) v.push_back("slice width must be > 0");
    if (s.slices == 0) v.push_back("scenario needs at least one slice");
    if (!(s.replica_throughput > 0.0)) v.push_back("replica throughput must be > 0");
    if (!(s.requests_per_vm_hour > 0.0)) v.push_back("requests per vm-hour must be > 0");
    if (s.ha_policy.min_replicas < 1) v.push_back("ha min_replicas must be >= 1");
    if (!(s.bus_latency >= 0.0) || !finite(s.bus_latency)) v.push_back("bus latency must be >= 0");
    if (!(s.repository_deploy_delay >= 0.0) || !finite(s.repository_deploy_delay)) {
        v.push_back("repository deploy delay must be >= 0");
    }
    if (!(s.service_time.mean >= 0.0) || !finite(s.service_time.mean)) {
        v.push_back("service time mean must be finite and >= 0");
    }
    if (s.budget.has_value()) {
        if (!(s.budget->amount >= 0.0) || !finite(s.budget->amount)) {
            v.push_back("budget amount must be finite and >= 0");
        }
        if (!(s.budget->horizon > 0.0)) v.push_back("budget horizon must be > 0");
    }
    if (s.effective_mode() == SchedulerMode::budget_constrained && !s.budget.has_value()) {
        v.push_back("budget-constrained mode requires a budget cap");
    }
    for (const auto& f : s.failures) {
        if (!(f.time >= 0.0) || f.time > s.horizon()) {
            v.push_back("failure time " + format_number(f.time) + " outside the horizon");
        }
        if (app_ids.count(f.app_id) == 0) {
            v.push_back("failure refers to unknown application " + f.app_id);
        }
        if (f.replica < 0) v.push_back("failure replica ordinal must be >= 0");
    }
    if (s.checklist.has_value()) {
        try {
            differentiate(*s.checklist);
        } catch (const SimError& e) {
            v.push_back(e.what());
        }
    }

    // The transformation itself must be feasible; dry-run it on a copy.
    if (v.empty() && home != nullptr) {
        Datacenter dry;
        for (const auto& n : home->nodes) dry.add_node(n);
        std::vector<Application> apps;
        std::vector<StorageAssignment> storage;
        for (const auto& a : s.apps) {
            apps.push_back(a.app);
            storage.push_back(a.storage);
        }
        try {
            transform(dry, apps, storage, s.templates, s.colocation_policy);
        } catch (const SimError& e) {
            v.push_back(std::string("transformation infeasible: ") + e.what());
        }
    }
    return v;
}

namespace {

class CsvFile {
public:
    CsvFile(const std::filesystem::path& path, const std::string& header) : out_(path) {
        if (!out_) {
            throw SimError(ErrorCode::io_error, "cannot write " + path.string());
        }
        out_ << header << "\n";
    }

    template <typename... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, out_ << fields), ...);
        out_ << "\n";
    }

    void close_or_throw(const std::filesystem::path& path) {
        out_.flush();
        if (!out_) {
            throw SimError(ErrorCode::io_error, "failed writing " + path.string());
        }
    }

private:
    std::ofstream out_;
};

} // namespace

ReportPaths write_report(const MetricsReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw SimError(ErrorCode::io_error, "cannot create output directory " + dir.string());
    }

    ReportPaths paths;
    paths.requests = dir / "requests.csv";
    paths.summary = dir / "summary.csv";
    paths.plan = dir / "plan.csv";
    paths.decisions = dir / "decisions.csv";
    paths.utilization = dir / "utilization.csv";
    paths.vm_count = dir / "vm_count.csv";
    paths.billing = dir / "billing.csv";

    {
        CsvFile f(paths.requests,
                  "id,app,arrival,path,outcome,user_to_gateway,gateway_processing,federation_hop,"
                  "remote_gateway_processing,gateway_to_vm,vm_processing,vm_to_user,total,"
                  "sla_violated");
        for (const auto& r : report.requests) {
            const LatencyBreakdown& b = r.breakdown;
            f.row(r.id, r.app_id, format_number(r.arrival), r.path, r.outcome,
                  format_number(b.user_to_gateway), format_number(b.gateway_processing),
                  format_number(b.federation_hop), format_number(b.remote_gateway_processing),
                  format_number(b.gateway_to_vm), format_number(b.vm_processing),
                  format_number(b.vm_to_user), format_number(b.total), r.sla_violated ? 1 : 0);
        }
        f.close_or_throw(paths.requests);
    }
    {
        CsvFile f(paths.summary, "metric,value");
        f.row("arrivals", report.arrivals);
        f.row("completions", report.completions);
        f.row("shortfall", report.shortfall);
        f.row("in_flight_at_end", report.in_flight_at_end);
        f.row("sla_violations", report.sla_violation_count);
        f.row("sla_violation_rate", format_number(report.sla_violation_rate));
        f.row("service_unavailable", report.service_unavailable_count);
        f.row("total_cost", format_number(report.total_cost));
        f.row("budget_breaches", report.breaches.size());
        f.row("recovery_count", report.recovery_times.size());
        for (std::size_t i = 0; i < report.recovery_times.size(); ++i) {
            f.row("recovery_time_" + std::to_string(i), format_number(report.recovery_times[i]));
        }
        for (const auto& [app, stats] : report.per_app) {
            f.row(app + ".latency_count", stats.count);
            f.row(app + ".latency_mean", format_number(stats.mean));
            f.row(app + ".latency_p50", format_number(stats.p50));
            f.row(app + ".latency_p95", format_number(stats.p95));
            f.row(app + ".latency_max", format_number(stats.max));
        }
        for (const auto& [bundle, plan] : report.plans) {
            f.row(bundle + ".plan_cost", format_number(plan.total_projected_cost));
            f.row(bundle + ".plan_shortfall", format_number(plan.total_shortfall));
        }
        for (const auto& c : report.contracts) {
            f.row("contract." + c.contract_id + ".provider", c.provider);
            f.row("contract." + c.contract_id + ".price_per_vm_hour",
                  format_number(c.price_per_vm_hour));
            f.row("contract." + c.contract_id + ".vm_hours", format_number(c.vm_hours_used));
        }
        for (const auto& [provider, revenue] : report.provider_revenue) {
            f.row("revenue." + provider, format_number(revenue));
        }
        f.close_or_throw(paths.summary);
    }
    {
        CsvFile f(paths.plan, "bundle,slice,local_share,outsourced_share,shortfall,projected_cost");
        for (const auto& [bundle, plan] : report.plans) {
            for (const auto& d : plan.slices) {
                f.row(bundle, d.slice, format_number(d.local_share),
                      format_number(d.outsourced_share), format_number(d.shortfall),
                      format_number(d.projected_cost));
            }
        }
        f.close_or_throw(paths.plan);
    }
    {
        CsvFile f(paths.decisions, "decision");
        for (const auto& line : report.decisions) f.row(line);
        f.close_or_throw(paths.decisions);
    }
    {
        CsvFile f(paths.utilization, "time,node,cpu_ratio,mem_ratio,disk_ratio");
        for (const auto& u : report.utilization) {
            f.row(format_number(u.time), u.node_id, format_number(u.cpu_ratio),
                  format_number(u.mem_ratio), format_number(u.disk_ratio));
        }
        f.close_or_throw(paths.utilization);
    }
    {
        CsvFile f(paths.vm_count, "time,running_vms");
        for (const auto& c : report.vm_counts) {
            f.row(format_number(c.time), c.running);
        }
        f.close_or_throw(paths.vm_count);
    }
    {
        CsvFile f(paths.billing, "time,spent,committed,remaining");
        for (const auto& b : report.billing) {
            f.row(format_number(b.time), format_number(b.spent), format_number(b.committed),
                  format_number(b.remaining));
        }
        f.close_or_throw(paths.billing);
    }
    return paths;
}

} // namespace fedsim
