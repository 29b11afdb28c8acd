#include "fedsim/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <set>

#include "fedsim/harness.hpp"

namespace fedsim {

const char* to_string(EventKind kind) {
    switch (kind) {
    case EventKind::request_arrival: return "request_arrival";
    case EventKind::dispatch_complete: return "dispatch_complete";
    case EventKind::vm_service_complete: return "vm_service_complete";
    case EventKind::response_delivered: return "response_delivered";
    case EventKind::slice_boundary: return "slice_boundary";
    case EventKind::vm_failure: return "vm_failure";
    case EventKind::vm_recovered: return "vm_recovered";
    case EventKind::bus_delivery: return "bus_delivery";
    case EventKind::contract_timer: return "contract_timer";
    }
    return "unknown";
}

namespace {

struct FailureEntry {
    double time = 0.0;
    bool by_vm_id = false;
    std::string key; // vm id or app id
    std::int64_t replica = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

/// 53-bit uniform in [0, 1); fully specified, so runs are reproducible
/// across platforms.
double u01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

struct RequestState {
    std::uint64_t id = 0;
    std::string app_id;
    std::size_t bundle = 0;
    std::size_t slice = 0;
    double arrival = 0.0;
    enum class Route { undecided, local, remote } route = Route::undecided;
    std::string vm_id;
    LatencyBreakdown breakdown;
    std::string path = "none";
    std::string outcome; // empty until final: completed | killed | shortfall | unavailable
    bool sla_violated = false;
};

struct BundleRuntime {
    std::string id;
    VmBundle bundle;
    VmImageTemplate image;
    double sla = 0.0;
    WorkloadTrace trace;
    std::int64_t ceiling_replicas = 0;
    double local_capacity = 0.0; // requests per slice servable from home
    OutsourcingPlan plan;
    bool plan_ready = false;
    std::optional<ReceivedOffer> chosen_offer;
    std::optional<std::string> contract_id;
    // Admission quotas for the slice in progress, refreshed at its boundary
    // from the replica pools the capacity planner actually built.
    std::int64_t local_quota = 0;
    std::int64_t remote_quota = 0;
    std::int64_t local_used = 0;
    std::int64_t remote_used = 0;
    std::int64_t remote_pending = 0; // admitted remote requests not yet dispatched
};

struct PendingRecovery {
    std::size_t bundle = 0;
    double failure_time = 0.0;
};

struct Run {
    const Scenario& scn;
    std::uint64_t seed;
    const EngineHooks& hooks;
    const std::vector<FailureEntry>& injected;

    std::mt19937_64 rng;
    SpeedTable speeds{NetworkSpeed{1.0}};
    std::string home_id;
    std::map<std::string, Datacenter> dcs; // by cloud id, home included
    std::map<std::string, const CloudSpec*> cloud_specs;

    FederationBus bus{0.0};
    BrokerLedger broker;
    VirtualResourceManager vrm{broker};
    std::optional<BillingState> billing; // absent in unconstrained mode

    ServiceMap smap;
    std::vector<BundleRuntime> bundles;
    std::map<std::string, std::size_t> app_bundle; // app id -> bundle index
    std::map<std::string, std::size_t> vm_bundle;  // vm id -> bundle index
    std::map<std::string, std::int64_t> outstanding;
    std::map<std::string, std::vector<std::size_t>> inflight; // vm -> request indices
    std::set<std::string> draining_vms; // remote vms finishing work after contract end

    std::vector<RequestState> requests;
    std::vector<Delivery> deliveries;
    std::vector<FailureEntry> failures;
    std::vector<PendingRecovery> recoveries;
    std::vector<std::size_t> blocked_recoveries;

    std::vector<ReceivedOffer> offers;
    std::size_t expected_offers = 0;
    std::map<std::string, std::string> offer_owner;    // offer id -> provider
    std::map<std::string, OutsourcingOffer> offer_map; // offer id -> body
    std::set<std::string> confirmed_offers;
    std::map<std::string, std::string> offer_contract; // offer id -> contract id
    std::map<std::string, std::int64_t> contract_completed;
    double plan_budget = 0.0;
    bool constrained = false;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
    std::uint64_t next_seq = 0;
    double now = 0.0;

    MetricsReport rpt;
    std::map<std::string, std::vector<double>> app_samples;

    explicit Run(const Scenario& s, std::uint64_t sd, const EngineHooks& h,
                 const std::vector<FailureEntry>& inj)
        : scn(s), seed(sd), hooks(h), injected(inj), rng(sd),
          speeds(scn.speed_table()), bus(scn.bus_latency) {}

    // -- scheduling helpers --------------------------------------------------

    void schedule(double time, EventKind kind, std::uint64_t ref = 0, std::string target = {}) {
        queue.push(Event{time, next_seq++, kind, ref, std::move(target)});
    }

    void log(const std::string& line) { rpt.decisions.push_back(line); }

    double draw_service_time() {
        if (scn.service_time.kind == ServiceTimeModel::Kind::constant) {
            return scn.service_time.mean;
        }
        return -scn.service_time.mean * std::log1p(-u01(rng));
    }

    const CloudSpec& provider_spec(const std::string& cloud_id) const {
        return *cloud_specs.at(cloud_id);
    }

    FederationLink fed_link_to(const CloudSpec& provider) const {
        if (provider.fed_link.has_value()) return *provider.fed_link;
        const CloudSpec& home = provider_spec(home_id);
        FederationLink link;
        link.distance = distance(home.gateway.endpoint.coord, provider.gateway.endpoint.coord);
        link.speed = speeds.between(home.gateway.endpoint.id, provider.gateway.endpoint.id);
        return link;
    }

    bool contract_active(const BundleRuntime& b) const {
        return b.contract_id.has_value() && broker.phase(*b.contract_id) == ContractPhase::initiated;
    }

    double remote_unit_cost(const BundleRuntime& b) const {
        if (!b.chosen_offer) return 0.0;
        return b.chosen_offer->offer.price_per_vm_hour * scn.slice_width / 3600.0;
    }

    std::vector<ReplicaEntry> replicas_of(const BundleRuntime& b, bool local) const {
        // Every app of a bundle shares the bundle's replicas; use the first.
        std::vector<ReplicaEntry> out;
        for (const auto& r : smap.replicas(b.bundle.app_ids.front())) {
            if ((r.cloud_id == home_id) == local) out.push_back(r);
        }
        return out;
    }

    void publish(const std::string& sender, MessageBody body) {
        FederationMessage msg;
        msg.seq = bus.next_seq(sender);
        msg.sender = sender;
        msg.at = now;
        msg.body = std::move(body);
        for (auto& d : bus.publish(msg)) {
            deliveries.push_back(d);
            schedule(d.at, EventKind::bus_delivery, deliveries.size() - 1);
        }
    }

    // -- setup ----------------------------------------------------------------

    void setup() {
        {
            auto violations = validate(scn);
            if (!violations.empty()) {
                std::string joined;
                for (const auto& v : violations) joined += (joined.empty() ? "" : "; ") + v;
                throw SimError(ErrorCode::invalid_scenario, joined);
            }
        }

        home_id = scn.home_cloud()->id;
        constrained = scn.effective_mode() == SchedulerMode::budget_constrained;
        if (constrained) {
            billing.emplace(*scn.budget);
            plan_budget = scn.budget->amount;
        }

        for (const auto& c : scn.clouds) {
            cloud_specs[c.id] = &c;
            Datacenter dc(c.home ? std::string{} : c.id + ":");
            for (const auto& n : c.nodes) dc.add_node(n);
            dcs.emplace(c.id, std::move(dc));
            bus.register_member(c.id);
        }

        // Transformation of the home inventory (steps 1-6), then HA top-up.
        Datacenter& home = dcs.at(home_id);
        std::vector<Application> apps;
        std::vector<StorageAssignment> storage;
        for (const auto& a : scn.apps) {
            apps.push_back(a.app);
            storage.push_back(a.storage);
        }
        TransformResult tr = transform(home, apps, storage, scn.templates, scn.colocation_policy);

        auto bundle_list = consolidate(classify_by_os(apps), scn.colocation_policy);
        std::sort(bundle_list.begin(), bundle_list.end(),
                  [](const VmBundle& a, const VmBundle& b) { return a.id < b.id; });
        for (auto& b : bundle_list) {
            BundleRuntime rt;
            rt.id = b.id;
            rt.image = tr.plan.images.at(b.id);
            rt.sla = std::numeric_limits<double>::infinity();
            for (const auto& app_id : b.app_ids) {
                app_bundle[app_id] = bundles.size();
                for (const auto& as : scn.apps) {
                    if (as.app.id == app_id) rt.sla = std::min(rt.sla, as.sla_threshold);
                }
            }
            rt.bundle = std::move(b);
            bundles.push_back(std::move(rt));
        }

        for (std::size_t bi = 0; bi < bundles.size(); ++bi) {
            BundleRuntime& b = bundles[bi];
            const std::string& vm_id = tr.bundle_vm.at(b.id);
            register_local_vm(vm_id, bi);
            while (std::int64_t(replicas_of(b, true).size()) < scn.ha_policy.min_replicas) {
                try {
                    VmInstance& vm = home.try_launch(b.image, PlacementPolicy::least_utilized,
                                                     b.bundle.app_ids);
                    register_local_vm(vm.id, bi);
                } catch (const SimError& e) {
                    if (e.code() != ErrorCode::capacity_exceeded) throw;
                    log("t=" + format_number(now) + " degraded bundle=" + b.id +
                        " reason=ha_top_up_capacity");
                    break;
                }
            }
        }

        // Local capacity ceiling per bundle, fixed for the whole run.
        for (auto& b : bundles) {
            b.ceiling_replicas = std::int64_t(replicas_of(b, true).size()) +
                                 home.residual_capacity_for(b.image.spec);
            b.local_capacity = double(b.ceiling_replicas) * scn.replica_throughput;
        }

        // Per-bundle demand traces (sum of member app traces).
        std::map<std::string, WorkloadTrace> app_traces;
        for (const auto& a : scn.apps) {
            if (a.workload.has_value()) {
                app_traces[a.app.id] = generate(*a.workload, scn.slices, scn.slice_width);
            }
        }
        for (auto& b : bundles) {
            b.trace.slice_width = scn.slice_width;
            b.trace.demand.assign(scn.slices, 0.0);
            b.trace.pattern_label = b.id;
            for (const auto& app_id : b.bundle.app_ids) {
                auto it = app_traces.find(app_id);
                if (it == app_traces.end()) continue;
                for (std::size_t s = 0; s < scn.slices; ++s) {
                    b.trace.demand[s] += it->second.demand[s];
                }
            }
        }

        // Providers advertise capabilities and offers right at the start.
        for (const auto& c : scn.clouds) {
            if (c.home) continue;
            publish(c.id, c.capability);
            std::size_t i = 0;
            for (const auto& spec : c.capability.supported_specs) {
                OutsourcingOffer offer;
                offer.offer_id = c.id + "-offer-" + std::to_string(++i);
                offer.spec = spec;
                offer.sla = c.capability.supported_sla;
                offer.duration = c.capability.contract_duration;
                offer.price_per_vm_hour = c.capability.price_per_vm_hour;
                offer_owner[offer.offer_id] = c.id;
                offer_map[offer.offer_id] = offer;
                publish(c.id, offer);
                ++expected_offers;
            }
        }
        if (expected_offers == 0) run_negotiation();

        for (std::size_t s = 0; s <= scn.slices; ++s) {
            schedule(double(s) * scn.slice_width, EventKind::slice_boundary, s);
        }

        // Request arrivals, evenly spaced inside their slice.
        for (const auto& a : scn.apps) {
            auto it = app_traces.find(a.app.id);
            if (it == app_traces.end()) continue;
            for (std::size_t s = 0; s < scn.slices; ++s) {
                auto count = std::llround(it->second.demand[s]);
                for (std::int64_t i = 0; i < count; ++i) {
                    RequestState req;
                    req.id = requests.size();
                    req.app_id = a.app.id;
                    req.bundle = app_bundle.at(a.app.id);
                    req.slice = s;
                    req.arrival = (double(s) + (double(i) + 0.5) / double(count)) * scn.slice_width;
                    schedule(req.arrival, EventKind::request_arrival, requests.size());
                    requests.push_back(std::move(req));
                }
            }
        }

        for (const auto& f : scn.failures) {
            failures.push_back(FailureEntry{f.time, false, f.app_id, f.replica});
        }
        failures.insert(failures.end(), injected.begin(), injected.end());
        for (std::size_t i = 0; i < failures.size(); ++i) {
            schedule(failures[i].time, EventKind::vm_failure, i);
        }
    }

    void register_local_vm(const std::string& vm_id, std::size_t bi) {
        const Datacenter& home = dcs.at(home_id);
        const VmInstance* vm = home.find_vm(vm_id);
        const PhysicalNode* node = home.find_node(vm->host_node_id);
        for (const auto& app_id : bundles[bi].bundle.app_ids) {
            smap.add(app_id, ReplicaEntry{vm_id, node->endpoint, home_id});
        }
        vm_bundle[vm_id] = bi;
        outstanding[vm_id] = 0;
    }

    // -- planning and federation ----------------------------------------------

    void run_negotiation() {
        for (auto& b : bundles) {
            OutsourcingNeed need{b.image.spec, b.sla};
            auto chosen = negotiate(offers, need);
            double price_per_request = 1.0;
            BudgetCap cap{0.0, scn.horizon()};
            if (chosen.has_value()) {
                price_per_request = chosen->offer.price_per_vm_hour / scn.requests_per_vm_hour;
                cap.amount = constrained ? plan_budget : std::numeric_limits<double>::infinity();
            }
            b.plan = plan_outsourcing(b.trace, b.local_capacity, price_per_request, cap);
            b.plan_ready = true;
            if (constrained) plan_budget -= b.plan.total_projected_cost;
            rpt.plans[b.id] = b.plan;

            bool outsources = std::any_of(b.plan.slices.begin(), b.plan.slices.end(),
                                          [](const SliceDecision& d) { return d.outsourced_share > 0.0; });
            if (chosen.has_value() && outsources) {
                b.chosen_offer = chosen;
                log("t=" + format_number(now) + " plan bundle=" + b.id + " provider=" +
                    chosen->provider + " offer=" + chosen->offer.offer_id +
                    " cost=" + format_number(b.plan.total_projected_cost) +
                    " shortfall=" + format_number(b.plan.total_shortfall));
                if (confirmed_offers.insert(chosen->offer.offer_id).second) {
                    broker.confirm_offer(chosen->offer.offer_id);
                    publish(home_id, OutsourcingConfirmation{chosen->offer.offer_id});
                }
            } else {
                log("t=" + format_number(now) + " plan bundle=" + b.id + " provider=none" +
                    " cost=" + format_number(b.plan.total_projected_cost) +
                    " shortfall=" + format_number(b.plan.total_shortfall));
            }
        }
    }

    void on_delivery(const Delivery& d) {
        if (hooks.on_delivery) hooks.on_delivery(d);
        if (d.receiver == home_id) {
            if (const auto* offer = std::get_if<OutsourcingOffer>(&d.msg.body)) {
                offers.push_back(ReceivedOffer{d.msg.sender, *offer});
                broker.record_offer(offers.back());
                if (offers.size() == expected_offers) run_negotiation();
            } else if (const auto* init = std::get_if<ContractInitiation>(&d.msg.body)) {
                on_contract_initiated(*init);
            } else if (const auto* fee = std::get_if<FeeConfirmation>(&d.msg.body)) {
                broker.confirm_fee(fee->contract_id, fee->amount);
                log("t=" + format_number(now) + " fee_confirmed contract=" + fee->contract_id +
                    " amount=" + format_number(fee->amount));
            } else if (const auto* ws = std::get_if<WorkloadStatus>(&d.msg.body)) {
                broker.record_workload_status(*ws);
            }
            return;
        }
        // Provider-side reactions.
        if (const auto* conf = std::get_if<OutsourcingConfirmation>(&d.msg.body)) {
            auto owner = offer_owner.find(conf->offer_id);
            if (owner != offer_owner.end() && owner->second == d.receiver) {
                publish(d.receiver, ContractInitiation{"c-" + conf->offer_id, conf->offer_id});
            }
        } else if (const auto* end = std::get_if<ContractEnd>(&d.msg.body)) {
            const Contract* c = broker.find(end->contract_id);
            if (c != nullptr && c->provider == d.receiver) {
                publish(d.receiver, FeeConfirmation{end->contract_id, broker.due_fee(end->contract_id)});
            }
        }
    }

    void on_contract_initiated(const ContractInitiation& init) {
        broker.initiate(init.contract_id, init.offer_id, home_id, now);
        offer_contract[init.offer_id] = init.contract_id;
        contract_completed[init.contract_id] = 0;
        for (auto& b : bundles) {
            if (b.chosen_offer && b.chosen_offer->offer.offer_id == init.offer_id) {
                b.contract_id = init.contract_id;
            }
        }
        if (billing.has_value()) {
            billing = update_billing(*billing, ContractOpened{init.contract_id, 0.0});
        }
        double duration = offer_map.at(init.offer_id).duration;
        double end_at = std::max(now, std::min(now + duration, scn.horizon()));
        schedule(end_at, EventKind::contract_timer, 0, init.contract_id);
        log("t=" + format_number(now) + " contract_initiated contract=" + init.contract_id +
            " offer=" + init.offer_id);
    }

    void on_contract_timer(const std::string& contract_id) {
        if (broker.phase(contract_id) != ContractPhase::initiated) return;
        vrm.accrue_all(now);
        for (const auto* vm : vrm.active_vms()) {
            if (vm->contract_id == contract_id) retire_remote(vm->vm_id);
        }
        double fee = broker.end_contract(contract_id, now);
        log("t=" + format_number(now) + " contract_ended contract=" + contract_id +
            " fee=" + format_number(fee));
        if (billing.has_value()) {
            try {
                billing = update_billing(*billing, ContractClosed{contract_id, fee});
            } catch (const SimError& e) {
                rpt.breaches.push_back(e.what());
            }
        }
        publish(home_id, ContractEnd{contract_id});
    }

    /// Stops the billing window now; the instance drains in-flight work and
    /// is torn down once idle.
    void retire_remote(const std::string& vm_id) {
        const auto* rvm = vrm.find(vm_id);
        if (rvm == nullptr || !rvm->active) return;
        vrm.scale_in(vm_id, now);
        smap.remove_vm(vm_id);
        auto it = outstanding.find(vm_id);
        if (it == outstanding.end() || it->second == 0) {
            teardown_remote(vm_id);
        } else {
            draining_vms.insert(vm_id);
        }
    }

    void teardown_remote(const std::string& vm_id) {
        dcs.at(vrm.find(vm_id)->provider).terminate(vm_id);
        outstanding.erase(vm_id);
        draining_vms.erase(vm_id);
    }

    // -- capacity planning ----------------------------------------------------

    void on_slice_boundary(std::size_t s) {
        sample_series();
        vrm.accrue_all(now);
        publish_workload_status();
        if (s >= scn.slices) return;

        CapacityPlanner planner(scn.replica_throughput, scn.ha_policy);
        for (std::size_t bi = 0; bi < bundles.size(); ++bi) {
            BundleRuntime& b = bundles[bi];
            double demand = b.trace.demand[s];
            CapacityPlanner::Inputs in;
            in.local_forecast =
                b.plan_ready ? b.plan.slices[s].local_share : std::min(demand, b.local_capacity);
            // Admitted remote requests still in transit to the remote
            // gateway keep their pool alive across the boundary.
            in.outsourced_forecast =
                std::max(b.plan_ready ? b.plan.slices[s].outsourced_share : 0.0,
                         double(b.remote_pending));
            in.dc = &dcs.at(home_id);
            in.image_spec = b.image.spec;
            in.local_replicas = replicas_of(b, true);
            in.remote_replicas = replicas_of(b, false);
            in.replica_idle = [&](const std::string& vm_id) {
                auto it = outstanding.find(vm_id);
                return it == outstanding.end() || it->second == 0;
            };
            in.contract_open = contract_active(b);
            in.billing = billing.has_value() ? &*billing : nullptr;
            in.remote_cost_per_replica_slice = remote_unit_cost(b);

            CapacityDecision decision = planner.plan(in);
            apply_actions(bi, decision);

            if (billing.has_value() && contract_active(b)) {
                double commit = double(replicas_of(b, false).size()) * remote_unit_cost(b);
                if (commit > 0.0) {
                    try {
                        billing = update_billing(*billing, UsageTick{*b.contract_id, commit});
                    } catch (const SimError& e) {
                        rpt.breaches.push_back(e.what());
                    }
                }
            }

            // Admission quotas for this slice track the pools that actually
            // exist, so a shrunken local pool shifts work to the remote one
            // and a budget-capped remote pool turns the rest into shortfall.
            double local_cap_now = double(replicas_of(b, true).size()) * scn.replica_throughput;
            double remote_cap_now = double(replicas_of(b, false).size()) * scn.replica_throughput;
            double shifted = std::max(0.0, in.local_forecast - local_cap_now);
            b.local_quota = std::llround(std::min(in.local_forecast, local_cap_now));
            b.remote_quota =
                std::llround(std::min(in.outsourced_forecast + shifted, remote_cap_now));
            b.local_used = 0;
            b.remote_used = 0;
        }
    }

    void apply_actions(std::size_t bi, const CapacityDecision& decision) {
        BundleRuntime& b = bundles[bi];
        Datacenter& home = dcs.at(home_id);
        for (const auto& action : decision.actions) {
            switch (action.kind) {
            case ReplicaActionKind::add_local: {
                try {
                    VmInstance& vm =
                        home.try_launch(b.image, PlacementPolicy::least_utilized, b.bundle.app_ids);
                    register_local_vm(vm.id, bi);
                    log("t=" + format_number(now) + " add_local bundle=" + b.id + " vm=" + vm.id);
                } catch (const SimError&) {
                    log("t=" + format_number(now) + " degraded bundle=" + b.id +
                        " reason=local_capacity");
                }
                break;
            }
            case ReplicaActionKind::add_remote: {
                try {
                    const std::string& provider = b.chosen_offer->provider;
                    Datacenter& pdc = dcs.at(provider);
                    const Contract* c = broker.find(*b.contract_id);
                    VmImageTemplate remote_image{"contract-" + *b.contract_id, b.bundle.os, c->spec};
                    VmInstance& vm = pdc.try_launch(remote_image, PlacementPolicy::least_utilized,
                                                    b.bundle.app_ids);
                    vrm.scale_out(b.image.spec, provider, b.id, now, vm.id);
                    const PhysicalNode* node = pdc.find_node(vm.host_node_id);
                    for (const auto& app_id : b.bundle.app_ids) {
                        smap.add(app_id, ReplicaEntry{vm.id, node->endpoint, provider});
                    }
                    vm_bundle[vm.id] = bi;
                    outstanding[vm.id] = 0;
                    log("t=" + format_number(now) + " add_remote bundle=" + b.id + " vm=" + vm.id);
                } catch (const SimError&) {
                    log("t=" + format_number(now) + " degraded bundle=" + b.id +
                        " reason=remote_capacity");
                }
                break;
            }
            case ReplicaActionKind::remove_local: {
                home.terminate(action.vm_id);
                smap.remove_vm(action.vm_id);
                outstanding.erase(action.vm_id);
                log("t=" + format_number(now) + " remove_local bundle=" + b.id + " vm=" + action.vm_id);
                retry_blocked_recoveries();
                break;
            }
            case ReplicaActionKind::remove_remote: {
                retire_remote(action.vm_id);
                log("t=" + format_number(now) + " remove_remote bundle=" + b.id +
                    " vm=" + action.vm_id);
                break;
            }
            }
        }
        if (decision.degraded) {
            log("t=" + format_number(now) + " degraded bundle=" + b.id + " reason=scaling_limits");
        }
    }

    void publish_workload_status() {
        for (const auto& contract_id : broker.contract_ids()) {
            if (broker.phase(contract_id) != ContractPhase::initiated) continue;
            std::int64_t pending = 0;
            for (const auto* vm : vrm.active_vms()) {
                if (vm->contract_id == contract_id) pending += outstanding[vm->vm_id];
            }
            WorkloadStatus ws{contract_id, contract_completed[contract_id], pending};
            publish(broker.find(contract_id)->provider, ws);
        }
    }

    void sample_series() {
        for (const auto& c : scn.clouds) {
            const Datacenter& dc = dcs.at(c.id);
            for (const auto& node : dc.nodes()) {
                UtilizationSample u;
                u.time = now;
                u.node_id = node.id;
                u.cpu_ratio = node.capacity.cpu > 0 ? double(node.used.cpu) / double(node.capacity.cpu) : 0.0;
                u.mem_ratio = node.capacity.mem_mib > 0
                                  ? double(node.used.mem_mib) / double(node.capacity.mem_mib)
                                  : 0.0;
                u.disk_ratio = node.capacity.disk_gib > 0
                                   ? double(node.used.disk_gib) / double(node.capacity.disk_gib)
                                   : 0.0;
                rpt.utilization.push_back(u);
            }
        }
        std::int64_t running = 0;
        for (const auto& [id, dc] : dcs) running += std::int64_t(dc.running_count());
        rpt.vm_counts.push_back(VmCountSample{now, running});
        if (billing.has_value()) {
            rpt.billing.push_back(
                BillingSample{now, billing->spent(), billing->committed(), billing->remaining()});
        }
    }

    // -- request lifecycle ----------------------------------------------------

    void on_arrival(std::size_t ri) {
        RequestState& req = requests[ri];
        BundleRuntime& b = bundles[req.bundle];

        const CloudSpec& home = provider_spec(home_id);
        if (b.local_used < b.local_quota) {
            b.local_used++;
            req.route = RequestState::Route::local;
            double at_gateway = req.arrival +
                                transfer_time(distance(scn.user.coord, home.gateway.endpoint.coord),
                                              speeds.between(scn.user.id, home.gateway.endpoint.id)) +
                                home.gateway.processing_time;
            schedule(at_gateway, EventKind::dispatch_complete, ri);
            return;
        }
        if (b.remote_used < b.remote_quota) {
            b.remote_used++;
            if (!contract_active(b)) {
                finish(req, "unavailable");
                rpt.service_unavailable_count++;
                return;
            }
            b.remote_pending++;
            req.route = RequestState::Route::remote;
            const CloudSpec& provider = provider_spec(b.chosen_offer->provider);
            double at_gateway;
            if (provider.federation == FederationMode::restrained) {
                at_gateway = req.arrival +
                             transfer_time(distance(scn.user.coord, home.gateway.endpoint.coord),
                                           speeds.between(scn.user.id, home.gateway.endpoint.id)) +
                             home.gateway.processing_time;
            } else {
                at_gateway =
                    req.arrival +
                    transfer_time(distance(scn.user.coord, provider.gateway.endpoint.coord),
                                  speeds.between(scn.user.id, provider.gateway.endpoint.id)) +
                    provider.gateway.processing_time;
            }
            schedule(at_gateway, EventKind::dispatch_complete, ri);
            return;
        }
        finish(req, "shortfall");
    }

    void on_dispatch(std::size_t ri) {
        RequestState& req = requests[ri];
        if (!req.outcome.empty()) return;
        BundleRuntime& b = bundles[req.bundle];
        bool local = req.route == RequestState::Route::local;
        if (!local && b.remote_pending > 0) b.remote_pending--;

        ReplicaEntry chosen;
        try {
            chosen = dispatch(replicas_of(b, local), [&](const ReplicaEntry& r) {
                ReplicaStatus st;
                auto it = outstanding.find(r.vm_id);
                st.outstanding = it == outstanding.end() ? 0 : it->second;
                if (r.cloud_id == home_id) {
                    const VmInstance* vm = dcs.at(home_id).find_vm(r.vm_id);
                    st.state = vm == nullptr ? VmState::terminated : vm->state;
                    st.contract_open = true;
                } else {
                    const auto* rvm = vrm.find(r.vm_id);
                    bool usable = rvm != nullptr && rvm->active && draining_vms.count(r.vm_id) == 0;
                    st.state = usable ? VmState::running : VmState::terminated;
                    st.contract_open = contract_active(b);
                }
                return st;
            });
        } catch (const SimError& e) {
            if (e.code() != ErrorCode::service_unavailable) throw;
            finish(req, "unavailable");
            rpt.service_unavailable_count++;
            return;
        }

        req.vm_id = chosen.vm_id;
        outstanding[chosen.vm_id]++;
        inflight[chosen.vm_id].push_back(ri);

        double t_v = draw_service_time();
        VmProfile vm_profile{chosen.endpoint, t_v};
        const CloudSpec& home = provider_spec(home_id);
        if (local) {
            req.path = "private";
            req.breakdown = provision_private(scn.user, home.gateway, vm_profile, speeds);
        } else {
            const CloudSpec& provider = provider_spec(chosen.cloud_id);
            if (provider.federation == FederationMode::restrained) {
                req.path = "restrained";
                req.breakdown = provision_restrained(scn.user, home.gateway, fed_link_to(provider),
                                                     provider.gateway, vm_profile, speeds);
            } else {
                req.path = "full";
                req.breakdown = provision_full(scn.user, provider.gateway, vm_profile, speeds);
            }
        }
        schedule(req.arrival + req.breakdown.total - req.breakdown.vm_to_user,
                 EventKind::vm_service_complete, ri);
    }

    void on_service_complete(std::size_t ri) {
        RequestState& req = requests[ri];
        if (!req.outcome.empty()) return; // killed while in flight
        auto it = outstanding.find(req.vm_id);
        if (it != outstanding.end() && it->second > 0) it->second--;
        auto& fl = inflight[req.vm_id];
        fl.erase(std::remove(fl.begin(), fl.end(), ri), fl.end());
        if (draining_vms.count(req.vm_id) != 0 && it != outstanding.end() && it->second == 0) {
            teardown_remote(req.vm_id);
        }
        schedule(now + req.breakdown.vm_to_user, EventKind::response_delivered, ri);
    }

    void on_delivered(std::size_t ri) {
        RequestState& req = requests[ri];
        if (!req.outcome.empty()) return;
        req.outcome = "completed";
        req.sla_violated = req.breakdown.total > bundles[req.bundle].sla;
        app_samples[req.app_id].push_back(req.breakdown.total);
        if (req.sla_violated) rpt.sla_violation_count++;
        if (req.route == RequestState::Route::remote) {
            BundleRuntime& b = bundles[req.bundle];
            if (b.contract_id.has_value()) {
                contract_completed[*b.contract_id]++;
                if (req.sla_violated) broker.record_sla_violation(*b.contract_id);
            }
        }
    }

    void finish(RequestState& req, const std::string& outcome) { req.outcome = outcome; }

    // -- failures and recovery --------------------------------------------------

    void on_failure(std::size_t fi) {
        const FailureEntry& f = failures[fi];
        std::string victim;
        if (f.by_vm_id) {
            const VmInstance* vm = dcs.at(home_id).find_vm(f.key);
            if (vm == nullptr || vm->state != VmState::running) {
                throw SimError(ErrorCode::unknown_vm, "failure target " + f.key + " is not running");
            }
            victim = f.key;
        } else {
            auto it = app_bundle.find(f.key);
            if (it == app_bundle.end()) {
                log("t=" + format_number(now) + " failure_skipped app=" + f.key);
                return;
            }
            auto replicas = replicas_of(bundles[it->second], true);
            std::sort(replicas.begin(), replicas.end(),
                      [](const ReplicaEntry& a, const ReplicaEntry& b) { return a.vm_id < b.vm_id; });
            if (f.replica < 0 || std::size_t(f.replica) >= replicas.size()) {
                log("t=" + format_number(now) + " failure_skipped app=" + f.key);
                return;
            }
            victim = replicas[std::size_t(f.replica)].vm_id;
        }

        std::size_t bi = vm_bundle.at(victim);
        dcs.at(home_id).mark_failed(victim);
        smap.remove_vm(victim);
        log("t=" + format_number(now) + " vm_failed vm=" + victim + " bundle=" + bundles[bi].id);

        for (std::size_t ri : inflight[victim]) {
            RequestState& req = requests[ri];
            if (!req.outcome.empty()) continue;
            req.outcome = "killed";
            req.sla_violated = true;
            rpt.sla_violation_count++;
        }
        inflight[victim].clear();
        outstanding.erase(victim);

        recoveries.push_back(PendingRecovery{bi, now});
        schedule(now + scn.repository_deploy_delay, EventKind::vm_recovered, recoveries.size() - 1);
    }

    void on_recovery(std::size_t rec_idx) {
        const PendingRecovery& rec = recoveries[rec_idx];
        BundleRuntime& b = bundles[rec.bundle];
        try {
            VmInstance& vm = dcs.at(home_id).try_launch(b.image, PlacementPolicy::least_utilized,
                                                        b.bundle.app_ids);
            register_local_vm(vm.id, rec.bundle);
            rpt.recovery_times.push_back(now - rec.failure_time);
            log("t=" + format_number(now) + " vm_recovered vm=" + vm.id + " bundle=" + b.id +
                " recovery_time=" + format_number(now - rec.failure_time));
        } catch (const SimError& e) {
            if (e.code() != ErrorCode::capacity_exceeded) throw;
            blocked_recoveries.push_back(rec_idx); // wait for a termination
        }
    }

    void retry_blocked_recoveries() {
        std::vector<std::size_t> blocked;
        blocked.swap(blocked_recoveries);
        for (std::size_t idx : blocked) {
            schedule(now, EventKind::vm_recovered, idx);
        }
    }

    // -- main loop ---------------------------------------------------------------

    MetricsReport go() {
        setup();
        while (!queue.empty()) {
            Event ev = queue.top();
            queue.pop();
            now = ev.time;
            if (hooks.on_event) hooks.on_event(ev);
            switch (ev.kind) {
            case EventKind::request_arrival: on_arrival(ev.ref); break;
            case EventKind::dispatch_complete: on_dispatch(ev.ref); break;
            case EventKind::vm_service_complete: on_service_complete(ev.ref); break;
            case EventKind::response_delivered: on_delivered(ev.ref); break;
            case EventKind::slice_boundary: on_slice_boundary(ev.ref); break;
            case EventKind::vm_failure: on_failure(ev.ref); break;
            case EventKind::vm_recovered: on_recovery(ev.ref); break;
            case EventKind::bus_delivery: on_delivery(deliveries[ev.ref]); break;
            case EventKind::contract_timer: on_contract_timer(ev.target); break;
            }
        }
        finalize();
        return std::move(rpt);
    }

    void finalize() {
        rpt.arrivals = std::int64_t(requests.size());
        for (auto& req : requests) {
            if (req.outcome.empty()) {
                req.outcome = "in_flight";
                rpt.in_flight_at_end++;
            } else if (req.outcome == "completed") {
                rpt.completions++;
            } else {
                rpt.shortfall++;
            }
            RequestRecord rec;
            rec.id = req.id;
            rec.app_id = req.app_id;
            rec.arrival = req.arrival;
            rec.path = req.path;
            rec.outcome = req.outcome;
            rec.breakdown = req.breakdown;
            rec.sla_violated = req.sla_violated;
            rpt.requests.push_back(std::move(rec));
        }
        for (const auto& [app, samples] : app_samples) {
            rpt.per_app[app] = latency_stats(samples);
        }
        for (const auto& a : scn.apps) {
            if (rpt.per_app.count(a.app.id) == 0) rpt.per_app[a.app.id] = LatencyStats{};
        }
        rpt.sla_violation_rate =
            rpt.completions > 0 ? double(rpt.sla_violation_count) / double(rpt.completions) : 0.0;
        for (const auto& contract_id : broker.contract_ids()) {
            rpt.contracts.push_back(*broker.find(contract_id));
            rpt.fees_confirmed[contract_id] = broker.fees_confirmed(contract_id);
            if (broker.phase(contract_id) == ContractPhase::ended) {
                rpt.total_cost += broker.due_fee(contract_id);
            }
        }
        for (const auto& provider : broker.provider_ids()) {
            rpt.provider_revenue[provider] = broker.revenue(provider);
        }
        if (billing.has_value()) {
            // closing sample after contract settlement
            rpt.billing.push_back(
                BillingSample{now, billing->spent(), billing->committed(), billing->remaining()});
        }
    }
};

} // namespace

struct SimEngine::State {
    Scenario scenario;
    std::uint64_t seed = 0;
    EngineHooks hooks;
    std::vector<FailureEntry> injected;
};

SimEngine::SimEngine(Scenario scenario, std::uint64_t seed) : state_(std::make_unique<State>()) {
    state_->scenario = std::move(scenario);
    state_->seed = seed;
}

SimEngine::~SimEngine() = default;
SimEngine::SimEngine(SimEngine&&) noexcept = default;
SimEngine& SimEngine::operator=(SimEngine&&) noexcept = default;

void SimEngine::inject_failure(double time, const std::string& vm_id) {
    state_->injected.push_back(FailureEntry{time, true, vm_id, 0});
}

void SimEngine::set_hooks(EngineHooks hooks) { state_->hooks = std::move(hooks); }

MetricsReport SimEngine::run() {
    Run run(state_->scenario, state_->seed, state_->hooks, state_->injected);
    return run.go();
}

MetricsReport run_scenario(const Scenario& scenario, std::uint64_t seed) {
    SimEngine engine(scenario, seed);
    return engine.run();
}

} // namespace fedsim
