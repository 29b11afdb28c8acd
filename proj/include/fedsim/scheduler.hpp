#ifndef FEDSIM_SCHEDULER_HPP
#define FEDSIM_SCHEDULER_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fedsim/federation.hpp"
#include "fedsim/infrastructure.hpp"
#include "fedsim/topology.hpp"

namespace fedsim {

// -- Workload slicing under a budget cap --------------------------------------

/// Requests per fixed-width slice of the planning horizon.
struct WorkloadTrace {
    double slice_width = 0.0; // seconds
    std::vector<double> demand;
    std::string pattern_label;
};

struct BudgetCap {
    double amount = 0.0;  // money available for outsourcing
    double horizon = 0.0; // seconds the cap covers
};

struct SliceDecision {
    std::size_t slice = 0;
    double local_share = 0.0;
    double outsourced_share = 0.0;
    double shortfall = 0.0;
    double projected_cost = 0.0;
};

struct OutsourcingPlan {
    std::vector<SliceDecision> slices;
    double total_projected_cost = 0.0;
    double total_shortfall = 0.0;
};

/// Greedy slice-order split of demand into local, outsourced, and
/// shortfall shares. Each slice serves min(demand, local_capacity)
/// locally; the excess is outsourced while the remaining budget covers it
/// at `price_per_request`; the rest is shortfall. The projected cost never
/// exceeds the cap.
OutsourcingPlan plan_outsourcing(const WorkloadTrace& trace, double local_capacity,
                                 double price_per_request, const BudgetCap& budget);

// -- Service mapper ------------------------------------------------------------

struct ReplicaEntry {
    std::string vm_id;
    NetEndpoint endpoint;
    std::string cloud_id;
};

/// Directory from applications to the VM replicas currently hosting them.
class ServiceMap {
public:
    void add(const std::string& app_id, ReplicaEntry entry);
    void remove(const std::string& app_id, const std::string& vm_id);
    void remove_vm(const std::string& vm_id); // drop a vm from every app
    const std::vector<ReplicaEntry>& replicas(const std::string& app_id) const;
    std::vector<std::string> app_ids() const;

private:
    std::map<std::string, std::vector<ReplicaEntry>> entries_;
};

/// All replicas currently registered for an application; empty when the
/// application is unknown.
std::vector<ReplicaEntry> locate(const ServiceMap& map, const std::string& app_id);

// -- Gateway dispatch ----------------------------------------------------------

struct ReplicaStatus {
    std::int64_t outstanding = 0;
    VmState state = VmState::running;
    bool contract_open = true; // meaningful for remote replicas only
};

/// Least-outstanding-requests dispatch over the given replicas, ties by
/// lowest VM id. Failed or terminated replicas and remote replicas without
/// an open contract are ineligible. Throws ServiceUnavailable when no
/// replica qualifies.
ReplicaEntry dispatch(const std::vector<ReplicaEntry>& replicas,
                      const std::function<ReplicaStatus(const ReplicaEntry&)>& status);

// -- Cost calculator -----------------------------------------------------------

struct ContractOpened {
    std::string contract_id;
    double committed = 0.0;
};

struct ContractClosed {
    std::string contract_id;
    double actual_fee = 0.0;
};

struct UsageTick {
    std::string contract_id;
    double additional_committed = 0.0;
};

using BillingEvent = std::variant<ContractOpened, ContractClosed, UsageTick>;

/// Budget ledger preserving spent + committed + remaining == cap. The
/// remaining share is derived, so the identity holds exactly.
class BillingState {
public:
    BillingState() = default;
    explicit BillingState(BudgetCap cap) : cap_(cap) {}

    double cap_amount() const { return cap_.amount; }
    double spent() const { return spent_; }
    double committed() const { return committed_; }
    double remaining() const { return cap_.amount - spent_ - committed_; }
    double committed_for(const std::string& contract_id) const;
    bool knows(const std::string& contract_id) const;

    /// Largest amount that can still be committed.
    double headroom() const { return remaining(); }

    friend BillingState update_billing(BillingState state, const BillingEvent& event);

private:
    BudgetCap cap_;
    double spent_ = 0.0;
    double committed_ = 0.0;
    std::map<std::string, double> per_contract_;
};

/// Applies one billing event and returns the new state. Opening a contract
/// or a usage tick moves money from remaining to committed; closing moves
/// the actual fee to spent and releases the residue. Throws BudgetBreach
/// when an event would make any share negative or push spent past the cap.
BillingState update_billing(BillingState state, const BillingEvent& event);

// -- Capacity planner and virtual resource manager ------------------------------

struct HaPolicy {
    std::int64_t min_replicas = 2;
};

enum class ReplicaActionKind { add_local, add_remote, remove_local, remove_remote };

const char* to_string(ReplicaActionKind kind);

struct ReplicaAction {
    ReplicaActionKind kind;
    std::string vm_id; // set for removals
};

struct CapacityDecision {
    std::vector<ReplicaAction> actions;
    bool degraded = false; // demand exceeds what capacity and budget allow
};

/// Derives replica add/remove actions from the forecast shares of the next
/// slice. Local additions are bounded by residual datacenter capacity
/// (CapacityExceeded becomes a remote-scaling trigger); remote additions
/// by billing headroom when a billing state is given. Removals only target
/// idle replicas and never push the local count below min_replicas.
class CapacityPlanner {
public:
    CapacityPlanner(double replica_throughput, HaPolicy ha_policy);

    struct Inputs {
        double local_forecast = 0.0;     // requests next slice to serve locally
        double outsourced_forecast = 0.0;
        const Datacenter* dc = nullptr;  // home datacenter
        ResourceSpec image_spec;         // spec of the app's image
        std::vector<ReplicaEntry> local_replicas;
        std::vector<ReplicaEntry> remote_replicas;
        std::function<bool(const std::string&)> replica_idle; // vm id -> no outstanding work
        bool contract_open = false;
        const BillingState* billing = nullptr; // null = unconstrained mode
        double remote_cost_per_replica_slice = 0.0;
    };

    CapacityDecision plan(const Inputs& in) const;

    double replica_throughput() const { return replica_throughput_; }
    const HaPolicy& ha_policy() const { return ha_policy_; }

private:
    double replica_throughput_;
    HaPolicy ha_policy_;
};

/// Books simulated remote VMs against federation contracts and accrues
/// their vm-hours into the broker ledger.
class VirtualResourceManager {
public:
    explicit VirtualResourceManager(BrokerLedger& ledger) : ledger_(&ledger) {}

    struct RemoteVm {
        std::string vm_id;
        std::string contract_id;
        std::string provider;
        std::string app_id;
        double started = 0.0;
        double accrued_until = 0.0;
        bool active = true;
    };

    /// Books a remote replica under an active contract whose spec covers
    /// the request. Throws NoActiveContract otherwise. The vm id defaults
    /// to "<provider>:rvm-<n>"; pass one explicitly when the replica is
    /// backed by a concrete instance elsewhere.
    const RemoteVm& scale_out(const ResourceSpec& spec, const std::string& provider,
                              const std::string& app_id, double now, std::string vm_id = {});

    /// Stops a remote replica and accrues its final usage.
    void scale_in(const std::string& vm_id, double now);

    /// Accrues usage of all active remote VMs up to `now`.
    void accrue_all(double now);

    const RemoteVm* find(const std::string& vm_id) const;
    std::vector<const RemoteVm*> active_vms() const;
    /// Active contract id for a provider, if any.
    std::optional<std::string> active_contract(const std::string& provider) const;

private:
    void accrue(RemoteVm& vm, double until);

    BrokerLedger* ledger_;
    std::map<std::string, RemoteVm> vms_;
    std::uint64_t next_ordinal_ = 1;
};

} // namespace fedsim

#endif
