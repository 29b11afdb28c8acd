#include "fedsim/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace fedsim {

namespace {
constexpr double kMoneyEps = 1e-9;
} // namespace

OutsourcingPlan plan_outsourcing(const WorkloadTrace& trace, double local_capacity,
                                 double price_per_request, const BudgetCap& budget) {
    if (!(local_capacity >= 0.0)) {
        throw SimError(ErrorCode::invalid_scenario, "local capacity must be >= 0");
    }
    if (!(price_per_request >= 0.0)) {
        throw SimError(ErrorCode::invalid_scenario, "outsourcing price must be >= 0");
    }

    OutsourcingPlan plan;
    double total = 0.0;
    for (std::size_t i = 0; i < trace.demand.size(); ++i) {
        double demand = trace.demand[i];
        double remaining = budget.amount - total;
        SliceDecision d;
        d.slice = i;
        d.local_share = std::min(demand, local_capacity);
        double excess = demand - d.local_share;
        if (excess > 0.0) {
            if (price_per_request == 0.0) {
                d.outsourced_share = excess;
            } else {
                d.outsourced_share = std::min(excess, remaining / price_per_request);
                double cost = d.outsourced_share * price_per_request;
                // Nudge the stored cost down until the running total cannot
                // overshoot the cap by rounding.
                while (total + cost > budget.amount && cost > 0.0) {
                    cost = std::nextafter(cost, 0.0);
                }
                d.projected_cost = std::max(cost, 0.0);
            }
            d.shortfall = excess - d.outsourced_share;
        }
        total += d.projected_cost;
        plan.total_shortfall += d.shortfall;
        plan.slices.push_back(d);
    }
    plan.total_projected_cost = total;
    return plan;
}

void ServiceMap::add(const std::string& app_id, ReplicaEntry entry) {
    entries_[app_id].push_back(std::move(entry));
}

void ServiceMap::remove(const std::string& app_id, const std::string& vm_id) {
    auto it = entries_.find(app_id);
    if (it == entries_.end()) return;
    auto& v = it->second;
    v.erase(std::remove_if(v.begin(), v.end(),
                           [&](const ReplicaEntry& e) { return e.vm_id == vm_id; }),
            v.end());
}

void ServiceMap::remove_vm(const std::string& vm_id) {
    for (auto& [app, v] : entries_) {
        v.erase(std::remove_if(v.begin(), v.end(),
                               [&](const ReplicaEntry& e) { return e.vm_id == vm_id; }),
                v.end());
    }
}

const std::vector<ReplicaEntry>& ServiceMap::replicas(const std::string& app_id) const {
    static const std::vector<ReplicaEntry> empty;
    auto it = entries_.find(app_id);
    return it == entries_.end() ? empty : it->second;
}

std::vector<std::string> ServiceMap::app_ids() const {
    std::vector<std::string> ids;
    ids.reserve(entries_.size());
    for (const auto& [id, v] : entries_) ids.push_back(id);
    return ids;
}

std::vector<ReplicaEntry> locate(const ServiceMap& map, const std::string& app_id) {
    return map.replicas(app_id);
}

ReplicaEntry dispatch(const std::vector<ReplicaEntry>& replicas,
                      const std::function<ReplicaStatus(const ReplicaEntry&)>& status) {
    const ReplicaEntry* best = nullptr;
    std::int64_t best_outstanding = 0;
    for (const auto& r : replicas) {
        ReplicaStatus s = status(r);
        if (s.state != VmState::running || !s.contract_open) continue;
        if (best == nullptr || s.outstanding < best_outstanding ||
            (s.outstanding == best_outstanding && r.vm_id < best->vm_id)) {
            best = &r;
            best_outstanding = s.outstanding;
        }
    }
    if (best == nullptr) {
        throw SimError(ErrorCode::service_unavailable, "no eligible replica");
    }
    return *best;
}

double BillingState::committed_for(const std::string& contract_id) const {
    auto it = per_contract_.find(contract_id);
    return it == per_contract_.end() ? 0.0 : it->second;
}

bool BillingState::knows(const std::string& contract_id) const {
    return per_contract_.count(contract_id) != 0;
}

BillingState update_billing(BillingState state, const BillingEvent& event) {
    struct Visitor {
        BillingState& s;

        void commit(const std::string& contract_id, double amount) const {
            if (amount < 0.0) {
                throw SimError(ErrorCode::budget_breach, "negative commitment");
            }
            if (amount > s.remaining() + kMoneyEps) {
                throw SimError(ErrorCode::budget_breach,
                               "commitment exceeds remaining budget for " + contract_id);
            }
            s.committed_ += amount;
            s.per_contract_[contract_id] += amount;
        }

        void operator()(const ContractOpened& e) const { commit(e.contract_id, e.committed); }
        void operator()(const UsageTick& e) const {
            if (s.per_contract_.count(e.contract_id) == 0) {
                throw SimError(ErrorCode::unknown_contract,
                               "usage tick for unknown contract " + e.contract_id);
            }
            commit(e.contract_id, e.additional_committed);
        }
        void operator()(const ContractClosed& e) const {
            auto it = s.per_contract_.find(e.contract_id);
            if (it == s.per_contract_.end()) {
                throw SimError(ErrorCode::unknown_contract,
                               "closing unknown contract " + e.contract_id);
            }
            if (e.actual_fee < 0.0) {
                throw SimError(ErrorCode::budget_breach, "negative fee");
            }
            double committed = it->second;
            s.per_contract_.erase(it);
            s.committed_ -= committed;
            s.spent_ += e.actual_fee;
            if (s.spent_ > s.cap_.amount + kMoneyEps || s.remaining() < -kMoneyEps) {
                throw SimError(ErrorCode::budget_breach,
                               "closing " + e.contract_id + " pushes spending past the cap");
            }
        }
    };
    std::visit(Visitor{state}, event);
    return state;
}

const char* to_string(ReplicaActionKind kind) {
    switch (kind) {
    case ReplicaActionKind::add_local: return "add_local";
    case ReplicaActionKind::add_remote: return "add_remote";
    case ReplicaActionKind::remove_local: return "remove_local";
    case ReplicaActionKind::remove_remote: return "remove_remote";
    }
    return "unknown";
}

CapacityPlanner::CapacityPlanner(double replica_throughput, HaPolicy ha_policy)
    : replica_throughput_(replica_throughput), ha_policy_(ha_policy) {
    if (!(replica_throughput > 0.0)) {
        throw SimError(ErrorCode::invalid_scenario, "replica throughput must be > 0");
    }
}

CapacityDecision CapacityPlanner::plan(const Inputs& in) const {
    CapacityDecision decision;

    auto replicas_for = [&](double requests) {
        return requests <= 0.0 ? std::int64_t{0}
                               : static_cast<std::int64_t>(std::ceil(requests / replica_throughput_));
    };

    std::int64_t local_now = static_cast<std::int64_t>(in.local_replicas.size());
    std::int64_t local_target =
        std::max<std::int64_t>(ha_policy_.min_replicas, replicas_for(in.local_forecast));

    double outsourced_requests = in.outsourced_forecast;
    if (local_target > local_now) {
        std::int64_t want = local_target - local_now;
        std::int64_t addable =
            in.dc != nullptr ? in.dc->residual_capacity_for(in.image_spec) : want;
        std::int64_t adds = std::min(want, addable);
        for (std::int64_t i = 0; i < adds; ++i) {
            decision.actions.push_back({ReplicaActionKind::add_local, {}});
        }
        if (adds < want) {
            // Local capacity is exhausted: shift the unserved share to the
            // remote pool instead of failing.
            outsourced_requests += double(want - adds) * replica_throughput_;
        }
    }

    std::int64_t remote_now = static_cast<std::int64_t>(in.remote_replicas.size());
    std::int64_t remote_target = replicas_for(outsourced_requests);
    if (in.billing != nullptr && in.remote_cost_per_replica_slice > 0.0) {
        // One slice of every remote replica, kept or added, must stay
        // payable from the remaining budget.
        double ratio = in.billing->headroom() / in.remote_cost_per_replica_slice + kMoneyEps;
        std::int64_t payable = ratio <= 0.0 ? 0
                               : ratio >= 1e15
                                   ? std::int64_t{1} << 50
                                   : static_cast<std::int64_t>(std::floor(ratio));
        if (payable < remote_target) {
            remote_target = payable;
            decision.degraded = true;
        }
    }
    if (remote_target > remote_now) {
        if (!in.contract_open) {
            decision.degraded = true;
            remote_target = remote_now;
        } else {
            for (std::int64_t i = 0; i < remote_target - remote_now; ++i) {
                decision.actions.push_back({ReplicaActionKind::add_remote, {}});
            }
        }
    }

    auto plan_removals = [&](const std::vector<ReplicaEntry>& replicas, std::int64_t target,
                             ReplicaActionKind kind, bool idle_only) {
        std::int64_t now = static_cast<std::int64_t>(replicas.size());
        if (target >= now) return;
        std::vector<std::string> ids;
        for (const auto& r : replicas) {
            if (!idle_only || !in.replica_idle || in.replica_idle(r.vm_id)) ids.push_back(r.vm_id);
        }
        std::sort(ids.rbegin(), ids.rend()); // youngest ids go first
        std::int64_t removals = std::min<std::int64_t>(now - target, ids.size());
        for (std::int64_t i = 0; i < removals; ++i) {
            decision.actions.push_back({kind, ids[static_cast<std::size_t>(i)]});
        }
    };
    // Local removals wait for idle replicas; remote ones may retire while
    // draining, since their billing window closes with the slice.
    plan_removals(in.local_replicas, std::max(local_target, ha_policy_.min_replicas),
                  ReplicaActionKind::remove_local, true);
    plan_removals(in.remote_replicas, remote_target, ReplicaActionKind::remove_remote, false);

    return decision;
}

const VirtualResourceManager::RemoteVm&
VirtualResourceManager::scale_out(const ResourceSpec& spec, const std::string& provider,
                                  const std::string& app_id, double now, std::string vm_id) {
    std::optional<std::string> contract_id;
    for (const auto& id : ledger_->contract_ids()) {
        const Contract* c = ledger_->find(id);
        if (c->provider == provider && ledger_->phase(id) == ContractPhase::initiated &&
            c->spec.dominates(spec)) {
            if (!contract_id || id < *contract_id) contract_id = id;
        }
    }
    if (!contract_id) {
        throw SimError(ErrorCode::no_active_contract,
                       "no active contract with provider " + provider + " covers the spec");
    }

    RemoteVm vm;
    vm.vm_id = vm_id.empty() ? provider + ":rvm-" + std::to_string(next_ordinal_++) : std::move(vm_id);
    vm.contract_id = *contract_id;
    vm.provider = provider;
    vm.app_id = app_id;
    vm.started = now;
    vm.accrued_until = now;
    auto [it, inserted] = vms_.emplace(vm.vm_id, std::move(vm));
    return it->second;
}

void VirtualResourceManager::accrue(RemoteVm& vm, double until) {
    if (until <= vm.accrued_until) return;
    if (ledger_->phase(vm.contract_id) != ContractPhase::initiated) {
        vm.accrued_until = until; // contract already closed; usage no longer billable
        return;
    }
    double hours = (until - vm.accrued_until) / 3600.0;
    ledger_->accrue_vm_hours(vm.contract_id, hours);
    vm.accrued_until = until;
}

void VirtualResourceManager::scale_in(const std::string& vm_id, double now) {
    auto it = vms_.find(vm_id);
    if (it == vms_.end() || !it->second.active) {
        throw SimError(ErrorCode::unknown_vm, "no active remote vm " + vm_id);
    }
    accrue(it->second, now);
    it->second.active = false;
}

void VirtualResourceManager::accrue_all(double now) {
    for (auto& [id, vm] : vms_) {
        if (vm.active) accrue(vm, now);
    }
}

const VirtualResourceManager::RemoteVm* VirtualResourceManager::find(const std::string& vm_id) const {
    auto it = vms_.find(vm_id);
    return it == vms_.end() ? nullptr : &it->second;
}

std::vector<const VirtualResourceManager::RemoteVm*> VirtualResourceManager::active_vms() const {
    std::vector<const RemoteVm*> out;
    for (const auto& [id, vm] : vms_) {
        if (vm.active) out.push_back(&vm);
    }
    return out;
}

std::optional<std::string> VirtualResourceManager::active_contract(const std::string& provider) const {
    std::optional<std::string> best;
    for (const auto& id : ledger_->contract_ids()) {
        const Contract* c = ledger_->find(id);
        if (c->provider == provider && ledger_->phase(id) == ContractPhase::initiated) {
            if (!best || id < *best) best = id;
        }
    }
    return best;
}

} // namespace fedsim
