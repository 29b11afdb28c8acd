#include "fedsim/federation.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace fedsim {

const char* message_kind(const MessageBody& body) {
    struct Visitor {
        const char* operator()(const StatusUpdate&) const { return "status_update"; }
        const char* operator()(const WorkloadStatus&) const { return "workload_status"; }
        const char* operator()(const OutsourcingOffer&) const { return "outsourcing_offer"; }
        const char* operator()(const OutsourcingConfirmation&) const { return "outsourcing_confirmation"; }
        const char* operator()(const ContractInitiation&) const { return "contract_initiation"; }
        const char* operator()(const ContractEnd&) const { return "contract_end"; }
        const char* operator()(const FeeConfirmation&) const { return "fee_confirmation"; }
    };
    return std::visit(Visitor{}, body);
}

const char* to_string(ContractPhase phase) {
    switch (phase) {
    case ContractPhase::offered: return "offered";
    case ContractPhase::confirmed: return "confirmed";
    case ContractPhase::initiated: return "initiated";
    case ContractPhase::ended: return "ended";
    }
    return "unknown";
}

FederationBus::FederationBus(double latency) : latency_(latency) {
    if (latency < 0.0 || !std::isfinite(latency)) {
        throw SimError(ErrorCode::invalid_scenario, "bus latency must be finite and >= 0");
    }
}

void FederationBus::register_member(const std::string& cloud_id) {
    if (is_member(cloud_id)) {
        throw SimError(ErrorCode::invalid_scenario, "duplicate bus member " + cloud_id);
    }
    members_.push_back(cloud_id);
    std::sort(members_.begin(), members_.end());
}

bool FederationBus::is_member(const std::string& cloud_id) const {
    return std::find(members_.begin(), members_.end(), cloud_id) != members_.end();
}

std::uint64_t FederationBus::next_seq(const std::string& sender) const {
    auto it = last_seq_.find(sender);
    return it == last_seq_.end() ? 1 : it->second + 1;
}

std::vector<Delivery> FederationBus::publish(const FederationMessage& msg) {
    if (!is_member(msg.sender)) {
        throw SimError(ErrorCode::not_a_member, "sender " + msg.sender + " is not a bus member");
    }
    auto it = last_seq_.find(msg.sender);
    if (it != last_seq_.end() && msg.seq <= it->second) {
        throw SimError(ErrorCode::invalid_scenario,
                       "sequence number for " + msg.sender + " must be strictly increasing");
    }
    last_seq_[msg.sender] = msg.seq;

    std::vector<Delivery> deliveries;
    for (const auto& member : members_) {
        if (member == msg.sender) continue;
        deliveries.push_back(Delivery{member, msg.at + latency_, msg});
    }
    trace_.insert(trace_.end(), deliveries.begin(), deliveries.end());
    return deliveries;
}

std::optional<ReceivedOffer> negotiate(const std::vector<ReceivedOffer>& offers,
                                       const OutsourcingNeed& need) {
    const ReceivedOffer* best = nullptr;
    for (const auto& ro : offers) {
        if (!ro.offer.spec.dominates(need.spec) || ro.offer.sla > need.sla) continue;
        if (best == nullptr) {
            best = &ro;
            continue;
        }
        if (ro.offer.price_per_vm_hour < best->offer.price_per_vm_hour ||
            (ro.offer.price_per_vm_hour == best->offer.price_per_vm_hour &&
             std::tie(ro.provider, ro.offer.offer_id) <
                 std::tie(best->provider, best->offer.offer_id))) {
            best = &ro;
        }
    }
    if (best == nullptr) return std::nullopt;
    return *best;
}

BrokerLedger::ContractRecord& BrokerLedger::record(const std::string& contract_id) {
    auto it = contracts_.find(contract_id);
    if (it == contracts_.end()) {
        throw SimError(ErrorCode::unknown_contract, "unknown contract " + contract_id);
    }
    return it->second;
}

const BrokerLedger::ContractRecord& BrokerLedger::record(const std::string& contract_id) const {
    auto it = contracts_.find(contract_id);
    if (it == contracts_.end()) {
        throw SimError(ErrorCode::unknown_contract, "unknown contract " + contract_id);
    }
    return it->second;
}

void BrokerLedger::record_offer(const ReceivedOffer& offer) {
    if (offers_.count(offer.offer.offer_id) != 0) {
        throw SimError(ErrorCode::invalid_transition,
                       "offer " + offer.offer.offer_id + " already recorded");
    }
    offers_.emplace(offer.offer.offer_id, OfferRecord{offer});
}

void BrokerLedger::confirm_offer(const std::string& offer_id) {
    auto it = offers_.find(offer_id);
    if (it == offers_.end()) {
        throw SimError(ErrorCode::unknown_contract, "unknown offer " + offer_id);
    }
    if (it->second.confirmed) {
        throw SimError(ErrorCode::invalid_transition, "offer " + offer_id + " already confirmed");
    }
    it->second.confirmed = true;
}

Contract& BrokerLedger::initiate(const std::string& contract_id, const std::string& offer_id,
                                 const std::string& consumer, double start) {
    auto it = offers_.find(offer_id);
    if (it == offers_.end()) {
        throw SimError(ErrorCode::unknown_contract, "unknown offer " + offer_id);
    }
    if (!it->second.confirmed || it->second.consumed) {
        throw SimError(ErrorCode::invalid_transition,
                       "offer " + offer_id + " is not in a confirmable state for initiation");
    }
    if (contracts_.count(contract_id) != 0) {
        throw SimError(ErrorCode::invalid_transition, "contract " + contract_id + " already exists");
    }
    it->second.consumed = true;

    ContractRecord rec;
    rec.contract.contract_id = contract_id;
    rec.contract.provider = it->second.offer.provider;
    rec.contract.consumer = consumer;
    rec.contract.spec = it->second.offer.offer.spec;
    rec.contract.sla = it->second.offer.offer.sla;
    rec.contract.price_per_vm_hour = it->second.offer.offer.price_per_vm_hour;
    rec.contract.start = start;
    rec.phase = ContractPhase::initiated;
    auto [cit, inserted] = contracts_.emplace(contract_id, std::move(rec));
    return cit->second.contract;
}

void BrokerLedger::accrue_vm_hours(const std::string& contract_id, double hours) {
    ContractRecord& rec = record(contract_id);
    if (rec.phase != ContractPhase::initiated) {
        throw SimError(ErrorCode::invalid_transition,
                       "contract " + contract_id + " is not active; cannot accrue usage");
    }
    if (hours < 0.0) {
        throw SimError(ErrorCode::invalid_scenario, "vm-hours accrual must be >= 0");
    }
    rec.contract.vm_hours_used += hours;
}

void BrokerLedger::record_sla_violation(const std::string& contract_id) {
    record(contract_id).sla_violations += 1;
}

void BrokerLedger::record_workload_status(const WorkloadStatus& status) {
    record(status.contract_id).last_status = status;
}

double BrokerLedger::end_contract(const std::string& contract_id, double at) {
    ContractRecord& rec = record(contract_id);
    if (rec.phase != ContractPhase::initiated) {
        throw SimError(ErrorCode::invalid_transition,
                       "contract " + contract_id + " is not active; cannot end");
    }
    if (at < rec.contract.start) {
        throw SimError(ErrorCode::invalid_transition, "contract end precedes its start");
    }
    rec.phase = ContractPhase::ended;
    rec.contract.end = at;
    rec.due = rec.contract.price_per_vm_hour * rec.contract.vm_hours_used;
    revenue_[rec.contract.provider] += rec.due;
    return rec.due;
}

void BrokerLedger::confirm_fee(const std::string& contract_id, double amount) {
    ContractRecord& rec = record(contract_id);
    if (rec.phase != ContractPhase::ended || rec.fee_confirmed) {
        throw SimError(ErrorCode::invalid_transition,
                       "fee confirmation requires an ended contract with no prior confirmation");
    }
    if (amount < 0.0) {
        throw SimError(ErrorCode::invalid_scenario, "fee amount must be >= 0");
    }
    rec.fee_confirmed = true;
    rec.fee_amount = amount;
    rec.discrepancy = rec.due - amount;
}

const Contract* BrokerLedger::find(const std::string& contract_id) const {
    auto it = contracts_.find(contract_id);
    return it == contracts_.end() ? nullptr : &it->second.contract;
}

ContractPhase BrokerLedger::phase(const std::string& contract_id) const {
    auto cit = contracts_.find(contract_id);
    if (cit != contracts_.end()) return cit->second.phase;
    auto oit = offers_.find(contract_id);
    if (oit != offers_.end()) {
        return oit->second.confirmed ? ContractPhase::confirmed : ContractPhase::offered;
    }
    throw SimError(ErrorCode::unknown_contract, "unknown contract or offer " + contract_id);
}

double BrokerLedger::due_fee(const std::string& contract_id) const { return record(contract_id).due; }

double BrokerLedger::fees_confirmed(const std::string& contract_id) const {
    return record(contract_id).fee_amount;
}

double BrokerLedger::discrepancy(const std::string& contract_id) const {
    return record(contract_id).discrepancy;
}

std::int64_t BrokerLedger::sla_violations(const std::string& contract_id) const {
    return record(contract_id).sla_violations;
}

double BrokerLedger::revenue(const std::string& provider) const {
    auto it = revenue_.find(provider);
    return it == revenue_.end() ? 0.0 : it->second;
}

std::vector<std::string> BrokerLedger::contract_ids() const {
    std::vector<std::string> ids;
    ids.reserve(contracts_.size());
    for (const auto& [id, rec] : contracts_) ids.push_back(id);
    return ids;
}

std::vector<std::string> BrokerLedger::provider_ids() const {
    std::vector<std::string> ids;
    ids.reserve(revenue_.size());
    for (const auto& [id, r] : revenue_) ids.push_back(id);
    return ids;
}

void account(BrokerLedger& ledger, const AccountingEvent& event) {
    struct Visitor {
        BrokerLedger& ledger;
        void operator()(const ContractEndEvent& e) const { ledger.end_contract(e.contract_id, e.at); }
        void operator()(const FeeConfirmation& e) const { ledger.confirm_fee(e.contract_id, e.amount); }
        void operator()(const WorkloadStatus& e) const { ledger.record_workload_status(e); }
        void operator()(const SlaObservation& e) const { ledger.record_sla_violation(e.contract_id); }
        void operator()(const VmHoursAccrual& e) const {
            ledger.accrue_vm_hours(e.contract_id, e.hours);
        }
    };
    std::visit(Visitor{ledger}, event);
}

} // namespace fedsim
