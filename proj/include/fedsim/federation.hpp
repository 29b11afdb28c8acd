#ifndef FEDSIM_FEDERATION_HPP
#define FEDSIM_FEDERATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fedsim/error.hpp"
#include "fedsim/infrastructure.hpp"

namespace fedsim {

// -- Message catalogue ------------------------------------------------------

/// Periodic or event-driven capability advertisement of a member cloud.
struct StatusUpdate {
    std::vector<ResourceSpec> supported_specs;
    double supported_sla = 0.0;      // latency threshold the provider honors
    double contract_duration = 0.0;  // seconds
    double price_per_vm_hour = 0.0;
};

struct WorkloadStatus {
    std::string contract_id;
    std::int64_t completed = 0;
    std::int64_t pending = 0;
};

struct OutsourcingOffer {
    std::string offer_id;
    ResourceSpec spec;
    double sla = 0.0;
    double duration = 0.0;
    double price_per_vm_hour = 0.0;
};

struct OutsourcingConfirmation {
    std::string offer_id;
};

struct ContractInitiation {
    std::string contract_id;
    std::string offer_id;
};

struct ContractEnd {
    std::string contract_id;
};

struct FeeConfirmation {
    std::string contract_id;
    double amount = 0.0;
};

using MessageBody = std::variant<StatusUpdate, WorkloadStatus, OutsourcingOffer,
                                 OutsourcingConfirmation, ContractInitiation, ContractEnd,
                                 FeeConfirmation>;

const char* message_kind(const MessageBody& body);

struct FederationMessage {
    std::uint64_t seq = 0; // strictly increasing per sender
    std::string sender;
    double at = 0.0; // simulated publish time
    MessageBody body;
};

/// One copy of a message bound for one member.
struct Delivery {
    std::string receiver;
    double at = 0.0; // publish time + bus latency
    FederationMessage msg;
};

// -- Communication bus ------------------------------------------------------

/// Broadcast bus between member clouds: every publish is delivered exactly
/// once to each member other than the sender, in per-sender sequence
/// order, after a fixed latency.
class FederationBus {
public:
    explicit FederationBus(double latency = 0.0);

    void register_member(const std::string& cloud_id);
    bool is_member(const std::string& cloud_id) const;

    /// Validates membership and sequence monotonicity, then fans the
    /// message out. Returned deliveries are ordered by receiver id.
    std::vector<Delivery> publish(const FederationMessage& msg);

    /// Next valid sequence number for a sender.
    std::uint64_t next_seq(const std::string& sender) const;

    double latency() const { return latency_; }

    /// All deliveries ever produced, in publish order.
    const std::vector<Delivery>& trace() const { return trace_; }

private:
    double latency_;
    std::vector<std::string> members_;
    std::map<std::string, std::uint64_t> last_seq_;
    std::vector<Delivery> trace_;
};

// -- Contracts and broker ---------------------------------------------------

enum class ContractPhase { offered, confirmed, initiated, ended };

const char* to_string(ContractPhase phase);

struct Contract {
    std::string contract_id;
    std::string provider;
    std::string consumer;
    ResourceSpec spec;
    double sla = 0.0;
    double price_per_vm_hour = 0.0;
    double start = 0.0;
    std::optional<double> end;
    double vm_hours_used = 0.0;
};

struct ReceivedOffer {
    std::string provider;
    OutsourcingOffer offer;
};

struct OutsourcingNeed {
    ResourceSpec spec;
    double sla = 0.0;
};

/// Cheapest offer whose spec dominates the need and whose SLA is at most
/// the needed one; price ties broken by lowest provider id, then offer id.
/// Empty result when nothing qualifies.
std::optional<ReceivedOffer> negotiate(const std::vector<ReceivedOffer>& offers,
                                       const OutsourcingNeed& need);

/// Edge-broker ledger: contract lifecycle, SLA compliance tracking, and
/// revenue accounting. Enforces the offered -> confirmed -> initiated ->
/// ended transition order; anything else throws InvalidTransition.
class BrokerLedger {
public:
    void record_offer(const ReceivedOffer& offer);
    void confirm_offer(const std::string& offer_id);
    /// Opens the contract backed by a confirmed offer. The consumer is the
    /// cloud that accepted the offer.
    Contract& initiate(const std::string& contract_id, const std::string& offer_id,
                       const std::string& consumer, double start);
    void accrue_vm_hours(const std::string& contract_id, double hours);
    void record_sla_violation(const std::string& contract_id);
    void record_workload_status(const WorkloadStatus& status);
    /// Ends the contract and books the due fee (price x vm-hours) as
    /// provider revenue. Returns the due fee.
    double end_contract(const std::string& contract_id, double at);
    /// Matches a fee confirmation against the due fee; differences are
    /// recorded as a discrepancy, not an error.
    void confirm_fee(const std::string& contract_id, double amount);

    const Contract* find(const std::string& contract_id) const;
    ContractPhase phase(const std::string& contract_id) const;
    double due_fee(const std::string& contract_id) const;
    double fees_confirmed(const std::string& contract_id) const;
    double discrepancy(const std::string& contract_id) const;
    std::int64_t sla_violations(const std::string& contract_id) const;
    double revenue(const std::string& provider) const;
    std::vector<std::string> contract_ids() const;
    std::vector<std::string> provider_ids() const;

private:
    struct OfferRecord {
        ReceivedOffer offer;
        bool confirmed = false;
        bool consumed = false; // an initiated contract references it
    };
    struct ContractRecord {
        Contract contract;
        ContractPhase phase = ContractPhase::initiated;
        double due = 0.0;
        bool fee_confirmed = false;
        double fee_amount = 0.0;
        double discrepancy = 0.0;
        std::int64_t sla_violations = 0;
        std::optional<WorkloadStatus> last_status;
    };

    ContractRecord& record(const std::string& contract_id);
    const ContractRecord& record(const std::string& contract_id) const;

    std::map<std::string, OfferRecord> offers_;
    std::map<std::string, ContractRecord> contracts_;
    std::map<std::string, double> revenue_;
};

// -- Accounting event surface -----------------------------------------------

struct SlaObservation {
    std::string contract_id;
};

struct VmHoursAccrual {
    std::string contract_id;
    double hours = 0.0;
};

struct ContractEndEvent {
    std::string contract_id;
    double at = 0.0;
};

using AccountingEvent =
    std::variant<ContractEndEvent, FeeConfirmation, WorkloadStatus, SlaObservation, VmHoursAccrual>;

/// Applies one accounting event to the ledger. Throws UnknownContract when
/// the referenced contract does not exist.
void account(BrokerLedger& ledger, const AccountingEvent& event);

} // namespace fedsim

#endif
