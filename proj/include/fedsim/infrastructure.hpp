#ifndef FEDSIM_INFRASTRUCTURE_HPP
#define FEDSIM_INFRASTRUCTURE_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedsim/error.hpp"
#include "fedsim/topology.hpp"

namespace fedsim {

/// Virtual CPUs, memory in MiB, disk in GiB. All components strictly
/// positive for valid demands and capacities.
struct ResourceSpec {
    std::int64_t cpu = 0;
    std::int64_t mem_mib = 0;
    std::int64_t disk_gib = 0;

    bool operator==(const ResourceSpec&) const = default;

    /// True when every component of this spec is >= the other's.
    bool dominates(const ResourceSpec& other) const {
        return cpu >= other.cpu && mem_mib >= other.mem_mib && disk_gib >= other.disk_gib;
    }

    bool positive() const { return cpu > 0 && mem_mib > 0 && disk_gib > 0; }

    ResourceSpec& operator+=(const ResourceSpec& o) {
        cpu += o.cpu;
        mem_mib += o.mem_mib;
        disk_gib += o.disk_gib;
        return *this;
    }
    ResourceSpec& operator-=(const ResourceSpec& o) {
        cpu -= o.cpu;
        mem_mib -= o.mem_mib;
        disk_gib -= o.disk_gib;
        return *this;
    }
    friend ResourceSpec operator+(ResourceSpec a, const ResourceSpec& b) { return a += b; }
    friend ResourceSpec operator-(ResourceSpec a, const ResourceSpec& b) { return a -= b; }
};

struct OsKind {
    std::string name;
    auto operator<=>(const OsKind&) const = default;
};

struct VmImageTemplate {
    std::string id;
    OsKind os;
    ResourceSpec spec;
};

enum class NodeRole { compute, storage };

struct PhysicalNode {
    std::string id;
    NetEndpoint endpoint;
    ResourceSpec capacity;
    NodeRole role = NodeRole::compute;
    ResourceSpec used; // committed by running/launching/failed instances

    ResourceSpec residual() const { return capacity - used; }
    /// Largest committed fraction across the three components; 0 on an
    /// empty node, used to order placement candidates.
    double utilization_ratio() const;
};

struct StorageAssignment {
    std::string app_id;
    std::string storage_node_id;
    std::int64_t space_gib = 0;
};

enum class VmState { launching, running, failed, terminated };

const char* to_string(VmState state);

struct VmInstance {
    std::string id;
    VmImageTemplate image;
    std::string host_node_id;
    std::vector<std::string> hosted_app_ids;
    VmState state = VmState::launching;
};

/// Per-node and whole-datacenter VM counts for one uniform instance spec.
struct CapacityModel {
    std::int64_t per_node_max = 0;   // uniform-node case
    std::int64_t datacenter_max = 0; // sum over compute nodes
};

enum class PlacementPolicy { least_utilized, first_fit };

/// How many instances of `spec` fit on `node` from empty, by componentwise
/// floor division. Throws WrongNodeRole for storage nodes.
std::int64_t per_node_max(const PhysicalNode& node, const ResourceSpec& spec);

/// Mutable inventory of one cloud: nodes plus the VM ledger. Value type;
/// copies snapshot the whole ledger.
class Datacenter {
public:
    Datacenter() = default;
    /// Instance ids are "<prefix>vm-<n>"; give each cloud its own prefix
    /// when several datacenters share a scenario.
    explicit Datacenter(std::string vm_id_prefix) : vm_id_prefix_(std::move(vm_id_prefix)) {}

    void add_node(PhysicalNode node);

    const std::vector<PhysicalNode>& nodes() const { return nodes_; }
    const PhysicalNode* find_node(const std::string& id) const;
    std::size_t compute_node_count() const;
    std::size_t storage_node_count() const;

    /// Prop-1 style capacity for a uniform instance spec: sums per-node
    /// maxima over compute nodes (ignores current utilization).
    /// Throws EmptyDatacenter when there is no compute node.
    CapacityModel capacity_for(const ResourceSpec& spec) const;

    /// Remaining launches of `spec` given current utilization.
    std::int64_t residual_capacity_for(const ResourceSpec& spec) const;

    /// Places a new instance on a compute node chosen by `policy`.
    /// Throws CapacityExceeded when no node has room, EmptyDatacenter when
    /// there are no compute nodes.
    VmInstance& try_launch(const VmImageTemplate& image,
                           PlacementPolicy policy = PlacementPolicy::least_utilized,
                           std::vector<std::string> hosted_app_ids = {});

    /// Places a new instance on a specific node. Same capacity rules.
    VmInstance& launch_on(const std::string& node_id, const VmImageTemplate& image,
                          std::vector<std::string> hosted_app_ids = {});

    /// Releases the instance's resources and marks it terminated.
    /// Only running or failed instances can be terminated; the id of a
    /// terminated instance is reported as unknown afterwards.
    ResourceSpec terminate(const std::string& vm_id);

    /// Marks a running instance failed. Its resources stay committed until
    /// the instance is terminated.
    void mark_failed(const std::string& vm_id);

    const VmInstance* find_vm(const std::string& vm_id) const;
    std::vector<const VmInstance*> instances() const;
    std::size_t running_count() const;

private:
    PhysicalNode& node_ref(const std::string& id);
    VmInstance& place(PhysicalNode& node, const VmImageTemplate& image,
                      std::vector<std::string> hosted_app_ids);

    std::string vm_id_prefix_;
    std::vector<PhysicalNode> nodes_;
    std::map<std::string, VmInstance> vms_;
    std::uint64_t next_vm_ordinal_ = 1;
};

} // namespace fedsim

#endif
