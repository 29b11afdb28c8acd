#include "fedsim/infrastructure.hpp"

#include <algorithm>

namespace fedsim {

const char* to_string(VmState state) {
    switch (state) {
    case VmState::launching: return "launching";
    case VmState::running: return "running";
    case VmState::failed: return "failed";
    case VmState::terminated: return "terminated";
    }
    return "unknown";
}

double PhysicalNode::utilization_ratio() const {
    double r = 0.0;
    if (capacity.cpu > 0) r = std::max(r, double(used.cpu) / double(capacity.cpu));
    if (capacity.mem_mib > 0) r = std::max(r, double(used.mem_mib) / double(capacity.mem_mib));
    if (capacity.disk_gib > 0) r = std::max(r, double(used.disk_gib) / double(capacity.disk_gib));
    return r;
}

std::int64_t per_node_max(const PhysicalNode& node, const ResourceSpec& spec) {
    if (node.role != NodeRole::compute) {
        throw SimError(ErrorCode::wrong_node_role, "node " + node.id + " is not a compute node");
    }
    if (!spec.positive()) {
        throw SimError(ErrorCode::invalid_scenario, "instance spec must be strictly positive");
    }
    std::int64_t k = node.capacity.cpu / spec.cpu;
    k = std::min(k, node.capacity.mem_mib / spec.mem_mib);
    k = std::min(k, node.capacity.disk_gib / spec.disk_gib);
    return k;
}

void Datacenter::add_node(PhysicalNode node) {
    if (find_node(node.id) != nullptr) {
        throw SimError(ErrorCode::invalid_scenario, "duplicate node id " + node.id);
    }
    nodes_.push_back(std::move(node));
}

const PhysicalNode* Datacenter::find_node(const std::string& id) const {
    for (const auto& n : nodes_) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

PhysicalNode& Datacenter::node_ref(const std::string& id) {
    for (auto& n : nodes_) {
        if (n.id == id) return n;
    }
    throw SimError(ErrorCode::invalid_scenario, "unknown node id " + id);
}

std::size_t Datacenter::compute_node_count() const {
    return std::count_if(nodes_.begin(), nodes_.end(),
                         [](const PhysicalNode& n) { return n.role == NodeRole::compute; });
}

std::size_t Datacenter::storage_node_count() const {
    return nodes_.size() - compute_node_count();
}

CapacityModel Datacenter::capacity_for(const ResourceSpec& spec) const {
    if (compute_node_count() == 0) {
        throw SimError(ErrorCode::empty_datacenter, "datacenter has no compute nodes");
    }
    CapacityModel model;
    bool first = true;
    bool uniform = true;
    for (const auto& n : nodes_) {
        if (n.role != NodeRole::compute) continue;
        std::int64_t k = per_node_max(n, spec);
        model.datacenter_max += k;
        if (first) {
            model.per_node_max = k;
            first = false;
        } else if (k != model.per_node_max) {
            uniform = false;
        }
    }
    if (!uniform) model.per_node_max = 0; // meaningful only for uniform nodes
    return model;
}

std::int64_t Datacenter::residual_capacity_for(const ResourceSpec& spec) const {
    std::int64_t total = 0;
    for (const auto& n : nodes_) {
        if (n.role != NodeRole::compute) continue;
        PhysicalNode empty = n;
        empty.capacity = n.residual();
        empty.used = {};
        if (empty.capacity.positive()) total += per_node_max(empty, spec);
    }
    return total;
}

VmInstance& Datacenter::place(PhysicalNode& node, const VmImageTemplate& image,
                              std::vector<std::string> hosted_app_ids) {
    node.used += image.spec;
    VmInstance vm;
    vm.id = vm_id_prefix_ + "vm-" + std::to_string(next_vm_ordinal_++);
    vm.image = image;
    vm.host_node_id = node.id;
    vm.hosted_app_ids = std::move(hosted_app_ids);
    vm.state = VmState::running;
    auto [it, inserted] = vms_.emplace(vm.id, std::move(vm));
    return it->second;
}

VmInstance& Datacenter::try_launch(const VmImageTemplate& image, PlacementPolicy policy,
                                   std::vector<std::string> hosted_app_ids) {
    if (!image.spec.positive()) {
        throw SimError(ErrorCode::invalid_scenario, "image spec must be strictly positive");
    }
    if (compute_node_count() == 0) {
        throw SimError(ErrorCode::empty_datacenter, "datacenter has no compute nodes");
    }

    std::vector<PhysicalNode*> candidates;
    for (auto& n : nodes_) {
        if (n.role == NodeRole::compute && n.residual().dominates(image.spec)) {
            candidates.push_back(&n);
        }
    }
    if (candidates.empty()) {
        throw SimError(ErrorCode::capacity_exceeded,
                       "no compute node can host image " + image.id);
    }
    if (policy == PlacementPolicy::least_utilized) {
        std::sort(candidates.begin(), candidates.end(), [](const PhysicalNode* a, const PhysicalNode* b) {
            double ra = a->utilization_ratio();
            double rb = b->utilization_ratio();
            if (ra != rb) return ra < rb;
            return a->id < b->id;
        });
    }
    return place(*candidates.front(), image, std::move(hosted_app_ids));
}

VmInstance& Datacenter::launch_on(const std::string& node_id, const VmImageTemplate& image,
                                  std::vector<std::string> hosted_app_ids) {
    PhysicalNode& node = node_ref(node_id);
    if (node.role != NodeRole::compute) {
        throw SimError(ErrorCode::wrong_node_role, "node " + node_id + " is not a compute node");
    }
    if (!node.residual().dominates(image.spec)) {
        throw SimError(ErrorCode::capacity_exceeded,
                       "node " + node_id + " cannot host image " + image.id);
    }
    return place(node, image, std::move(hosted_app_ids));
}

ResourceSpec Datacenter::terminate(const std::string& vm_id) {
    auto it = vms_.find(vm_id);
    if (it == vms_.end() ||
        (it->second.state != VmState::running && it->second.state != VmState::failed)) {
        throw SimError(ErrorCode::unknown_vm, "no running or failed vm " + vm_id);
    }
    VmInstance& vm = it->second;
    node_ref(vm.host_node_id).used -= vm.image.spec;
    vm.state = VmState::terminated;
    return vm.image.spec;
}

void Datacenter::mark_failed(const std::string& vm_id) {
    auto it = vms_.find(vm_id);
    if (it == vms_.end() || it->second.state != VmState::running) {
        throw SimError(ErrorCode::unknown_vm, "no running vm " + vm_id);
    }
    it->second.state = VmState::failed;
}

const VmInstance* Datacenter::find_vm(const std::string& vm_id) const {
    auto it = vms_.find(vm_id);
    return it == vms_.end() ? nullptr : &it->second;
}

std::vector<const VmInstance*> Datacenter::instances() const {
    std::vector<const VmInstance*> out;
    out.reserve(vms_.size());
    for (const auto& [id, vm] : vms_) out.push_back(&vm);
    return out;
}

std::size_t Datacenter::running_count() const {
    return std::count_if(vms_.begin(), vms_.end(),
                         [](const auto& kv) { return kv.second.state == VmState::running; });
}

} // namespace fedsim
