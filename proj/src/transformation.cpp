#include "fedsim/transformation.hpp"

#include <algorithm>
#include <tuple>

namespace fedsim {

std::map<OsKind, std::vector<Application>> classify_by_os(const std::vector<Application>& apps) {
    std::map<OsKind, std::vector<Application>> classes;
    for (const auto& app : apps) {
        classes[app.os].push_back(app);
    }
    return classes;
}

std::vector<VmBundle> consolidate(const std::map<OsKind, std::vector<Application>>& classes,
                                  ColocationPolicy policy) {
    std::vector<VmBundle> bundles;
    for (const auto& [os, members] : classes) {
        // tag -> bundle index, scoped to this OS class
        std::map<std::string, std::size_t> tagged;
        for (const auto& app : members) {
            if (policy == ColocationPolicy::by_tag && app.colocation_tag.has_value()) {
                const std::string& tag = *app.colocation_tag;
                auto it = tagged.find(tag);
                if (it != tagged.end()) {
                    VmBundle& b = bundles[it->second];
                    b.app_ids.push_back(app.id);
                    b.demand += app.demand;
                    continue;
                }
                VmBundle b;
                b.id = os.name + ":" + tag;
                b.os = os;
                b.app_ids = {app.id};
                b.demand = app.demand;
                tagged.emplace(tag, bundles.size());
                bundles.push_back(std::move(b));
                continue;
            }
            VmBundle b;
            b.id = app.id;
            b.os = os;
            b.app_ids = {app.id};
            b.demand = app.demand;
            bundles.push_back(std::move(b));
        }
    }
    return bundles;
}

VmImageTemplate select_template(const VmBundle& bundle,
                                const std::vector<VmImageTemplate>& templates) {
    const VmImageTemplate* best = nullptr;
    for (const auto& t : templates) {
        if (t.os != bundle.os || !t.spec.dominates(bundle.demand)) continue;
        if (best == nullptr) {
            best = &t;
            continue;
        }
        auto key = [](const VmImageTemplate& x) {
            return std::make_tuple(x.spec.cpu, x.spec.mem_mib, x.spec.disk_gib, x.id);
        };
        if (key(t) < key(*best)) best = &t;
    }
    if (best == nullptr) {
        throw SimError(ErrorCode::no_fitting_template,
                       "no template of os " + bundle.os.name + " fits bundle " + bundle.id);
    }
    return *best;
}

PlacementPlan plan_placement(const std::vector<VmBundle>& bundles,
                             const std::map<std::string, VmImageTemplate>& images,
                             const Datacenter& dc) {
    if (dc.compute_node_count() == 0) {
        throw SimError(ErrorCode::empty_datacenter, "datacenter has no compute nodes");
    }

    std::vector<const VmBundle*> order;
    order.reserve(bundles.size());
    for (const auto& b : bundles) order.push_back(&b);
    std::sort(order.begin(), order.end(), [&](const VmBundle* a, const VmBundle* b) {
        const ResourceSpec& sa = images.at(a->id).spec;
        const ResourceSpec& sb = images.at(b->id).spec;
        if (sa.mem_mib != sb.mem_mib) return sa.mem_mib > sb.mem_mib;
        if (sa.cpu != sb.cpu) return sa.cpu > sb.cpu;
        return a->id < b->id;
    });

    // Node scan order fixed at plan time.
    std::vector<const PhysicalNode*> nodes;
    for (const auto& n : dc.nodes()) {
        if (n.role == NodeRole::compute) nodes.push_back(&n);
    }
    std::sort(nodes.begin(), nodes.end(), [](const PhysicalNode* a, const PhysicalNode* b) {
        double ra = a->utilization_ratio();
        double rb = b->utilization_ratio();
        if (ra != rb) return ra < rb;
        return a->id < b->id;
    });

    std::map<std::string, ResourceSpec> planned; // node id -> demand added by this plan
    PlacementPlan plan;
    for (const VmBundle* b : order) {
        const ResourceSpec& spec = images.at(b->id).spec;
        const PhysicalNode* chosen = nullptr;
        for (const PhysicalNode* n : nodes) {
            ResourceSpec free = n->residual() - planned[n->id];
            if (free.dominates(spec)) {
                chosen = n;
                break;
            }
        }
        if (chosen == nullptr) {
            throw SimError(ErrorCode::placement_infeasible,
                           "bundle " + b->id + " does not fit on any compute node");
        }
        planned[chosen->id] += spec;
        plan.assignments[b->id] = chosen->id;
        plan.images[b->id] = images.at(b->id);
    }
    return plan;
}

TransformResult transform(Datacenter& dc, const std::vector<Application>& apps,
                          const std::vector<StorageAssignment>& storage,
                          const std::vector<VmImageTemplate>& templates,
                          ColocationPolicy policy) {
    TransformResult result;
    if (apps.empty()) return result;

    // Every application needs exactly one assignment to a storage node.
    std::map<std::string, const StorageAssignment*> by_app;
    for (const auto& sa : storage) {
        if (!by_app.emplace(sa.app_id, &sa).second) {
            throw SimError(ErrorCode::missing_storage_assignment,
                           "application " + sa.app_id + " has more than one storage assignment");
        }
    }
    for (const auto& app : apps) {
        auto it = by_app.find(app.id);
        if (it == by_app.end()) {
            throw SimError(ErrorCode::missing_storage_assignment,
                           "application " + app.id + " has no storage assignment");
        }
        const PhysicalNode* node = dc.find_node(it->second->storage_node_id);
        if (node == nullptr || node->role != NodeRole::storage) {
            throw SimError(ErrorCode::missing_storage_assignment,
                           "application " + app.id + " refers to missing storage node " +
                               it->second->storage_node_id);
        }
    }

    auto classes = classify_by_os(apps);                 // step 1
    auto bundles = consolidate(classes, policy);         // step 2
    std::map<std::string, VmImageTemplate> images;       // step 3
    for (const auto& b : bundles) {
        images.emplace(b.id, select_template(b, templates));
    }
    PlacementPlan plan = plan_placement(bundles, images, dc); // step 4

    // Step 5: launch in bundle-id order. The plan was validated against
    // residual capacity, so launches cannot fail; roll back if one does.
    std::vector<std::string> launched;
    try {
        for (const auto& [bundle_id, node_id] : plan.assignments) {
            auto bit = std::find_if(bundles.begin(), bundles.end(),
                                    [&](const VmBundle& b) { return b.id == bundle_id; });
            VmInstance& vm = dc.launch_on(node_id, plan.images.at(bundle_id), bit->app_ids);
            launched.push_back(vm.id);
            result.bundle_vm[bundle_id] = vm.id;
        }
    } catch (...) {
        for (const auto& id : launched) dc.terminate(id);
        throw;
    }

    // Step 6: reconnect each bundle to its member apps' storage.
    for (const auto& b : bundles) {
        for (const auto& app_id : b.app_ids) {
            plan.storage_links.emplace_back(b.id, *by_app.at(app_id));
        }
    }

    result.plan = std::move(plan);
    result.vm_ids = std::move(launched);
    return result;
}

} // namespace fedsim
