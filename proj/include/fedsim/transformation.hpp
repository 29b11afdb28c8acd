#ifndef FEDSIM_TRANSFORMATION_HPP
#define FEDSIM_TRANSFORMATION_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedsim/infrastructure.hpp"

namespace fedsim {

/// A legacy application to migrate, with its OS and resource demand.
struct Application {
    std::string id;
    OsKind os;
    ResourceSpec demand;
    std::optional<std::string> colocation_tag;
};

/// One VM worth of applications after consolidation. OS-homogeneous;
/// demand is the componentwise sum of member demands.
struct VmBundle {
    std::string id;
    OsKind os;
    std::vector<std::string> app_ids;
    ResourceSpec demand;
};

enum class ColocationPolicy { singleton, by_tag };

struct PlacementPlan {
    std::map<std::string, std::string> assignments;       // bundle id -> compute node id
    std::map<std::string, VmImageTemplate> images;        // bundle id -> chosen template
    std::vector<std::pair<std::string, StorageAssignment>> storage_links;
};

/// Step 1: partition applications by operating system. Every class is
/// non-empty; the number of classes is the number of distinct OSes.
std::map<OsKind, std::vector<Application>> classify_by_os(const std::vector<Application>& apps);

/// Step 2: group each OS class into bundles. `singleton` puts every app in
/// its own bundle; `by_tag` merges apps of one class that share a
/// colocation tag (untagged apps stay singleton). Tags never merge across
/// OS classes.
std::vector<VmBundle> consolidate(const std::map<OsKind, std::vector<Application>>& classes,
                                  ColocationPolicy policy);

/// Step 3: choose the image for a bundle: among templates of the bundle's
/// OS whose spec dominates the bundle demand componentwise, the smallest by
/// (cpu, mem, disk) lexicographic order, ties broken by template id.
/// Throws NoFittingTemplate when none qualifies.
VmImageTemplate select_template(const VmBundle& bundle,
                                const std::vector<VmImageTemplate>& templates);

/// Step 4: first-fit-decreasing placement of bundle images onto compute
/// nodes. Bundles are taken in decreasing image memory order (ties: cpu,
/// then bundle id); candidate nodes are scanned in ascending utilization
/// ratio at plan time, ties by node id. Does not mutate the datacenter.
/// Throws PlacementInfeasible naming the first unplaceable bundle.
PlacementPlan plan_placement(const std::vector<VmBundle>& bundles,
                             const std::map<std::string, VmImageTemplate>& images,
                             const Datacenter& dc);

struct TransformResult {
    PlacementPlan plan;
    std::vector<std::string> vm_ids;                 // one per bundle, launch order
    std::map<std::string, std::string> bundle_vm;    // bundle id -> vm id
};

/// Steps 1-6 end to end: classify, consolidate, pick images, plan, launch,
/// and link every bundle to the storage assignments of its member apps.
/// Transactional: on any error the datacenter is left unchanged.
TransformResult transform(Datacenter& dc, const std::vector<Application>& apps,
                          const std::vector<StorageAssignment>& storage,
                          const std::vector<VmImageTemplate>& templates,
                          ColocationPolicy policy);

} // namespace fedsim

#endif
