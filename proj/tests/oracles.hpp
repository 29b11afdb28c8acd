// Test-only reference implementations, kept deliberately independent of the
// library code paths they check.
#ifndef FEDSIM_TESTS_ORACLES_HPP
#define FEDSIM_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedsim/infrastructure.hpp"
#include "fedsim/latency.hpp"
#include "fedsim/scheduler.hpp"
#include "fedsim/transformation.hpp"

namespace oracle {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double dist(Point a, Point b) {
    double dx = a.x - b.x;
    double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

/// Straight-line transcription of the private provisioning-time equation:
/// t = d_ur/w_ur + t_r + d_rv/w_rv + t_v + d_vu/w_vu.
inline double eq_private(Point user, Point gw, Point vm, double w_ur, double w_rv, double w_vu,
                         double t_r, double t_v) {
    return dist(user, gw) / w_ur + t_r + dist(gw, vm) / w_rv + t_v + dist(vm, user) / w_vu;
}

/// Restrained-federation equation: home gateway leg, federation hop, then
/// the remote cloud's dispatch and return legs.
inline double eq_restrained(Point user, Point gw_a, Point gw_b, Point vm_b, double w_ur_a,
                            double d_fed, double w_fed, double w_rv_b, double w_vu_b, double t_r_a,
                            double t_r_b, double t_v_b) {
    return dist(user, gw_a) / w_ur_a + t_r_a + d_fed / w_fed + t_r_b + dist(gw_b, vm_b) / w_rv_b +
           t_v_b + dist(vm_b, user) / w_vu_b;
}

/// Full-federation equation: the private shape with remote endpoints.
inline double eq_full(Point user, Point gw_b, Point vm_b, double w_ur, double w_rv, double w_vu,
                      double t_r_b, double t_v_b) {
    return eq_private(user, gw_b, vm_b, w_ur, w_rv, w_vu, t_r_b, t_v_b);
}

/// Counting oracle for uniform-spec capacity: fills each node independently
/// one instance at a time.
inline std::int64_t count_fit(const fedsim::ResourceSpec& capacity,
                              const fedsim::ResourceSpec& spec) {
    fedsim::ResourceSpec used{0, 0, 0};
    std::int64_t count = 0;
    while ((capacity - used).dominates(spec)) {
        used += spec;
        ++count;
    }
    return count;
}

/// Brute-force search for any feasible assignment of bundle specs to node
/// residuals (small instances only).
inline bool packing_exists(const std::vector<fedsim::ResourceSpec>& items,
                           const std::vector<fedsim::ResourceSpec>& residuals) {
    std::vector<fedsim::ResourceSpec> load(residuals.size(), fedsim::ResourceSpec{0, 0, 0});
    auto rec = [&](auto&& self, std::size_t i) -> bool {
        if (i == items.size()) return true;
        for (std::size_t n = 0; n < residuals.size(); ++n) {
            fedsim::ResourceSpec next = load[n] + items[i];
            if (residuals[n].dominates(next)) {
                load[n] = next;
                if (self(self, i + 1)) return true;
                load[n] -= items[i];
            }
        }
        return false;
    };
    return rec(rec, 0);
}

/// Validity oracle for a placement plan: recomputes per-node sums and every
/// structural constraint from scratch.
struct PlanCheck {
    bool ok = true;
    std::string why;
};

inline PlanCheck check_plan(const fedsim::PlacementPlan& plan,
                            const std::vector<fedsim::VmBundle>& bundles,
                            const std::vector<fedsim::Application>& apps,
                            const fedsim::Datacenter& dc) {
    PlanCheck result;
    auto fail = [&](const std::string& why) {
        result.ok = false;
        result.why = why;
        return result;
    };

    std::map<std::string, const fedsim::VmBundle*> by_id;
    for (const auto& b : bundles) by_id[b.id] = &b;

    // Every bundle assigned exactly once, to a compute node, and bundles are
    // OS-homogeneous.
    std::map<std::string, fedsim::ResourceSpec> per_node;
    for (const auto& [bundle_id, node_id] : plan.assignments) {
        const auto* node = dc.find_node(node_id);
        if (node == nullptr) return fail("assignment to unknown node " + node_id);
        if (node->role != fedsim::NodeRole::compute) {
            return fail("assignment to storage node " + node_id);
        }
        auto img = plan.images.find(bundle_id);
        if (img == plan.images.end()) return fail("bundle " + bundle_id + " has no image");
        per_node[node_id] += img->second.spec;
        const fedsim::VmBundle* b = by_id.at(bundle_id);
        for (const auto& app_id : b->app_ids) {
            auto app = std::find_if(apps.begin(), apps.end(),
                                    [&](const fedsim::Application& a) { return a.id == app_id; });
            if (app == apps.end()) return fail("bundle member " + app_id + " unknown");
            if (!(app->os == b->os)) return fail("bundle " + bundle_id + " not OS-homogeneous");
        }
        if (!img->second.spec.dominates(b->demand)) {
            return fail("image of bundle " + bundle_id + " too small for its demand");
        }
    }
    for (const auto& [node_id, load] : per_node) {
        if (!dc.find_node(node_id)->residual().dominates(load)) {
            return fail("node " + node_id + " overloaded");
        }
    }

    // Every application in exactly one bundle and exactly one storage link.
    std::map<std::string, int> app_bundles;
    for (const auto& b : bundles) {
        if (plan.assignments.count(b.id) == 0) return fail("bundle " + b.id + " unassigned");
        for (const auto& app_id : b.app_ids) app_bundles[app_id]++;
    }
    std::map<std::string, int> app_links;
    for (const auto& [bundle_id, link] : plan.storage_links) app_links[link.app_id]++;
    for (const auto& app : apps) {
        if (app_bundles[app.id] != 1) return fail("application " + app.id + " not in exactly one bundle");
        if (app_links[app.id] != 1) return fail("application " + app.id + " storage links != 1");
    }
    return result;
}

/// Independent replay of the greedy budget-capped slicing rule.
struct SliceShare {
    double local = 0.0;
    double outsourced = 0.0;
    double shortfall = 0.0;
    double cost = 0.0;
};

inline std::vector<SliceShare> greedy_slices(const std::vector<double>& demand, double capacity,
                                             double price, double budget) {
    std::vector<SliceShare> shares;
    double left = budget;
    for (double d : demand) {
        SliceShare s;
        s.local = std::min(d, capacity);
        double excess = d - s.local;
        if (excess > 0.0) {
            if (price == 0.0) {
                s.outsourced = excess;
            } else {
                s.outsourced = std::min(excess, left / price);
                s.cost = std::min(s.outsourced * price, left);
            }
            s.shortfall = excess - s.outsourced;
        }
        left -= s.cost;
        shares.push_back(s);
    }
    return shares;
}

} // namespace oracle

#endif
