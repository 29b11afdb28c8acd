#ifndef FEDSIM_LATENCY_HPP
#define FEDSIM_LATENCY_HPP

#include "fedsim/topology.hpp"

namespace fedsim {

/// Cloud frontend gateway with its per-request processing time (seconds).
struct GatewayProfile {
    NetEndpoint endpoint;
    double processing_time = 0.0;
};

/// Provisioning VM with its per-request processing time (seconds).
struct VmProfile {
    NetEndpoint endpoint;
    double processing_time = 0.0;
};

/// Gateway-to-gateway hop between two federated clouds.
struct FederationLink {
    NetworkDistance distance;
    NetworkSpeed speed{1.0};
};

/// Additive provisioning-time decomposition. federation_hop and
/// remote_gateway_processing are zero on the private and full-federation
/// paths. total is the left-to-right sum of the seven components.
struct LatencyBreakdown {
    double user_to_gateway = 0.0;
    double gateway_processing = 0.0;
    double federation_hop = 0.0;
    double remote_gateway_processing = 0.0;
    double gateway_to_vm = 0.0;
    double vm_processing = 0.0;
    double vm_to_user = 0.0;
    double total = 0.0;
};

/// Private-cloud provisioning path: user -> gateway -> VM -> user, all
/// within one cloud.
LatencyBreakdown provision_private(const NetEndpoint& user, const GatewayProfile& gw,
                                   const VmProfile& vm, const SpeedTable& speeds);

/// Restrained-federation path: the home gateway reroutes the request over
/// the federation link to the remote gateway, which dispatches to its VM;
/// the response returns directly to the user.
LatencyBreakdown provision_restrained(const NetEndpoint& user, const GatewayProfile& gw_home,
                                      const FederationLink& link, const GatewayProfile& gw_remote,
                                      const VmProfile& vm_remote, const SpeedTable& speeds);

/// Same path with distinct speed tables for the home-side leg (user ->
/// home gateway) and the remote-side legs.
LatencyBreakdown provision_restrained(const NetEndpoint& user, const GatewayProfile& gw_home,
                                      const FederationLink& link, const GatewayProfile& gw_remote,
                                      const VmProfile& vm_remote, const SpeedTable& home_speeds,
                                      const SpeedTable& remote_speeds);

/// Full-federation path: the user reaches the provisioning cloud's gateway
/// directly, so the shape matches the private path evaluated with remote
/// endpoints.
LatencyBreakdown provision_full(const NetEndpoint& user, const GatewayProfile& gw_remote,
                                const VmProfile& vm_remote, const SpeedTable& speeds);

enum class FederationMode { restrained, full };

struct CloudSide {
    GatewayProfile gateway;
    VmProfile vm;
};

struct OutsourcingDecision {
    bool improves = false;
    LatencyBreakdown local;  // private path in the home cloud
    LatencyBreakdown remote; // restrained or full path in the candidate cloud
};

/// Compares the private-path total against the federated-path total and
/// reports improvement only on a strict win for the remote side. With
/// `symmetric_profiles`, the remote gateway/VM processing times and the
/// remote gateway-to-VM distance are taken from the home cloud before
/// evaluating, reproducing the equal-specification approximation.
OutsourcingDecision outsourcing_improves(const NetEndpoint& user, const CloudSide& home,
                                         const SpeedTable& home_speeds, const CloudSide& remote,
                                         const SpeedTable& remote_speeds, FederationMode mode,
                                         const FederationLink& link,
                                         bool symmetric_profiles = false);

} // namespace fedsim

#endif
