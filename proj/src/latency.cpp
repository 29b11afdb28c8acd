#include "fedsim/latency.hpp"

#include <cmath>

namespace fedsim {

namespace {

void check_processing(double t, const char* what) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw SimError(ErrorCode::invalid_scenario, std::string(what) + " must be finite and >= 0");
    }
}

double sum_components(const LatencyBreakdown& b) {
    return b.user_to_gateway + b.gateway_processing + b.federation_hop +
           b.remote_gateway_processing + b.gateway_to_vm + b.vm_processing + b.vm_to_user;
}

LatencyBreakdown private_shape(double user_to_gw, double t_gw, double gw_to_vm, double t_vm,
                               double vm_to_user) {
    LatencyBreakdown b;
    b.user_to_gateway = user_to_gw;
    b.gateway_processing = t_gw;
    b.gateway_to_vm = gw_to_vm;
    b.vm_processing = t_vm;
    b.vm_to_user = vm_to_user;
    b.total = sum_components(b);
    return b;
}

} // namespace

LatencyBreakdown provision_private(const NetEndpoint& user, const GatewayProfile& gw,
                                   const VmProfile& vm, const SpeedTable& speeds) {
    check_processing(gw.processing_time, "gateway processing time");
    check_processing(vm.processing_time, "vm processing time");
    double user_to_gw = transfer_time(distance(user.coord, gw.endpoint.coord),
                                      speeds.between(user.id, gw.endpoint.id));
    double gw_to_vm = transfer_time(distance(gw.endpoint.coord, vm.endpoint.coord),
                                    speeds.between(gw.endpoint.id, vm.endpoint.id));
    double vm_to_user = transfer_time(distance(vm.endpoint.coord, user.coord),
                                      speeds.between(vm.endpoint.id, user.id));
    return private_shape(user_to_gw, gw.processing_time, gw_to_vm, vm.processing_time, vm_to_user);
}

LatencyBreakdown provision_restrained(const NetEndpoint& user, const GatewayProfile& gw_home,
                                      const FederationLink& link, const GatewayProfile& gw_remote,
                                      const VmProfile& vm_remote, const SpeedTable& speeds) {
    return provision_restrained(user, gw_home, link, gw_remote, vm_remote, speeds, speeds);
}

LatencyBreakdown provision_restrained(const NetEndpoint& user, const GatewayProfile& gw_home,
                                      const FederationLink& link, const GatewayProfile& gw_remote,
                                      const VmProfile& vm_remote, const SpeedTable& home_speeds,
                                      const SpeedTable& remote_speeds) {
    check_processing(gw_home.processing_time, "gateway processing time");
    check_processing(gw_remote.processing_time, "gateway processing time");
    check_processing(vm_remote.processing_time, "vm processing time");

    LatencyBreakdown b;
    b.user_to_gateway = transfer_time(distance(user.coord, gw_home.endpoint.coord),
                                      home_speeds.between(user.id, gw_home.endpoint.id));
    b.gateway_processing = gw_home.processing_time;
    b.federation_hop = transfer_time(link.distance, link.speed);
    b.remote_gateway_processing = gw_remote.processing_time;
    b.gateway_to_vm = transfer_time(distance(gw_remote.endpoint.coord, vm_remote.endpoint.coord),
                                    remote_speeds.between(gw_remote.endpoint.id, vm_remote.endpoint.id));
    b.vm_processing = vm_remote.processing_time;
    b.vm_to_user = transfer_time(distance(vm_remote.endpoint.coord, user.coord),
                                 remote_speeds.between(vm_remote.endpoint.id, user.id));
    b.total = sum_components(b);
    return b;
}

LatencyBreakdown provision_full(const NetEndpoint& user, const GatewayProfile& gw_remote,
                                const VmProfile& vm_remote, const SpeedTable& speeds) {
    return provision_private(user, gw_remote, vm_remote, speeds);
}

OutsourcingDecision outsourcing_improves(const NetEndpoint& user, const CloudSide& home,
                                         const SpeedTable& home_speeds, const CloudSide& remote,
                                         const SpeedTable& remote_speeds, FederationMode mode,
                                         const FederationLink& link, bool symmetric_profiles) {
    CloudSide rem = remote;
    if (symmetric_profiles) {
        rem.gateway.processing_time = home.gateway.processing_time;
        rem.vm.processing_time = home.vm.processing_time;
        // Force the remote dispatch leg to match the home one: move the
        // remote VM so its gateway distance equals the home gateway-VM
        // distance, preserving the direction to the original VM.
        NetworkDistance d_home = distance(home.gateway.endpoint.coord, home.vm.endpoint.coord);
        NetworkDistance d_rem = distance(rem.gateway.endpoint.coord, rem.vm.endpoint.coord);
        if (d_rem.value > 0.0) {
            double scale = d_home.value / d_rem.value;
            rem.vm.endpoint.coord.x = rem.gateway.endpoint.coord.x +
                                      (rem.vm.endpoint.coord.x - rem.gateway.endpoint.coord.x) * scale;
            rem.vm.endpoint.coord.y = rem.gateway.endpoint.coord.y +
                                      (rem.vm.endpoint.coord.y - rem.gateway.endpoint.coord.y) * scale;
        }
    }

    OutsourcingDecision decision;
    decision.local = provision_private(user, home.gateway, home.vm, home_speeds);
    decision.remote = mode == FederationMode::restrained
                          ? provision_restrained(user, home.gateway, link, rem.gateway, rem.vm,
                                                 home_speeds, remote_speeds)
                          : provision_full(user, rem.gateway, rem.vm, remote_speeds);
    decision.improves = decision.remote.total < decision.local.total;
    return decision;
}

} // namespace fedsim
