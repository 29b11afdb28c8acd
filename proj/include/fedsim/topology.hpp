#ifndef FEDSIM_TOPOLOGY_HPP
#define FEDSIM_TOPOLOGY_HPP

#include <map>
#include <string>
#include <utility>

#include "fedsim/error.hpp"

namespace fedsim {

/// Position of a host on the 2-D network-coordinate plane.
struct Coordinate {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Coordinate&) const = default;
};

/// Plane distance between two endpoints, in coordinate units.
struct NetworkDistance {
    double value = 0.0;
};

/// Link speed in coordinate units per second.
struct NetworkSpeed {
    double value = 1.0;
};

enum class EndpointRole { user, gateway, compute_node, storage_node };

struct NetEndpoint {
    std::string id;
    Coordinate coord;
    EndpointRole role = EndpointRole::compute_node;
};

/// Euclidean distance on the coordinate plane. Throws InvalidCoordinate when
/// either input has a NaN or infinite component.
NetworkDistance distance(const Coordinate& a, const Coordinate& b);

/// Seconds needed to cover `d` at speed `s`. Throws InvalidSpeed when s <= 0.
double transfer_time(NetworkDistance d, NetworkSpeed s);

/// Speeds keyed by ordered endpoint-id pair, with a fallback default for
/// pairs that have no dedicated link entry.
class SpeedTable {
public:
    explicit SpeedTable(NetworkSpeed default_speed = NetworkSpeed{1.0});

    void set_link(const std::string& from, const std::string& to, NetworkSpeed speed);
    NetworkSpeed between(const std::string& from, const std::string& to) const;
    NetworkSpeed default_speed() const { return default_; }

private:
    NetworkSpeed default_;
    std::map<std::pair<std::string, std::string>, NetworkSpeed> links_;
};

} // namespace fedsim

#endif
