#include "fedsim/topology.hpp"

#include <cmath>

namespace fedsim {

namespace {

bool finite_coord(const Coordinate& c) {
    return std::isfinite(c.x) && std::isfinite(c.y);
}

} // namespace

NetworkDistance distance(const Coordinate& a, const Coordinate& b) {
    if (!finite_coord(a) || !finite_coord(b)) {
        throw SimError(ErrorCode::invalid_coordinate, "coordinates must be finite");
    }
    return NetworkDistance{std::hypot(a.x - b.x, a.y - b.y)};
}

double transfer_time(NetworkDistance d, NetworkSpeed s) {
    if (!(s.value > 0.0) || !std::isfinite(s.value)) {
        throw SimError(ErrorCode::invalid_speed, "network speed must be strictly positive");
    }
    return d.value / s.value;
}

SpeedTable::SpeedTable(NetworkSpeed default_speed) : default_(default_speed) {
    if (!(default_.value > 0.0) || !std::isfinite(default_.value)) {
        throw SimError(ErrorCode::invalid_speed, "default speed must be strictly positive");
    }
}

void SpeedTable::set_link(const std::string& from, const std::string& to, NetworkSpeed speed) {
    if (!(speed.value > 0.0) || !std::isfinite(speed.value)) {
        throw SimError(ErrorCode::invalid_speed, "link speed must be strictly positive: " + from + "->" + to);
    }
    links_[{from, to}] = speed;
}

NetworkSpeed SpeedTable::between(const std::string& from, const std::string& to) const {
    auto it = links_.find({from, to});
    return it == links_.end() ? default_ : it->second;
}

} // namespace fedsim
