#ifndef FEDSIM_WORKLOAD_HPP
#define FEDSIM_WORKLOAD_HPP

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fedsim/scheduler.hpp"

namespace fedsim {

struct ConstantShape {
    double value = 0.0;
};

/// One full wave every `period` slices, starting at the trough.
struct SinusoidalShape {
    double period = 1.0; // slices per cycle
    double peak = 0.0;
    double trough = 0.0;
};

struct TraceShape {
    std::vector<double> values; // repeated cyclically when shorter than the run
};

struct WorkloadGenerator {
    std::variant<ConstantShape, SinusoidalShape, TraceShape> shape;
    std::uint64_t seed = 0;
    std::string label;
};

/// Demand per slice for `slices` slices. Deterministic for a given
/// generator; throws InvalidShape on negative or inconsistent parameters.
WorkloadTrace generate(const WorkloadGenerator& gen, std::size_t slices, double slice_width);

} // namespace fedsim

#endif
