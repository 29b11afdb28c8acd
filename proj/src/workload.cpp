#include "fedsim/workload.hpp"

#include <cmath>
#include <numbers>

namespace fedsim {

WorkloadTrace generate(const WorkloadGenerator& gen, std::size_t slices, double slice_width) {
    WorkloadTrace trace;
    trace.slice_width = slice_width;
    trace.pattern_label = gen.label;
    trace.demand.reserve(slices);

    struct Visitor {
        std::size_t slices;
        std::vector<double>& out;

        void operator()(const ConstantShape& s) const {
            if (s.value < 0.0) {
                throw SimError(ErrorCode::invalid_shape, "constant demand must be >= 0");
            }
            out.assign(slices, s.value);
        }
        void operator()(const SinusoidalShape& s) const {
            if (s.period <= 0.0 || s.peak < 0.0 || s.trough < 0.0 || s.peak < s.trough) {
                throw SimError(ErrorCode::invalid_shape, "invalid sinusoidal parameters");
            }
            // Starts at the trough, reaches the peak half a period in.
            for (std::size_t i = 0; i < slices; ++i) {
                double phase = 2.0 * std::numbers::pi * double(i) / s.period;
                out.push_back(s.trough + (s.peak - s.trough) * (1.0 - std::cos(phase)) / 2.0);
            }
        }
        void operator()(const TraceShape& s) const {
            if (slices > 0 && s.values.empty()) {
                throw SimError(ErrorCode::invalid_shape, "trace shape has no values");
            }
            for (const double v : s.values) {
                if (v < 0.0) {
                    throw SimError(ErrorCode::invalid_shape, "trace demand must be >= 0");
                }
            }
            for (std::size_t i = 0; i < slices; ++i) {
                out.push_back(s.values[i % s.values.size()]);
            }
        }
    };
    std::visit(Visitor{slices, trace.demand}, gen.shape);
    return trace;
}

} // namespace fedsim
