#ifndef FEDSIM_SIMENGINE_HPP
#define FEDSIM_SIMENGINE_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "fedsim/metrics.hpp"
#include "fedsim/scenario.hpp"

namespace fedsim {

enum class EventKind {
    request_arrival,
    dispatch_complete,
    vm_service_complete,
    response_delivered,
    slice_boundary,
    vm_failure,
    vm_recovered,
    bus_delivery,
    contract_timer,
};

const char* to_string(EventKind kind);

/// (time, seq) totally orders the run; seq is assigned at scheduling time,
/// so simultaneous events fire in scheduling order.
struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::request_arrival;
    std::uint64_t ref = 0; // request index, slice number, or delivery index
    std::string target;    // vm / app / contract id where one applies
};

struct EngineHooks {
    std::function<void(const Event&)> on_event;        // every processed event
    std::function<void(const Delivery&)> on_delivery;  // every bus delivery
};

/// Deterministic discrete-event simulation of one scenario. A single run
/// is strictly single-threaded; independent engines share nothing.
///
/// Randomness: one seeded generator per run. The only consumer is the
/// per-request VM service time, drawn at dispatch in event order (the
/// constant service model draws nothing).
class SimEngine {
public:
    SimEngine(Scenario scenario, std::uint64_t seed);
    ~SimEngine();
    SimEngine(SimEngine&&) noexcept;
    SimEngine& operator=(SimEngine&&) noexcept;

    /// Adds a VM failure at `time` on top of the scenario's schedule. The
    /// target must be running when the failure fires, else UnknownVm.
    void inject_failure(double time, const std::string& vm_id);

    void set_hooks(EngineHooks hooks);

    /// Validates the scenario (rejecting it before anything runs), then
    /// processes all events and assembles the report.
    MetricsReport run();

private:
    struct State;
    std::unique_ptr<State> state_;
};

/// Convenience wrapper: construct, run, report.
MetricsReport run_scenario(const Scenario& scenario, std::uint64_t seed);

} // namespace fedsim

#endif
