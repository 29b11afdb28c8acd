#ifndef FEDSIM_METRICS_HPP
#define FEDSIM_METRICS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedsim/latency.hpp"
#include "fedsim/scheduler.hpp"

namespace fedsim {

struct LatencyStats {
    std::size_t count = 0;
    double mean = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    double max = 0.0;
};

/// Nearest-rank percentile over the samples (p in [0, 100]).
double percentile(std::vector<double> samples, double p);
LatencyStats latency_stats(const std::vector<double>& samples);

/// One provisioning request as observed by the engine.
struct RequestRecord {
    std::uint64_t id = 0;
    std::string app_id;
    double arrival = 0.0;
    std::string path;          // private | restrained | full | none
    std::string outcome;       // completed | killed | shortfall | unavailable
    LatencyBreakdown breakdown; // meaningful for completed requests
    bool sla_violated = false;
};

struct UtilizationSample {
    double time = 0.0;
    std::string node_id;
    double cpu_ratio = 0.0;
    double mem_ratio = 0.0;
    double disk_ratio = 0.0;
};

struct VmCountSample {
    double time = 0.0;
    std::int64_t running = 0;
};

struct BillingSample {
    double time = 0.0;
    double spent = 0.0;
    double committed = 0.0;
    double remaining = 0.0;
};

struct MetricsReport {
    std::map<std::string, LatencyStats> per_app;
    std::vector<RequestRecord> requests;

    std::int64_t arrivals = 0;
    std::int64_t completions = 0;
    std::int64_t shortfall = 0; // plan-rejected + killed + unavailable
    std::int64_t in_flight_at_end = 0;
    std::int64_t sla_violation_count = 0;
    double sla_violation_rate = 0.0; // violations / completed requests
    std::int64_t service_unavailable_count = 0;

    double total_cost = 0.0; // money spent on outsourcing at scenario end

    std::vector<Contract> contracts;              // broker ledger at scenario end
    std::map<std::string, double> provider_revenue;
    std::map<std::string, double> fees_confirmed; // by contract id

    std::map<std::string, OutsourcingPlan> plans; // app id -> slicing plan
    std::vector<std::string> decisions;           // capacity/contract decision log
    std::vector<std::string> breaches;            // recorded budget breaches

    std::vector<UtilizationSample> utilization;
    std::vector<VmCountSample> vm_counts;
    std::vector<BillingSample> billing; // empty in unconstrained mode
    std::vector<double> recovery_times;
};

} // namespace fedsim

#endif
