#ifndef FEDSIM_HARNESS_HPP
#define FEDSIM_HARNESS_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "fedsim/metrics.hpp"
#include "fedsim/scenario.hpp"

namespace fedsim {

struct DifferentiationResult {
    std::vector<ChecklistItem> verified;
    std::vector<ChecklistItem> constraints; // non-verifiable items become design constraints
};

/// Partitions checklist items by their verifiable flag. Throws
/// InvalidChecklist on duplicate item names.
DifferentiationResult differentiate(const Checklist& checklist);

/// Checks every scenario invariant, referential integrity, and the
/// feasibility of the transformation plan. Returns human-readable
/// violations; empty means the scenario is runnable.
std::vector<std::string> validate(const Scenario& scenario);

/// Output files written by `write_report`.
struct ReportPaths {
    std::filesystem::path requests;    // per-request latency records
    std::filesystem::path summary;     // scenario-level and per-app metrics
    std::filesystem::path plan;        // per-slice outsourcing decisions
    std::filesystem::path decisions;   // capacity/contract decision log
    std::filesystem::path utilization; // per-node time series
    std::filesystem::path vm_count;    // running-vm time series
    std::filesystem::path billing;     // billing snapshot (budget-constrained runs)
};

/// Emits the report as CSV tables under `dir`. All tables carry a header
/// row; floating-point fields use 9 significant digits so repeated runs
/// are byte-identical. Throws IoError when a file cannot be written.
ReportPaths write_report(const MetricsReport& report, const std::filesystem::path& dir);

/// Formats a double with 9 significant digits (the report convention).
std::string format_number(double value);

} // namespace fedsim

#endif
