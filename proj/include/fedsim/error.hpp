#ifndef FEDSIM_ERROR_HPP
#define FEDSIM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fedsim {

enum class ErrorCode {
    invalid_coordinate,
    invalid_speed,
    wrong_node_role,
    empty_datacenter,
    capacity_exceeded,
    unknown_vm,
    no_fitting_template,
    placement_infeasible,
    missing_storage_assignment,
    not_a_member,
    unknown_contract,
    invalid_transition,
    service_unavailable,
    no_active_contract,
    budget_breach,
    invalid_shape,
    invalid_checklist,
    invalid_scenario,
    io_error,
};

const char* to_string(ErrorCode code);

/// Carries a machine-checkable code so callers can branch on the failure
/// kind instead of parsing messages.
class SimError : public std::runtime_error {
public:
    SimError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace fedsim

#endif
