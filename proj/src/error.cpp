#include "fedsim/error.hpp"

namespace fedsim {

const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_coordinate: return "InvalidCoordinate";
    case ErrorCode::invalid_speed: return "InvalidSpeed";
    case ErrorCode::wrong_node_role: return "WrongNodeRole";
    case ErrorCode::empty_datacenter: return "EmptyDatacenter";
    case ErrorCode::capacity_exceeded: return "CapacityExceeded";
    case ErrorCode::unknown_vm: return "UnknownVm";
    case ErrorCode::no_fitting_template: return "NoFittingTemplate";
    case ErrorCode::placement_infeasible: return "PlacementInfeasible";
    case ErrorCode::missing_storage_assignment: return "MissingStorageAssignment";
    case ErrorCode::not_a_member: return "NotAMember";
    case ErrorCode::unknown_contract: return "UnknownContract";
    case ErrorCode::invalid_transition: return "InvalidTransition";
    case ErrorCode::service_unavailable: return "ServiceUnavailable";
    case ErrorCode::no_active_contract: return "NoActiveContract";
    case ErrorCode::budget_breach: return "BudgetBreach";
    case ErrorCode::invalid_shape: return "InvalidShape";
    case ErrorCode::invalid_checklist: return "InvalidChecklist";
    case ErrorCode::invalid_scenario: return "InvalidScenario";
    case ErrorCode::io_error: return "IoError";
    }
    return "UnknownError";
}

} // namespace fedsim
