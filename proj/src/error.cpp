#include "hiermc/error.hpp"

namespace hiermc {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::AbsorbingViolation: return "ABSORBING_VIOLATION";
        case ErrorCode::HorizonMismatch: return "HORIZON_MISMATCH";
        case ErrorCode::DuplicateId: return "DUPLICATE_ID";
        case ErrorCode::StateOutOfRange: return "STATE_OUT_OF_RANGE";
        case ErrorCode::EmptyArm: return "EMPTY_ARM";
        case ErrorCode::DataFormat: return "DATA_FORMAT";
        case ErrorCode::InvalidTransitionRow: return "INVALID_TRANSITION_ROW";
        case ErrorCode::SpecGap: return "SPEC_GAP";
        case ErrorCode::SpecOverlap: return "SPEC_OVERLAP";
        case ErrorCode::WeightLengthMismatch: return "WEIGHT_LENGTH_MISMATCH";
        case ErrorCode::NotADownset: return "NOT_A_DOWNSET";
        case ErrorCode::MethodFigureMismatch: return "METHOD_FIGURE_MISMATCH";
        case ErrorCode::ConfigError: return "CONFIG_ERROR";
        case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
        case ErrorCode::InvalidCumulative: return "INVALID_CUMULATIVE";
        case ErrorCode::SeparationSuspected: return "SEPARATION_SUSPECTED";
        case ErrorCode::NonConvergence: return "NONCONVERGENCE";
        case ErrorCode::AllReplicatesFailed: return "ALL_REPLICATES_FAILED";
    }
    return "UNKNOWN";
}

ErrorCategory category_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::AbsorbingViolation:
        case ErrorCode::HorizonMismatch:
        case ErrorCode::DuplicateId:
        case ErrorCode::StateOutOfRange:
        case ErrorCode::EmptyArm:
        case ErrorCode::DataFormat:
            return ErrorCategory::Data;
        case ErrorCode::InvalidCumulative:
        case ErrorCode::SeparationSuspected:
        case ErrorCode::NonConvergence:
        case ErrorCode::AllReplicatesFailed:
            return ErrorCategory::Numerical;
        default:
            return ErrorCategory::Config;
    }
}

}  // namespace hiermc
