#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hiermc {

enum class ErrorCode {
    AbsorbingViolation,
    HorizonMismatch,
    DuplicateId,
    StateOutOfRange,
    EmptyArm,
    DataFormat,
    InvalidTransitionRow,
    SpecGap,
    SpecOverlap,
    WeightLengthMismatch,
    NotADownset,
    MethodFigureMismatch,
    ConfigError,
    InvalidArgument,
    InvalidCumulative,
    SeparationSuspected,
    NonConvergence,
    AllReplicatesFailed,
};

/// Upper-snake identifier used in machine-readable error output.
std::string_view to_string(ErrorCode code);

enum class ErrorCategory { Config, Data, Numerical };

ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace hiermc
