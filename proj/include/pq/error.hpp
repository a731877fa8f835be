#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pq {

/// Every failure the engine can report. The service maps each code onto
/// exactly one HTTP status (see service.hpp).
enum class ErrorCode {
    InconsistentStem,
    InvalidConfig,
    InvalidBoard,
    IllegalPhase,
    ChoiceOutOfRange,
    InsufficientPoints,
    AlreadyOwned,
    NotOwned,
    UnknownAvatar,
    EnergyDepleted,
    InvalidName,
    InvalidSettings,
    DuplicateName,
    NotFound,
    LoadCorrupt,
    UnsupportedVersion,
    OutOfScale,
    NoResponses,
    MissingDriver,
    InvalidInput,
    BadRequest,
    DataDirUnwritable,
    BindFailure,
    Internal,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pq
