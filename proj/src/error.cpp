#include "pq/error.hpp"

namespace pq {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InconsistentStem: return "InconsistentStem";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidBoard: return "InvalidBoard";
        case ErrorCode::IllegalPhase: return "IllegalPhase";
        case ErrorCode::ChoiceOutOfRange: return "ChoiceOutOfRange";
        case ErrorCode::InsufficientPoints: return "InsufficientPoints";
        case ErrorCode::AlreadyOwned: return "AlreadyOwned";
        case ErrorCode::NotOwned: return "NotOwned";
        case ErrorCode::UnknownAvatar: return "UnknownAvatar";
        case ErrorCode::EnergyDepleted: return "EnergyDepleted";
        case ErrorCode::InvalidName: return "InvalidName";
        case ErrorCode::InvalidSettings: return "InvalidSettings";
        case ErrorCode::DuplicateName: return "DuplicateName";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::LoadCorrupt: return "LoadCorrupt";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::OutOfScale: return "OutOfScale";
        case ErrorCode::NoResponses: return "NoResponses";
        case ErrorCode::MissingDriver: return "MissingDriver";
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::BadRequest: return "BadRequest";
        case ErrorCode::DataDirUnwritable: return "DataDirUnwritable";
        case ErrorCode::BindFailure: return "BindFailure";
        case ErrorCode::Internal: return "Internal";
    }
    return "Internal";
}

}  // namespace pq
