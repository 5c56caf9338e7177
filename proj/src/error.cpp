#include "medfx/error.hpp"

namespace medfx {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoUsableRecords: return "NoUsableRecords";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::TooFewParticipants: return "TooFewParticipants";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::MissingClass: return "MissingClass";
    case ErrorCode::ConfigViolation: return "ConfigViolation";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

} // namespace medfx
