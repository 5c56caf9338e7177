#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace medfx {

enum class ErrorCode {
    MissingColumn,
    EmptyInput,
    NoUsableRecords,
    TooFewPoints,
    RankDeficient,
    InsufficientData,
    NonConvergence,
    ZeroVariance,
    TooFewRows,
    TooFewParticipants,
    SingleClassTraining,
    ShapeMismatch,
    SingleClass,
    MissingClass,
    ConfigViolation,
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code; the
/// CLI serializes it on stderr.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace medfx
