#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfgc {

enum class ErrorCode {
    InvalidArgument,
    UnsupportedDimension,
    NonFinite,
    OutOfRange,
    SearchWindow,
    CflViolation,
    LinearSolverBreakdown,
    NonConvergence,
    MonitorBreach,
    Schema,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code next to the message.
class MfgcError : public std::runtime_error {
public:
    MfgcError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw MfgcError(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace mfgc
