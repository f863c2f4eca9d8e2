#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deepmorph {

enum class ErrorCode {
    InvalidArgument,
    DegenerateInput,
    NoRealCircle,
    ShapeMismatch,
    DegenerateShape,
    CoefficientMismatch,
    RegistrationFailed,
    InsufficientForeground,
    OutOfRange,
    EmptyProjection,
    AmplitudeMismatch,
    EmptyFixtureSet,
    Io,
    Parse,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a stable machine-readable code next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace deepmorph
