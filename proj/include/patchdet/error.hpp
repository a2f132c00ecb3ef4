#pragma once

#include <stdexcept>
#include <string>

namespace patchdet {

enum class ErrorCode {
    ImageTooSmall,
    OutOfBounds,
    InvalidParameter,
    CodecFailure,
    ModelLoadError,
    ShapeMismatch,
    ScoringError,
    EmptyScores,
    EmptyEnsemble,
    SingleClass,
    UnknownRecipe,
    EmptyAfterFilter,
    SpecError,
    ConfigError,
    IoError,
};

const char* error_code_name(ErrorCode code);

/// Exception type used across the library; carries a stable code so callers
/// can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code),
          message_(message) {}

    ErrorCode code() const noexcept { return code_; }
    /// The bare message, without the code-name prefix what() carries.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition)
        raise(code, message);
}

}  // namespace patchdet
