#pragma once

#include <stdexcept>
#include <string>

namespace flmgof {

enum class ErrorKind {
    kInvalidArgument,
    kInsufficientData,
    kNumericFailure,
    kCalibrationFailure,
    kDegenerateVariance,
    kParseError,
    kIoError,
};

const char* to_string(ErrorKind kind);

/// Library error. Every failure the pipeline can report carries one of the
/// kinds above; `stage` names the pipeline step when the error was raised
/// inside hybrid_test.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string stage = {});

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& stage() const noexcept { return stage_; }

    /// Copy of this error with a stage label prefixed to the message.
    Error with_stage(const std::string& stage) const;

private:
    ErrorKind kind_;
    std::string stage_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

} // namespace flmgof
