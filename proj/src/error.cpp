#include "flmgof/error.hpp"

namespace flmgof {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kNumericFailure: return "numeric-failure";
    case ErrorKind::kCalibrationFailure: return "calibration-failure";
    case ErrorKind::kDegenerateVariance: return "degenerate-variance";
    case ErrorKind::kParseError: return "parse-error";
    case ErrorKind::kIoError: return "io-error";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::string stage)
    : std::runtime_error(message), kind_(kind), stage_(std::move(stage)) {}

Error Error::with_stage(const std::string& stage) const {
    return Error(kind_, stage + ": " + what(), stage);
}

void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, std::string(to_string(kind)) + ": " + message);
}

} // namespace flmgof
