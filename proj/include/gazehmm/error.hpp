#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gazehmm {

// Every failure the library can raise. The numeric value doubles as the CLI
// exit code, so entries must never be renumbered.
enum class ErrorCode : int {
    Usage = 1,
    Io = 2,
    MalformedCsv = 3,
    NonMonotoneTime = 4,
    EmptyRecording = 5,
    UnknownKind = 6,
    NoOverlap = 7,
    TooShort = 8,
    InvalidConfig = 9,
    InvalidScript = 10,
    EmptyObservation = 11,
    NumericalUnderflow = 12,
    InvalidModel = 13,
    InvalidArgument = 14,
};

std::string_view error_name(ErrorCode code) noexcept;

class GazeError : public std::runtime_error {
public:
    GazeError(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(code_); }

private:
    ErrorCode code_;
};

}  // namespace gazehmm
