#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace delaydmd {

enum class ErrorCode {
    NumericalFailure,
    DegenerateModes,
    DegenerateData,
    ZeroInitialCondition,
    InsufficientSnapshots,
    InsufficientMeasurements,
    InvalidDelay,
    InvalidSplit,
    InvalidGrid,
    InvalidCount,
    InvalidParameter,
    InvalidStartVector,
    SamplingRate,
    Shape,
    Parse,
    Consistency,
    Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map them to exit statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace delaydmd
