#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tubepose {

enum class ErrorCode {
    DegenerateInput,
    InvalidParameter,
    EmptyCloud,
    NoCorrespondences,
    NoOverlap,
    IndexOutOfRange,
    InfeasibleConfig,
    ParseError,
    UnsupportedFormat,
    IdentityMismatch,
    DetectionsRange,
    IoError,
};

/// Stable machine-readable identifier, e.g. "E_DEGENERATE_INPUT".
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tubepose
