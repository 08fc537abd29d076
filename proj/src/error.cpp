#include "tubepose/error.hpp"

namespace tubepose {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DegenerateInput: return "E_DEGENERATE_INPUT";
        case ErrorCode::InvalidParameter: return "E_INVALID_PARAMETER";
        case ErrorCode::EmptyCloud: return "E_EMPTY_CLOUD";
        case ErrorCode::NoCorrespondences: return "E_NO_CORRESPONDENCES";
        case ErrorCode::NoOverlap: return "E_NO_OVERLAP";
        case ErrorCode::IndexOutOfRange: return "E_INDEX_OUT_OF_RANGE";
        case ErrorCode::InfeasibleConfig: return "E_INFEASIBLE_CONFIG";
        case ErrorCode::ParseError: return "E_PARSE";
        case ErrorCode::UnsupportedFormat: return "E_UNSUPPORTED_FORMAT";
        case ErrorCode::IdentityMismatch: return "E_IDENTITY_MISMATCH";
        case ErrorCode::DetectionsRange: return "E_DETECTIONS_RANGE";
        case ErrorCode::IoError: return "E_IO";
    }
    return "E_UNKNOWN";
}

}  // namespace tubepose
