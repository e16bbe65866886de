#include "foi/error.hpp"

namespace foi {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::SubNotFound: return "SubNotFound";
        case ErrorCode::KeywordNotFound: return "KeywordNotFound";
        case ErrorCode::OverlappingSubs: return "OverlappingSubs";
        case ErrorCode::SpanUnresolvable: return "SpanUnresolvable";
        case ErrorCode::UnsupportedResolution: return "UnsupportedResolution";
        case ErrorCode::NoRecords: return "NoRecords";
        case ErrorCode::EmptyIndices: return "EmptyIndices";
        case ErrorCode::BadKernel: return "BadKernel";
        case ErrorCode::EmptyMaskList: return "EmptyMaskList";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::BadFraction: return "BadFraction";
        case ErrorCode::BadDims: return "BadDims";
        case ErrorCode::MissingNullLogits: return "MissingNullLogits";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::ZeroDelta: return "ZeroDelta";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace foi
