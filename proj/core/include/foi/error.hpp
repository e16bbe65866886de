#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace foi {

enum class ErrorCode {
    SubNotFound,
    KeywordNotFound,
    OverlappingSubs,
    SpanUnresolvable,
    UnsupportedResolution,
    NoRecords,
    EmptyIndices,
    BadKernel,
    EmptyMaskList,
    LengthMismatch,
    ShapeMismatch,
    BadFraction,
    BadDims,
    MissingNullLogits,
    ZeroVector,
    ZeroDelta,
    BackendUnavailable,
    InvalidArgument,
    Io,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace foi
