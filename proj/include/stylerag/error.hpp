#pragma once

#include <stdexcept>
#include <string>

namespace stylerag {

enum class ErrorCode {
    DimensionMismatch,
    NonFiniteInput,
    PositionOutOfRange,
    InvalidArgument,
    EndpointUnavailable,
    UnorderedInput,
    OverlappingSegments,
    DuplicateClipId,
    UnknownClipId,
    EmptyInput,
    TooManyClusters,
    UnsupportedVersion,
    CorruptFile,
    EmptyText,
    EmptyDatabase,
    EmptyBundle,
    IoError,
};

const char* to_string(ErrorCode code);

// Single exception type for all contract violations; the code identifies
// which contract failed, the message carries context.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace stylerag
