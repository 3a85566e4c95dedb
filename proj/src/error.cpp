#include "stylerag/error.hpp"

namespace stylerag {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteInput: return "NonFiniteInput";
        case ErrorCode::PositionOutOfRange: return "PositionOutOfRange";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EndpointUnavailable: return "EndpointUnavailable";
        case ErrorCode::UnorderedInput: return "UnorderedInput";
        case ErrorCode::OverlappingSegments: return "OverlappingSegments";
        case ErrorCode::DuplicateClipId: return "DuplicateClipId";
        case ErrorCode::UnknownClipId: return "UnknownClipId";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::TooManyClusters: return "TooManyClusters";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::CorruptFile: return "CorruptFile";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::EmptyDatabase: return "EmptyDatabase";
        case ErrorCode::EmptyBundle: return "EmptyBundle";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace stylerag
