#pragma once

#include <string>
#include <vector>

#include "stylerag/ingestion/types.hpp"

namespace stylerag::ingest {

// Cuts one source's ordered, non-overlapping segments into 5-10 s clip
// drafts. Overlong segments split at the latest internal silence marker
// that keeps the piece within max_s, else exactly at max_s. Sub-min_s
// pieces merge forward into time-contiguous same-speaker neighbors while
// the result stays within max_s; what cannot be merged follows
// short_segment_rule (dropped pieces are reported, never silently lost).
//
// Drafts never mix speakers. Draft quality is the minimum vad_score of the
// contributing segments; transcripts of merged pieces join with one space.
//
// Throws UnorderedInput when start times go backwards, OverlappingSegments
// when a segment starts before its predecessor ends, InvalidArgument for a
// non-positive span or a policy with min_s >= max_s.
ChunkResult chunk_segments(const std::vector<RawSegment>& segments, const ChunkPolicy& policy,
                           const std::string& language = "");

}  // namespace stylerag::ingest
