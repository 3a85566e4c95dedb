#include "stylerag/ingestion/chunker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stylerag/error.hpp"

namespace stylerag::ingest {

namespace {

constexpr double kTimeEps = 1e-9;
// Pieces count as contiguous when their boundary times agree to a
// microsecond; splits reuse the exact cut value, so this only absorbs
// formatting slop in hand-written fixtures.
constexpr double kJoinEps = 1e-6;

struct Piece {
    std::string source_uri;
    double start = 0.0;
    double end = 0.0;
    std::string speaker;
    double quality = 0.0;
    std::string transcript;
};

double duration(const Piece& p) { return p.end - p.start; }

SpeechClip to_clip(const Piece& p, const std::string& language) {
    SpeechClip clip;
    clip.clip_id = make_clip_id(p.source_uri, p.start, p.end);
    clip.audio_uri = make_clip_uri(p.source_uri, p.start, p.end);
    clip.duration_s = duration(p);
    clip.speaker_id = p.speaker;
    clip.language = language;
    clip.transcript = p.transcript;
    clip.quality_score = p.quality;
    return clip;
}

void validate_stream(const std::vector<RawSegment>& segments, const ChunkPolicy& policy) {
    if (!(policy.min_s > 0.0) || !(policy.min_s < policy.max_s)) {
        throw Error(ErrorCode::InvalidArgument, "chunk policy requires 0 < min_s < max_s");
    }
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const RawSegment& seg = segments[i];
        if (!(seg.end_s > seg.start_s)) {
            throw Error(ErrorCode::InvalidArgument,
                        "segment " + std::to_string(i) + " has non-positive span");
        }
        if (i == 0) continue;
        if (seg.start_s < segments[i - 1].start_s - kTimeEps) {
            throw Error(ErrorCode::UnorderedInput,
                        "segment " + std::to_string(i) + " starts before its predecessor");
        }
        if (seg.start_s < segments[i - 1].end_s - kTimeEps) {
            throw Error(ErrorCode::OverlappingSegments,
                        "segment " + std::to_string(i) + " overlaps its predecessor");
        }
    }
}

// Split one segment into pieces of at most max_s, cutting at the latest
// internal silence marker that fits, else exactly at the max_s boundary.
void split_segment(const RawSegment& seg, double max_s, std::vector<Piece>& out) {
    const std::string transcript = seg.transcript.value_or("");
    double cur = seg.start_s;
    while (seg.end_s - cur > max_s + kTimeEps) {
        const double boundary = cur + max_s;
        double cut = boundary;
        double best_marker = -1.0;
        for (double m : seg.silence_s) {
            if (m > cur + kTimeEps && m <= boundary + kTimeEps && m > best_marker) {
                best_marker = m;
            }
        }
        if (best_marker > 0.0) cut = std::min(best_marker, boundary);
        out.push_back({seg.source_uri, cur, cut, seg.speaker_id, seg.vad_score, transcript});
        cur = cut;
    }
    if (seg.end_s - cur > kTimeEps) {
        out.push_back({seg.source_uri, cur, seg.end_s, seg.speaker_id, seg.vad_score, transcript});
    }
}

}  // namespace

ChunkResult chunk_segments(const std::vector<RawSegment>& segments, const ChunkPolicy& policy,
                           const std::string& language) {
    validate_stream(segments, policy);

    std::vector<Piece> pieces;
    for (const RawSegment& seg : segments) {
        split_segment(seg, policy.max_s, pieces);
    }

    // Forward merge: a sub-min_s piece joins its time-contiguous same-speaker
    // neighbor while the union stays within max_s. Merging never invents
    // audio, so the union span equals the sum of the parts.
    std::vector<Piece> merged;
    for (Piece& p : pieces) {
        if (policy.short_segment_rule == ShortSegmentRule::merge_same_speaker && !merged.empty()) {
            Piece& back = merged.back();
            const bool contiguous = std::abs(p.start - back.end) <= kJoinEps;
            const bool same_speaker =
                p.speaker == back.speaker && p.source_uri == back.source_uri;
            const bool either_short = duration(back) < policy.min_s - kTimeEps ||
                                      duration(p) < policy.min_s - kTimeEps;
            const bool fits = p.end - back.start <= policy.max_s + kTimeEps;
            if (contiguous && same_speaker && either_short && fits) {
                back.end = p.end;
                back.quality = std::min(back.quality, p.quality);
                if (!p.transcript.empty()) {
                    if (!back.transcript.empty()) back.transcript += " ";
                    back.transcript += p.transcript;
                }
                continue;
            }
        }
        merged.push_back(std::move(p));
    }

    ChunkResult result;
    for (Piece& p : merged) {
        // Snap the fp overshoot of start + max_s arithmetic back onto the
        // bound so stored durations satisfy the contract exactly.
        if (std::abs(duration(p) - policy.max_s) < kTimeEps) p.end = p.start + policy.max_s;
        if (duration(p) < policy.min_s - kTimeEps) {
            result.dropped.push_back({to_clip(p, language), RejectReason::ShortSegmentDropped,
                                      "leftover piece of " + std::to_string(duration(p)) + " s"});
            continue;
        }
        result.drafts.push_back(to_clip(p, language));
    }
    return result;
}

}  // namespace stylerag::ingest
