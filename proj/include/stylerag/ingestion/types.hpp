#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stylerag/ops.hpp"
#include "stylerag/types.hpp"

namespace stylerag::ingest {

// One diarized, VAD-scored stretch of speech inside a source recording.
// silence_s lists segment-internal silence markers (absolute seconds);
// the chunker prefers them as split points.
struct RawSegment {
    std::string source_uri;
    double start_s = 0.0;
    double end_s = 0.0;
    std::string speaker_id;
    double vad_score = 0.0;
    std::optional<std::string> transcript;
    std::vector<double> silence_s;

    double duration() const { return end_s - start_s; }
};

enum class ShortSegmentRule { merge_same_speaker, drop };

const char* to_string(ShortSegmentRule rule);
ShortSegmentRule parse_short_segment_rule(const std::string& name);

struct ChunkPolicy {
    double min_s = kMinClipSeconds;
    double max_s = kMaxClipSeconds;
    ShortSegmentRule short_segment_rule = ShortSegmentRule::merge_same_speaker;
    double quality_threshold = kDefaultQualityThreshold;
};

// Locator per preprocessing stage; "passthrough" consumes the annotations
// already present on the manifest entry, anything else is an HTTP base URL.
struct ProcessorEndpoints {
    std::string denoise = "passthrough";
    std::string diarize = "passthrough";
    std::string vad = "passthrough";
    std::string asr = "passthrough";
};

struct ManifestEntry {
    std::string audio_uri;
    std::string language;
    std::vector<std::string> tags;
    // Pre-annotated segments, the passthrough stand-in for the external
    // diarization/VAD/ASR outputs.
    std::vector<RawSegment> segments;
};

struct CorpusManifest {
    std::uint32_t version = 1;
    std::vector<ManifestEntry> entries;
    ProcessorEndpoints processors;
};

struct RejectedDraft {
    SpeechClip draft;
    RejectReason reason = RejectReason::DurationOutOfRange;
    std::string detail;
};

struct ChunkResult {
    std::vector<SpeechClip> drafts;
    std::vector<RejectedDraft> dropped;  // short leftovers per short_segment_rule
};

struct IngestionReport {
    std::vector<KnowledgeRecord> accepted;
    std::vector<RejectedDraft> rejected;
    // Entry-level failures (unreachable processors and the like). The entry
    // contributes nothing but the rest of the corpus still ingests.
    std::vector<std::string> entry_errors;
    double quality_threshold = kDefaultQualityThreshold;
    // Structured intermediates for the sidecar stores: the gate-passing
    // post-ASR segments that fed the chunker, and every draft it produced.
    std::vector<RawSegment> segments;
    std::vector<SpeechClip> clips;
};

// Stable identity for a clip: FNV-1a over source locator and bounds printed
// at fixed precision. Re-ingesting the same manifest reproduces every id.
std::string make_clip_id(const std::string& source_uri, double start_s, double end_s);

// Locator for the clip's span inside the source recording (media fragment).
std::string make_clip_uri(const std::string& source_uri, double start_s, double end_s);

}  // namespace stylerag::ingest
