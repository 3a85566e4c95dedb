#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stylerag/embedders/endpoint.hpp"
#include "stylerag/ingestion/types.hpp"

namespace stylerag::ingest {

// One preprocessing stage client. The passthrough implementation trusts the
// annotations already embedded in the manifest entry, so the whole pipeline
// runs with no external services; an HTTP implementation speaks
// POST /process {stage, audio_uri, params} against a processor server.
class ProcessorClient {
public:
    virtual ~ProcessorClient() = default;

    // Possibly relocated audio locator after noise reduction.
    virtual std::string denoise(const ManifestEntry& entry) = 0;

    // Speaker-attributed segments of the source.
    virtual std::vector<RawSegment> diarize(const ManifestEntry& entry,
                                            const std::string& audio_uri) = 0;

    // Speech-trimmed, activity-scored segments.
    virtual std::vector<RawSegment> vad(std::vector<RawSegment> segments) = 0;

    // Transcript for one segment; nullopt when no speech was recognized.
    virtual std::optional<std::string> transcribe(const RawSegment& segment) = 0;
};

// locator: "passthrough" or an http(s) base URL.
std::unique_ptr<ProcessorClient> make_processor(const std::string& locator,
                                                std::uint32_t timeout_ms = 2000);

// Normalizes the client's answer: an empty transcript is no transcript.
std::optional<std::string> transcribe(ProcessorClient& client, const RawSegment& segment);

using embed::EmbedderSet;
using embed::reference_embedders;

// Full corpus ingestion: denoise -> diarize -> VAD -> quality gate (strict)
// -> ASR -> chunk -> embed -> validate. Entries run in parallel; the report
// is assembled in manifest order, so output is deterministic. An entry whose
// processors fail contributes an entry_errors line and nothing else.
//
// Database-side embeddings mirror the query recipe: profile over the whole
// source text, emotion over the clip transcript with a window of preceding
// clips, user component zero.
IngestionReport run_pipeline(const CorpusManifest& manifest, const ChunkPolicy& policy,
                             const EmbedderSet& embedders, std::size_t db_dim);

}  // namespace stylerag::ingest
