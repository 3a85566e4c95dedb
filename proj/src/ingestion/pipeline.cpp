#include "stylerag/ingestion/pipeline.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <utility>

#include "httplib.h"
#include "json.hpp"
#include "stylerag/error.hpp"
#include "stylerag/ingestion/chunker.hpp"
#include "stylerag/ops.hpp"
#include "stylerag/store/jsonl.hpp"

namespace stylerag::ingest {

namespace {

using nlohmann::json;

class PassthroughClient final : public ProcessorClient {
public:
    std::string denoise(const ManifestEntry& entry) override { return entry.audio_uri; }

    std::vector<RawSegment> diarize(const ManifestEntry& entry,
                                    const std::string& audio_uri) override {
        std::vector<RawSegment> segments = entry.segments;
        for (RawSegment& s : segments) {
            if (s.source_uri.empty()) s.source_uri = audio_uri;
        }
        return segments;
    }

    std::vector<RawSegment> vad(std::vector<RawSegment> segments) override { return segments; }

    std::optional<std::string> transcribe(const RawSegment& segment) override {
        return segment.transcript;
    }
};

class HttpProcessorClient final : public ProcessorClient {
public:
    HttpProcessorClient(std::string base_url, std::uint32_t timeout_ms)
        : base_url_(std::move(base_url)), timeout_ms_(timeout_ms) {}

    std::string denoise(const ManifestEntry& entry) override {
        json resp = call("denoise", entry.audio_uri, json::object());
        return resp.value("audio_uri", entry.audio_uri);
    }

    std::vector<RawSegment> diarize(const ManifestEntry&,
                                    const std::string& audio_uri) override {
        json resp = call("diarize", audio_uri, json::object());
        std::vector<RawSegment> segments;
        for (const json& s : resp.value("segments", json::array())) {
            RawSegment segment = store::segment_from_json(s);
            if (segment.source_uri.empty()) segment.source_uri = audio_uri;
            segments.push_back(std::move(segment));
        }
        return segments;
    }

    std::vector<RawSegment> vad(std::vector<RawSegment> segments) override {
        if (segments.empty()) return segments;
        json param_segments = json::array();
        for (const RawSegment& s : segments) param_segments.push_back(store::segment_to_json(s));
        json resp = call("vad", segments.front().source_uri,
                         json{{"segments", std::move(param_segments)}});
        std::vector<RawSegment> out;
        for (const json& s : resp.value("segments", json::array())) {
            out.push_back(store::segment_from_json(s));
        }
        return out;
    }

    std::optional<std::string> transcribe(const RawSegment& segment) override {
        json resp = call("asr", segment.source_uri,
                         json{{"start_s", segment.start_s},
                              {"end_s", segment.end_s},
                              {"speaker_id", segment.speaker_id}});
        std::string text = resp.value("transcript", "");
        if (text.empty()) return std::nullopt;
        return text;
    }

private:
    json call(const std::string& stage, const std::string& audio_uri, json params) {
        httplib::Client client(base_url_);
        client.set_connection_timeout(0, timeout_ms_ * 1000);
        client.set_read_timeout(0, timeout_ms_ * 1000);
        const json body{{"stage", stage}, {"audio_uri", audio_uri}, {"params", std::move(params)}};
        auto result = client.Post("/process", body.dump(), "application/json");
        if (!result || result->status != 200) {
            throw Error(ErrorCode::EndpointUnavailable,
                        stage + " processor at " + base_url_ +
                            (result ? " returned status " + std::to_string(result->status)
                                    : " is unreachable"));
        }
        json resp = json::parse(result->body, nullptr, false);
        if (resp.is_discarded()) {
            throw Error(ErrorCode::EndpointUnavailable,
                        stage + " processor returned malformed JSON");
        }
        return resp;
    }

    std::string base_url_;
    std::uint32_t timeout_ms_;
};

SpeechClip segment_as_clip(const RawSegment& segment, const std::string& language) {
    SpeechClip clip;
    clip.clip_id = make_clip_id(segment.source_uri, segment.start_s, segment.end_s);
    clip.audio_uri = make_clip_uri(segment.source_uri, segment.start_s, segment.end_s);
    clip.duration_s = segment.duration();
    clip.speaker_id = segment.speaker_id;
    clip.language = language;
    clip.transcript = segment.transcript.value_or("");
    clip.quality_score = segment.vad_score;
    return clip;
}

struct EntryOutcome {
    std::vector<KnowledgeRecord> accepted;
    std::vector<RejectedDraft> rejected;
    std::vector<RawSegment> segments;
    std::vector<SpeechClip> clips;
    std::optional<std::string> error;
};

EntryOutcome process_entry(const ManifestEntry& entry, const ProcessorEndpoints& processors,
                           const ChunkPolicy& policy, const EmbedderSet& embedders,
                           std::size_t db_dim) {
    EntryOutcome out;
    try {
        auto denoise_client = make_processor(processors.denoise);
        auto diarize_client = make_processor(processors.diarize);
        auto vad_client = make_processor(processors.vad);
        auto asr_client = make_processor(processors.asr);

        const std::string audio_uri = denoise_client->denoise(entry);
        std::vector<RawSegment> segments = diarize_client->diarize(entry, audio_uri);
        segments = vad_client->vad(std::move(segments));

        std::vector<RawSegment> gated;
        for (RawSegment& segment : segments) {
            if (segment.vad_score > policy.quality_threshold) {
                gated.push_back(std::move(segment));
            } else {
                out.rejected.push_back({segment_as_clip(segment, entry.language),
                                        RejectReason::QualityBelowThreshold,
                                        "vad_score " + std::to_string(segment.vad_score) +
                                            " not above " +
                                            std::to_string(policy.quality_threshold)});
            }
        }

        for (RawSegment& segment : gated) {
            segment.transcript = transcribe(*asr_client, segment);
        }

        out.segments = gated;

        ChunkResult chunks = chunk_segments(gated, policy, entry.language);
        out.clips = chunks.drafts;
        for (RejectedDraft& dropped : chunks.dropped) {
            out.clips.push_back(dropped.draft);
            out.rejected.push_back(std::move(dropped));
        }

        // The whole-source script drives the profile component; clips of the
        // same speaker share one profile.
        Script script;
        script.script_id = entry.audio_uri;
        for (const RawSegment& segment : gated) {
            if (segment.transcript && !segment.transcript->empty()) {
                script.utterances.push_back({segment.speaker_id, *segment.transcript});
            }
        }
        const std::string script_text = embed::full_script_text(script);
        std::map<std::string, embed::CharacterProfile> profiles;

        std::vector<Utterance> history;
        for (SpeechClip& clip : chunks.drafts) {
            if (clip.transcript.empty()) {
                out.rejected.push_back(
                    {std::move(clip), RejectReason::EmptyTranscript, "no transcript"});
                continue;
            }
            auto [it, fresh] = profiles.try_emplace(clip.speaker_id);
            if (fresh) it->second = embed::reference_profile(script, clip.speaker_id);
            const embed::CharacterProfile& profile = it->second;

            embed::ContextWindow context;
            context.center_index = history.size();
            context.window_size = embed::kDefaultContextWindow;
            const std::size_t take =
                std::min<std::size_t>(history.size(), embed::kDefaultContextWindow);
            context.utterances.assign(history.end() - static_cast<std::ptrdiff_t>(take),
                                      history.end());

            Vec p = embed::embed_profile(embedders.profile, script_text, clip.speaker_id);
            Vec e = embed::embed_emotion(embedders.emotion, clip.transcript, profile, context);
            Vec u = embed::embed_user(embedders.user, UserPreference{});
            history.push_back({clip.speaker_id, clip.transcript});

            KnowledgeRecord record;
            record.clip = std::move(clip);
            record.embedding = compose_style_embedding(p, e, u);
            record.source_tags = entry.tags;

            ValidationResult verdict = validate_record(record, db_dim, policy.quality_threshold,
                                                       policy.min_s, policy.max_s);
            if (verdict.accepted) {
                out.accepted.push_back(std::move(record));
            } else {
                out.rejected.push_back(
                    {std::move(record.clip), verdict.reason, std::move(verdict.detail)});
            }
        }
    } catch (const Error& err) {
        // All-or-nothing per entry: partial results from a failed entry are
        // discarded so reruns with the endpoint healthy produce a superset.
        out = EntryOutcome{};
        out.error = err.what();
    }
    return out;
}

}  // namespace

std::unique_ptr<ProcessorClient> make_processor(const std::string& locator,
                                                std::uint32_t timeout_ms) {
    if (locator == "passthrough") {
        return std::make_unique<PassthroughClient>();
    }
    if (locator.rfind("http://", 0) == 0 || locator.rfind("https://", 0) == 0) {
        return std::make_unique<HttpProcessorClient>(locator, timeout_ms);
    }
    throw Error(ErrorCode::InvalidArgument, "bad processor locator: " + locator);
}

std::optional<std::string> transcribe(ProcessorClient& client, const RawSegment& segment) {
    std::optional<std::string> text = client.transcribe(segment);
    if (text && text->empty()) return std::nullopt;
    return text;
}

IngestionReport run_pipeline(const CorpusManifest& manifest, const ChunkPolicy& policy,
                             const EmbedderSet& embedders, std::size_t db_dim) {
    if (manifest.entries.empty()) {
        throw Error(ErrorCode::EmptyInput, "manifest has no entries");
    }

    IngestionReport report;
    report.quality_threshold = policy.quality_threshold;

    std::vector<std::future<EntryOutcome>> futures;
    futures.reserve(manifest.entries.size());
    for (const ManifestEntry& entry : manifest.entries) {
        futures.push_back(std::async(std::launch::async, process_entry, std::cref(entry),
                                     std::cref(manifest.processors), std::cref(policy),
                                     std::cref(embedders), db_dim));
    }

    for (std::size_t i = 0; i < futures.size(); ++i) {
        EntryOutcome outcome = futures[i].get();
        if (outcome.error) {
            report.entry_errors.push_back(manifest.entries[i].audio_uri + ": " + *outcome.error);
            continue;
        }
        for (KnowledgeRecord& r : outcome.accepted) report.accepted.push_back(std::move(r));
        for (RejectedDraft& r : outcome.rejected) report.rejected.push_back(std::move(r));
        for (RawSegment& s : outcome.segments) report.segments.push_back(std::move(s));
        for (SpeechClip& c : outcome.clips) report.clips.push_back(std::move(c));
    }
    return report;
}

}  // namespace stylerag::ingest
