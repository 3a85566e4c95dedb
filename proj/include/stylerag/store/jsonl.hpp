#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "stylerag/ingestion/types.hpp"
#include "stylerag/types.hpp"

namespace stylerag::store {

using nlohmann::json;

// JSON shapes for the domain types. Every persisted line carries "v": 1 so
// the files are self-describing. Embedding component vectors are a
// derivation detail and are not persisted; only the composed values are.
json clip_to_json(const SpeechClip& clip);
SpeechClip clip_from_json(const json& j);

json segment_to_json(const ingest::RawSegment& segment);
ingest::RawSegment segment_from_json(const json& j);

json record_to_json(const KnowledgeRecord& record);
KnowledgeRecord record_from_json(const json& j);

json script_to_json(const Script& script);
Script script_from_json(const json& j);

json pref_to_json(const UserPreference& pref);
UserPreference pref_from_json(const json& j);

// One compact JSON document per line. Readers throw CorruptFile on any
// malformed line, IoError when the file cannot be opened.
void write_jsonl(const std::string& path, const std::vector<json>& lines);
std::vector<json> read_jsonl(const std::string& path);

void write_records(const std::string& path, const std::vector<KnowledgeRecord>& records);
std::vector<KnowledgeRecord> read_records(const std::string& path);

void write_segments(const std::string& path, const std::vector<ingest::RawSegment>& segments);
std::vector<ingest::RawSegment> read_segments(const std::string& path);

void write_clips(const std::string& path, const std::vector<SpeechClip>& clips);
std::vector<SpeechClip> read_clips(const std::string& path);

Script read_script(const std::string& path);
void write_script(const std::string& path, const Script& script);

UserPreference read_pref_file(const std::string& path);

// Database identity saved alongside the index. The embedder seed is part of
// it: query vectors must come from the same embedder space as the stored
// ones or scores are meaningless.
struct DbConfig {
    std::uint32_t version = 1;
    std::size_t dim = kDefaultDim;
    std::uint64_t embedder_seed = 0;
    bool normalize = false;
    double quality_threshold = kDefaultQualityThreshold;
    std::string index_mode = "clustered";
    std::uint32_t n_clusters = 0;  // 0 selects ceil(sqrt(record count))
    std::uint64_t build_seed = 0;
    std::uint32_t default_k = kDefaultTopK;
};

void write_db_config(const std::string& path, const DbConfig& config);
DbConfig read_db_config(const std::string& path);

// Manifest schema (version 1):
// {
//   "version": 1,
//   "processors": {"denoise"|"diarize"|"vad"|"asr": "passthrough" | url},
//   "entries": [{
//     "audio_uri": str, "language": str, "tags": [str...],
//     "segments": [{"start_s": num, "end_s": num, "speaker_id": str,
//                   "vad_score": num, "transcript"?: str,
//                   "silence_s"?: [num...]}]
//   }]
// }
// Embedded segments inherit the entry's audio_uri as their source_uri.
ingest::CorpusManifest read_manifest(const std::string& path);
ingest::CorpusManifest manifest_from_json(const json& j);
json manifest_to_json(const ingest::CorpusManifest& manifest);
void write_manifest(const std::string& path, const ingest::CorpusManifest& manifest);

// Clip-id keyed view over records.jsonl; hits resolve through this.
class RecordStore {
public:
    RecordStore() = default;
    explicit RecordStore(std::vector<KnowledgeRecord> records);
    static RecordStore load(const std::string& path);

    const KnowledgeRecord& get(const std::string& clip_id) const;  // throws UnknownClipId
    bool contains(const std::string& clip_id) const;
    std::size_t size() const { return records_.size(); }
    const std::vector<KnowledgeRecord>& records() const { return records_; }

private:
    std::vector<KnowledgeRecord> records_;
    std::map<std::string, std::size_t> rows_;
};

}  // namespace stylerag::store
