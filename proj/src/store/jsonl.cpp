#include "stylerag/store/jsonl.hpp"

#include <fstream>
#include <utility>

#include "stylerag/error.hpp"

namespace stylerag::store {

namespace {

constexpr std::uint32_t kLineVersion = 1;

[[noreturn]] void corrupt(const std::string& what) {
    throw Error(ErrorCode::CorruptFile, what);
}

// Field accessors that turn nlohmann's type_error into our error type with
// the offending key in the message.
template <typename T>
T field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) corrupt(std::string("missing field \"") + key + "\"");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        corrupt(std::string("field \"") + key + "\" has the wrong type");
    }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        corrupt(std::string("field \"") + key + "\" has the wrong type");
    }
}

void check_line_version(const json& j) {
    if (field_or<std::uint32_t>(j, "v", 0) != kLineVersion) {
        throw Error(ErrorCode::UnsupportedVersion, "jsonl line version");
    }
}

}  // namespace

json clip_to_json(const SpeechClip& clip) {
    return json{{"clip_id", clip.clip_id},
                {"audio_uri", clip.audio_uri},
                {"duration_s", clip.duration_s},
                {"speaker_id", clip.speaker_id},
                {"language", clip.language},
                {"transcript", clip.transcript},
                {"quality_score", clip.quality_score}};
}

SpeechClip clip_from_json(const json& j) {
    SpeechClip clip;
    clip.clip_id = field<std::string>(j, "clip_id");
    clip.audio_uri = field<std::string>(j, "audio_uri");
    clip.duration_s = field<double>(j, "duration_s");
    clip.speaker_id = field<std::string>(j, "speaker_id");
    clip.language = field_or<std::string>(j, "language", "");
    clip.transcript = field_or<std::string>(j, "transcript", "");
    clip.quality_score = field<double>(j, "quality_score");
    return clip;
}

json segment_to_json(const ingest::RawSegment& segment) {
    json j{{"source_uri", segment.source_uri},
           {"start_s", segment.start_s},
           {"end_s", segment.end_s},
           {"speaker_id", segment.speaker_id},
           {"vad_score", segment.vad_score}};
    if (segment.transcript) j["transcript"] = *segment.transcript;
    if (!segment.silence_s.empty()) j["silence_s"] = segment.silence_s;
    return j;
}

ingest::RawSegment segment_from_json(const json& j) {
    ingest::RawSegment segment;
    segment.source_uri = field_or<std::string>(j, "source_uri", "");
    segment.start_s = field<double>(j, "start_s");
    segment.end_s = field<double>(j, "end_s");
    segment.speaker_id = field<std::string>(j, "speaker_id");
    segment.vad_score = field<double>(j, "vad_score");
    if (j.contains("transcript") && !j["transcript"].is_null()) {
        segment.transcript = field<std::string>(j, "transcript");
    }
    segment.silence_s = field_or<std::vector<double>>(j, "silence_s", {});
    return segment;
}

json record_to_json(const KnowledgeRecord& record) {
    return json{{"clip", clip_to_json(record.clip)},
                {"embedding", record.embedding.values},
                {"tags", record.source_tags}};
}

KnowledgeRecord record_from_json(const json& j) {
    KnowledgeRecord record;
    record.clip = clip_from_json(field<json>(j, "clip"));
    record.embedding.values = field<Vec>(j, "embedding");
    record.source_tags = field_or<std::vector<std::string>>(j, "tags", {});
    return record;
}

json script_to_json(const Script& script) {
    json utterances = json::array();
    for (const Utterance& u : script.utterances) {
        utterances.push_back({{"speaker_id", u.speaker_id}, {"text", u.text}});
    }
    return json{{"script_id", script.script_id}, {"utterances", std::move(utterances)}};
}

Script script_from_json(const json& j) {
    Script script;
    script.script_id = field<std::string>(j, "script_id");
    for (const json& u : field_or<json>(j, "utterances", json::array())) {
        script.utterances.push_back(
            {field<std::string>(u, "speaker_id"), field<std::string>(u, "text")});
    }
    return script;
}

json pref_to_json(const UserPreference& pref) {
    json j = json::object();
    if (pref.age_band) j["age_band"] = to_string(*pref.age_band);
    if (pref.gender) j["gender"] = to_string(*pref.gender);
    if (pref.region) j["region"] = *pref.region;
    if (pref.free_text) j["free_text"] = *pref.free_text;
    return j;
}

UserPreference pref_from_json(const json& j) {
    UserPreference pref;
    if (j.contains("age_band")) pref.age_band = parse_age_band(field<std::string>(j, "age_band"));
    if (j.contains("gender")) pref.gender = parse_gender(field<std::string>(j, "gender"));
    if (j.contains("region")) pref.region = field<std::string>(j, "region");
    if (j.contains("free_text")) pref.free_text = field<std::string>(j, "free_text");
    return pref;
}

void write_jsonl(const std::string& path, const std::vector<json>& lines) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    for (const json& line : lines) {
        out << line.dump() << '\n';
    }
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::vector<json> lines;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            corrupt(path + ":" + std::to_string(lineno) + " is not valid JSON");
        }
        lines.push_back(std::move(j));
    }
    return lines;
}

void write_records(const std::string& path, const std::vector<KnowledgeRecord>& records) {
    std::vector<json> lines;
    lines.reserve(records.size());
    for (const KnowledgeRecord& r : records) {
        json j = record_to_json(r);
        j["v"] = kLineVersion;
        lines.push_back(std::move(j));
    }
    write_jsonl(path, lines);
}

std::vector<KnowledgeRecord> read_records(const std::string& path) {
    std::vector<KnowledgeRecord> records;
    for (const json& j : read_jsonl(path)) {
        check_line_version(j);
        records.push_back(record_from_json(j));
    }
    return records;
}

void write_segments(const std::string& path, const std::vector<ingest::RawSegment>& segments) {
    std::vector<json> lines;
    lines.reserve(segments.size());
    for (const ingest::RawSegment& s : segments) {
        json j = segment_to_json(s);
        j["v"] = kLineVersion;
        lines.push_back(std::move(j));
    }
    write_jsonl(path, lines);
}

std::vector<ingest::RawSegment> read_segments(const std::string& path) {
    std::vector<ingest::RawSegment> segments;
    for (const json& j : read_jsonl(path)) {
        check_line_version(j);
        segments.push_back(segment_from_json(j));
    }
    return segments;
}

void write_clips(const std::string& path, const std::vector<SpeechClip>& clips) {
    std::vector<json> lines;
    lines.reserve(clips.size());
    for (const SpeechClip& c : clips) {
        json j = clip_to_json(c);
        j["v"] = kLineVersion;
        lines.push_back(std::move(j));
    }
    write_jsonl(path, lines);
}

std::vector<SpeechClip> read_clips(const std::string& path) {
    std::vector<SpeechClip> clips;
    for (const json& j : read_jsonl(path)) {
        check_line_version(j);
        clips.push_back(clip_from_json(j));
    }
    return clips;
}

Script read_script(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) corrupt(path + " is not valid JSON");
    return script_from_json(j);
}

void write_script(const std::string& path, const Script& script) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << script_to_json(script).dump(2) << '\n';
    if (!out.flush()) throw Error(ErrorCode::IoError, "short write to " + path);
}

UserPreference read_pref_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) corrupt(path + " is not valid JSON");
    return pref_from_json(j);
}

void write_db_config(const std::string& path, const DbConfig& config) {
    json j{{"version", config.version},
           {"dim", config.dim},
           {"embedder_seed", config.embedder_seed},
           {"normalize", config.normalize},
           {"quality_threshold", config.quality_threshold},
           {"index_mode", config.index_mode},
           {"n_clusters", config.n_clusters},
           {"build_seed", config.build_seed},
           {"default_k", config.default_k}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out.flush()) throw Error(ErrorCode::IoError, "short write to " + path);
}

DbConfig read_db_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) corrupt(path + " is not valid JSON");
    DbConfig config;
    config.version = field<std::uint32_t>(j, "version");
    if (config.version != 1) {
        throw Error(ErrorCode::UnsupportedVersion,
                    "db config version " + std::to_string(config.version));
    }
    config.dim = field<std::size_t>(j, "dim");
    config.embedder_seed = field<std::uint64_t>(j, "embedder_seed");
    config.normalize = field_or<bool>(j, "normalize", false);
    config.quality_threshold = field<double>(j, "quality_threshold");
    config.index_mode = field<std::string>(j, "index_mode");
    config.n_clusters = field_or<std::uint32_t>(j, "n_clusters", 0);
    config.build_seed = field_or<std::uint64_t>(j, "build_seed", 0);
    config.default_k = field_or<std::uint32_t>(j, "default_k", kDefaultTopK);
    return config;
}

namespace {

bool locator_ok(const std::string& locator) {
    return locator == "passthrough" || locator.rfind("http://", 0) == 0 ||
           locator.rfind("https://", 0) == 0;
}

}  // namespace

ingest::CorpusManifest manifest_from_json(const json& j) {
    ingest::CorpusManifest manifest;
    manifest.version = field<std::uint32_t>(j, "version");
    if (manifest.version != 1) {
        throw Error(ErrorCode::UnsupportedVersion,
                    "manifest version " + std::to_string(manifest.version));
    }
    if (j.contains("processors")) {
        const json& p = j["processors"];
        manifest.processors.denoise = field_or<std::string>(p, "denoise", "passthrough");
        manifest.processors.diarize = field_or<std::string>(p, "diarize", "passthrough");
        manifest.processors.vad = field_or<std::string>(p, "vad", "passthrough");
        manifest.processors.asr = field_or<std::string>(p, "asr", "passthrough");
    }
    for (const std::string& locator :
         {manifest.processors.denoise, manifest.processors.diarize, manifest.processors.vad,
          manifest.processors.asr}) {
        if (!locator_ok(locator)) {
            throw Error(ErrorCode::InvalidArgument, "bad processor locator: " + locator);
        }
    }

    const json entries = field<json>(j, "entries");
    if (!entries.is_array() || entries.empty()) {
        throw Error(ErrorCode::EmptyInput, "manifest has no entries");
    }
    for (const json& e : entries) {
        ingest::ManifestEntry entry;
        entry.audio_uri = field<std::string>(e, "audio_uri");
        if (entry.audio_uri.empty()) {
            throw Error(ErrorCode::InvalidArgument, "entry with empty audio_uri");
        }
        entry.language = field_or<std::string>(e, "language", "");
        entry.tags = field_or<std::vector<std::string>>(e, "tags", {});
        for (const json& s : field_or<json>(e, "segments", json::array())) {
            ingest::RawSegment segment = segment_from_json(s);
            if (segment.source_uri.empty()) segment.source_uri = entry.audio_uri;
            entry.segments.push_back(std::move(segment));
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

ingest::CorpusManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw Error(ErrorCode::InvalidArgument, path + " is not valid JSON");
    }
    return manifest_from_json(j);
}

json manifest_to_json(const ingest::CorpusManifest& manifest) {
    json entries = json::array();
    for (const ingest::ManifestEntry& entry : manifest.entries) {
        json segments = json::array();
        for (const ingest::RawSegment& s : entry.segments) {
            json seg = segment_to_json(s);
            if (s.source_uri == entry.audio_uri) seg.erase("source_uri");
            segments.push_back(std::move(seg));
        }
        entries.push_back({{"audio_uri", entry.audio_uri},
                           {"language", entry.language},
                           {"tags", entry.tags},
                           {"segments", std::move(segments)}});
    }
    return json{{"version", manifest.version},
                {"processors",
                 {{"denoise", manifest.processors.denoise},
                  {"diarize", manifest.processors.diarize},
                  {"vad", manifest.processors.vad},
                  {"asr", manifest.processors.asr}}},
                {"entries", std::move(entries)}};
}

void write_manifest(const std::string& path, const ingest::CorpusManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << manifest_to_json(manifest).dump(2) << '\n';
    if (!out.flush()) throw Error(ErrorCode::IoError, "short write to " + path);
}

RecordStore::RecordStore(std::vector<KnowledgeRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        auto [it, inserted] = rows_.emplace(records_[i].clip.clip_id, i);
        if (!inserted) {
            throw Error(ErrorCode::DuplicateClipId, records_[i].clip.clip_id);
        }
    }
}

RecordStore RecordStore::load(const std::string& path) {
    return RecordStore(read_records(path));
}

const KnowledgeRecord& RecordStore::get(const std::string& clip_id) const {
    auto it = rows_.find(clip_id);
    if (it == rows_.end()) throw Error(ErrorCode::UnknownClipId, clip_id);
    return records_[it->second];
}

bool RecordStore::contains(const std::string& clip_id) const {
    return rows_.find(clip_id) != rows_.end();
}

}  // namespace stylerag::store
