#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stylerag {

// Stored vectors are 32-bit; score arithmetic accumulates in 64-bit.
using Vec = std::vector<float>;

inline constexpr std::size_t kDefaultDim = 256;
inline constexpr std::uint32_t kDefaultTopK = 3;
inline constexpr double kDefaultQualityThreshold = 0.6;
inline constexpr double kMinClipSeconds = 5.0;
inline constexpr double kMaxClipSeconds = 10.0;

// Style vector plus the three component vectors it was composed from.
// When components are present, values is their elementwise sum (see
// compose_style_embedding for the exact accumulation rule).
struct StyleEmbedding {
    struct Components {
        Vec profile;
        Vec emotion;
        Vec user;
    };

    Vec values;
    std::optional<Components> components;

    std::size_t dim() const { return values.size(); }
};

struct SpeechClip {
    std::string clip_id;
    std::string audio_uri;
    double duration_s = 0.0;
    std::string speaker_id;
    std::string language;
    std::string transcript;
    double quality_score = 0.0;
};

struct KnowledgeRecord {
    SpeechClip clip;
    StyleEmbedding embedding;
    std::vector<std::string> source_tags;
};

enum class AgeBand { child, young, adult, senior };
enum class Gender { female, male, nonbinary };

const char* to_string(AgeBand band);
const char* to_string(Gender gender);
AgeBand parse_age_band(const std::string& name);
Gender parse_gender(const std::string& name);

// Every field may be absent; a fully anonymous preference embeds to the
// zero vector so the style sum degrades to profile+emotion.
struct UserPreference {
    std::optional<AgeBand> age_band;
    std::optional<Gender> gender;
    std::optional<std::string> region;
    std::optional<std::string> free_text;

    bool empty() const { return !age_band && !gender && !region && !free_text; }
};

struct Utterance {
    std::string speaker_id;
    std::string text;
};

struct Script {
    std::string script_id;
    std::vector<Utterance> utterances;
};

// One synthesis request against the style database.
struct StyleQuery {
    std::string utterance_text;
    std::string script_id;
    std::size_t position = 0;
    std::optional<UserPreference> user_pref;
    std::optional<SpeechClip> explicit_style_clip;
    std::uint32_t k = kDefaultTopK;
};

}  // namespace stylerag
