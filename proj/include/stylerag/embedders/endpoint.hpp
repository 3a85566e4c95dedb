#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <utility>

#include "stylerag/embedders/context.hpp"
#include "stylerag/types.hpp"

namespace stylerag::embed {

enum class EmbedderKind { profile, emotion, user };
enum class Transport { in_process_reference, http_client };

const char* to_string(EmbedderKind kind);

// One pluggable embedder slot. The reference transport is fully offline and
// deterministic; the http transport speaks POST /embed (see wire format in
// endpoint.cpp) against an external model server.
struct EmbedderEndpoint {
    EmbedderKind kind = EmbedderKind::profile;
    Transport transport = Transport::in_process_reference;
    std::string address;           // base URL for http_client, e.g. http://127.0.0.1:8701
    std::uint32_t timeout_ms = 2000;
    std::size_t dim = kDefaultDim;
    std::uint64_t seed = 0;        // reference transport only
};

enum class ProfileSource { external_model, provided, reference };

struct CharacterProfile {
    std::string script_id;
    std::string speaker_id;
    std::string profile_text;
    ProfileSource source = ProfileSource::reference;
};

// Canonical payload serializations (fields joined with kFieldSep in the
// documented order). Both transports and the loopback test server hash the
// same bytes, so vectors are identical no matter where the embedder runs.
std::string profile_payload(const std::string& full_script_text, const std::string& speaker_id);
std::string emotion_payload(const std::string& utterance_text, const std::string& profile_text,
                            const ContextWindow& context);
std::string user_payload(const UserPreference& pref);

// Whole-script text in the canonical "speaker<TAB>text" line form. Used as
// the profile embedder input on both the corpus and query sides so their
// vectors live in the same space.
std::string full_script_text(const Script& script);

// Deterministic whole-script summary for one speaker; stands in for the
// external profiling model.
CharacterProfile reference_profile(const Script& script, const std::string& speaker_id);

Vec embed_profile(const EmbedderEndpoint& endpoint, const std::string& script_text,
                  const std::string& speaker_id);
Vec embed_emotion(const EmbedderEndpoint& endpoint, const std::string& utterance_text,
                  const CharacterProfile& profile, const ContextWindow& context);
// A fully-absent preference short-circuits to the zero vector.
Vec embed_user(const EmbedderEndpoint& endpoint, const UserPreference& pref);

// The three embedder slots of the style sum, configured together.
struct EmbedderSet {
    EmbedderEndpoint profile;
    EmbedderEndpoint emotion;
    EmbedderEndpoint user;
};

// All three slots on the in-process reference embedder: the zero-service
// default configuration.
EmbedderSet reference_embedders(std::size_t dim, std::uint64_t seed);

// Profiles are deterministic per (script_id, speaker_id); concurrent
// lookups may race on first insert, last writer wins with an equal value.
class ProfileCache {
public:
    CharacterProfile get_or_compute(const Script& script, const std::string& speaker_id);

private:
    std::mutex mu_;
    std::map<std::pair<std::string, std::string>, CharacterProfile> cache_;
};

}  // namespace stylerag::embed
