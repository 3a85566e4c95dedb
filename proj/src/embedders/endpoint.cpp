#include "stylerag/embedders/endpoint.hpp"

#include "httplib.h"
#include "json.hpp"
#include "stylerag/embedders/reference.hpp"
#include "stylerag/error.hpp"

namespace stylerag::embed {

const char* to_string(EmbedderKind kind) {
    switch (kind) {
        case EmbedderKind::profile: return "profile";
        case EmbedderKind::emotion: return "emotion";
        case EmbedderKind::user: return "user";
    }
    return "unknown";
}

std::string profile_payload(const std::string& script_text, const std::string& speaker_id) {
    return script_text + kFieldSep + speaker_id;
}

std::string emotion_payload(const std::string& utterance_text, const std::string& profile_text,
                            const ContextWindow& context) {
    std::string payload = utterance_text;
    payload += kFieldSep;
    payload += profile_text;
    for (const Utterance& u : context.utterances) {
        payload += kFieldSep;
        payload += u.speaker_id;
        payload += kFieldSep;
        payload += u.text;
    }
    return payload;
}

std::string user_payload(const UserPreference& pref) {
    // Present fields only, tagged, in fixed order: age, gender, region, note.
    std::string payload;
    auto append = [&payload](const std::string& field) {
        if (!payload.empty()) payload += kFieldSep;
        payload += field;
    };
    if (pref.age_band) append(std::string("age:") + to_string(*pref.age_band));
    if (pref.gender) append(std::string("gender:") + to_string(*pref.gender));
    if (pref.region) append("region:" + *pref.region);
    if (pref.free_text) append("note:" + *pref.free_text);
    return payload;
}

std::string full_script_text(const Script& script) {
    std::string text;
    for (const Utterance& u : script.utterances) {
        text += u.speaker_id;
        text += '\t';
        text += u.text;
        text += '\n';
    }
    return text;
}

CharacterProfile reference_profile(const Script& script, const std::string& speaker_id) {
    std::size_t lines = 0;
    std::string opening;
    for (const Utterance& u : script.utterances) {
        if (u.speaker_id != speaker_id) continue;
        if (lines == 0) opening = u.text.substr(0, 48);
        ++lines;
    }
    CharacterProfile profile;
    profile.script_id = script.script_id;
    profile.speaker_id = speaker_id;
    profile.source = ProfileSource::reference;
    profile.profile_text = "speaker " + speaker_id + " | lines=" + std::to_string(lines) +
                           " | opens=\"" + opening + "\"";
    return profile;
}

namespace {

void require_kind(const EmbedderEndpoint& endpoint, EmbedderKind expected) {
    if (endpoint.kind != expected) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string("endpoint kind is ") + to_string(endpoint.kind) + ", expected " +
                        to_string(expected));
    }
}

// Wire contract: POST /embed {"kind": ..., "dim": N, "payload": {...}}
// -> 200 {"vector": [...]}. Anything else is EndpointUnavailable.
Vec http_embed(const EmbedderEndpoint& endpoint, const nlohmann::json& payload) {
    httplib::Client client(endpoint.address);
    const time_t sec = endpoint.timeout_ms / 1000;
    const time_t usec = static_cast<time_t>(endpoint.timeout_ms % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);

    nlohmann::json body = {
        {"kind", to_string(endpoint.kind)}, {"dim", endpoint.dim}, {"payload", payload}};
    auto res = client.Post("/embed", body.dump(), "application/json");
    if (!res || res->status != 200) {
        throw Error(ErrorCode::EndpointUnavailable,
                    "embedder at " + endpoint.address +
                        (res ? " returned status " + std::to_string(res->status)
                             : " is unreachable"));
    }

    Vec vector;
    try {
        nlohmann::json reply = nlohmann::json::parse(res->body);
        vector = reply.at("vector").get<Vec>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::EndpointUnavailable,
                    "embedder at " + endpoint.address + " sent a malformed reply: " + e.what());
    }
    if (vector.size() != endpoint.dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "embedder returned " + std::to_string(vector.size()) + " values, expected " +
                        std::to_string(endpoint.dim));
    }
    return vector;
}

nlohmann::json context_json(const ContextWindow& context) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Utterance& u : context.utterances) {
        arr.push_back({{"speaker", u.speaker_id}, {"text", u.text}});
    }
    return arr;
}

}  // namespace

Vec embed_profile(const EmbedderEndpoint& endpoint, const std::string& script_text,
                  const std::string& speaker_id) {
    require_kind(endpoint, EmbedderKind::profile);
    if (script_text.empty()) {
        throw Error(ErrorCode::EmptyText, "profile embedder needs non-empty script text");
    }
    if (endpoint.transport == Transport::in_process_reference) {
        return embed_reference("profile", profile_payload(script_text, speaker_id), endpoint.dim,
                               endpoint.seed);
    }
    return http_embed(endpoint,
                      {{"script_text", script_text}, {"speaker_id", speaker_id}});
}

Vec embed_emotion(const EmbedderEndpoint& endpoint, const std::string& utterance_text,
                  const CharacterProfile& profile, const ContextWindow& context) {
    require_kind(endpoint, EmbedderKind::emotion);
    if (endpoint.transport == Transport::in_process_reference) {
        return embed_reference("emotion",
                               emotion_payload(utterance_text, profile.profile_text, context),
                               endpoint.dim, endpoint.seed);
    }
    return http_embed(endpoint, {{"utterance", utterance_text},
                                 {"profile", profile.profile_text},
                                 {"context", context_json(context)}});
}

Vec embed_user(const EmbedderEndpoint& endpoint, const UserPreference& pref) {
    require_kind(endpoint, EmbedderKind::user);
    if (pref.empty()) {
        return Vec(endpoint.dim, 0.0f);  // anonymous query: identity of the style sum
    }
    if (endpoint.transport == Transport::in_process_reference) {
        return embed_reference("user", user_payload(pref), endpoint.dim, endpoint.seed);
    }
    nlohmann::json payload = nlohmann::json::object();
    if (pref.age_band) payload["age_band"] = to_string(*pref.age_band);
    if (pref.gender) payload["gender"] = to_string(*pref.gender);
    if (pref.region) payload["region"] = *pref.region;
    if (pref.free_text) payload["free_text"] = *pref.free_text;
    return http_embed(endpoint, payload);
}

EmbedderSet reference_embedders(std::size_t dim, std::uint64_t seed) {
    EmbedderSet set;
    set.profile = {EmbedderKind::profile, Transport::in_process_reference, "", 2000, dim, seed};
    set.emotion = {EmbedderKind::emotion, Transport::in_process_reference, "", 2000, dim, seed};
    set.user = {EmbedderKind::user, Transport::in_process_reference, "", 2000, dim, seed};
    return set;
}

CharacterProfile ProfileCache::get_or_compute(const Script& script, const std::string& speaker_id) {
    auto key = std::make_pair(script.script_id, speaker_id);
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    CharacterProfile profile = reference_profile(script, speaker_id);
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = cache_.emplace(std::move(key), std::move(profile));
    return it->second;
}

}  // namespace stylerag::embed
