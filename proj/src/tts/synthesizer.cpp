#include "stylerag/tts/synthesizer.hpp"

#include <cstdio>

#include "httplib.h"
#include "stylerag/embedders/reference.hpp"
#include "stylerag/error.hpp"

namespace stylerag::tts {

namespace {

using nlohmann::json;

json request_body(const SynthesisRequest& request) {
    json style_uris = json::array();
    for (const auto& [clip, score] : request.style_bundle.prompts) {
        (void)score;
        style_uris.push_back(clip.audio_uri);
    }
    return json{{"text", request.text},
                {"timbre_clip_uri", request.timbre_prompt.audio_uri},
                {"style_clip_uris", std::move(style_uris)}};
}

SynthesisResult mock_synthesize(const json& body, const SynthesisRequest& request) {
    json descriptor = body;
    descriptor["k_style_clips"] = request.style_bundle.prompts.size();
    descriptor["style_manifest"] = request.style_bundle.concatenation_manifest;

    const std::uint64_t h = embed::fnv1a64(body.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return {std::string("mock://synth/") + buf + ".wav", std::move(descriptor)};
}

SynthesisResult http_synthesize(const json& body, const SynthesisRequest& request) {
    httplib::Client client(request.endpoint);
    client.set_connection_timeout(0, request.timeout_ms * 1000);
    client.set_read_timeout(0, request.timeout_ms * 1000);
    auto result = client.Post("/synthesize", body.dump(), "application/json");
    if (!result || result->status != 200) {
        throw Error(ErrorCode::EndpointUnavailable,
                    "synthesizer at " + request.endpoint +
                        (result ? " returned status " + std::to_string(result->status)
                                : " is unreachable"));
    }
    json resp = json::parse(result->body, nullptr, false);
    if (resp.is_discarded()) {
        throw Error(ErrorCode::EndpointUnavailable, "synthesizer returned malformed JSON");
    }
    return {resp.value("audio_uri", ""), resp.value("descriptor", json::object())};
}

}  // namespace

SynthesisResult synthesize(const SynthesisRequest& request) {
    if (request.text.empty()) {
        throw Error(ErrorCode::EmptyText, "synthesis text is empty");
    }
    if (request.style_bundle.prompts.empty()) {
        throw Error(ErrorCode::EmptyBundle, "style bundle is empty");
    }
    const json body = request_body(request);
    if (request.endpoint == "mock") {
        return mock_synthesize(body, request);
    }
    if (request.endpoint.rfind("http://", 0) == 0 || request.endpoint.rfind("https://", 0) == 0) {
        return http_synthesize(body, request);
    }
    throw Error(ErrorCode::InvalidArgument, "bad synthesizer locator: " + request.endpoint);
}

}  // namespace stylerag::tts
