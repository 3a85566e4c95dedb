#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "stylerag/retrieval/retrieval.hpp"
#include "stylerag/types.hpp"

namespace stylerag::tts {

// Style and timbre ride in separate fields end to end: the timbre prompt
// carries voice identity, the bundle carries prosody evidence, and neither
// is derivable from the other in the wire schema.
struct SynthesisRequest {
    std::string text;
    SpeechClip timbre_prompt;
    retrieval::StylePromptBundle style_bundle;
    std::string endpoint = "mock";  // "mock" or an http(s) base URL
    std::uint32_t timeout_ms = 2000;
};

struct SynthesisResult {
    std::string audio_uri;
    nlohmann::json descriptor;  // echo of exactly what the synthesizer received
};

// Forwards text, timbre locator, and the ordered style manifest. The mock
// endpoint answers deterministically offline; http endpoints speak
// POST /synthesize {text, timbre_clip_uri, style_clip_uris} ->
// {audio_uri, descriptor}.
// Throws EmptyText, EmptyBundle, EndpointUnavailable.
SynthesisResult synthesize(const SynthesisRequest& request);

}  // namespace stylerag::tts
