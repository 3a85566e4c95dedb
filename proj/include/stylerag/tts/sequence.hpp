#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stylerag/types.hpp"

namespace stylerag::tts {

enum class ElementKind : std::uint8_t {
    start_mark,
    speaker_vector,
    text_token,
    transition_mark,
    speech_token,
    end_mark,
};

const char* to_string(ElementKind kind);

struct SequenceElement {
    ElementKind kind = ElementKind::start_mark;
    std::string text;           // text_token payload
    std::int64_t speech = 0;    // speech_token id
    Vec vector;                 // speaker_vector payload
};

// The language-model input [S, v, t_1..t_I, T, x_1..x_K, E]: one start mark,
// the speaker vector second, all I text tokens before the transition mark,
// all K speech tokens after it, one end mark last. Length is I + K + 4.
struct LlmInputSequence {
    std::vector<SequenceElement> elements;
    std::size_t text_count = 0;    // I
    std::size_t speech_count = 0;  // K

    std::size_t size() const { return elements.size(); }
};

// K = 0 is allowed (pure-text prompt); I = 0 is EmptyText.
LlmInputSequence construct_llm_sequence(const Vec& speaker_vector,
                                        const std::vector<std::string>& text_tokens,
                                        const std::vector<std::int64_t>& speech_tokens);

struct ParsedSequence {
    std::size_t text_count = 0;
    std::size_t speech_count = 0;
    Vec speaker_vector;
};

// Validates the marker structure and recovers (I, K, v). Throws
// InvalidArgument on any malformed element order.
ParsedSequence parse_llm_sequence(const LlmInputSequence& sequence);

}  // namespace stylerag::tts
