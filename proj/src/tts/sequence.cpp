#include "stylerag/tts/sequence.hpp"

#include "stylerag/error.hpp"

namespace stylerag::tts {

const char* to_string(ElementKind kind) {
    switch (kind) {
        case ElementKind::start_mark: return "S";
        case ElementKind::speaker_vector: return "v";
        case ElementKind::text_token: return "t";
        case ElementKind::transition_mark: return "T";
        case ElementKind::speech_token: return "x";
        case ElementKind::end_mark: return "E";
    }
    return "?";
}

LlmInputSequence construct_llm_sequence(const Vec& speaker_vector,
                                        const std::vector<std::string>& text_tokens,
                                        const std::vector<std::int64_t>& speech_tokens) {
    if (text_tokens.empty()) {
        throw Error(ErrorCode::EmptyText, "sequence needs at least one text token");
    }
    LlmInputSequence seq;
    seq.text_count = text_tokens.size();
    seq.speech_count = speech_tokens.size();
    seq.elements.reserve(text_tokens.size() + speech_tokens.size() + 4);

    seq.elements.push_back({ElementKind::start_mark, "", 0, {}});
    seq.elements.push_back({ElementKind::speaker_vector, "", 0, speaker_vector});
    for (const std::string& t : text_tokens) {
        seq.elements.push_back({ElementKind::text_token, t, 0, {}});
    }
    seq.elements.push_back({ElementKind::transition_mark, "", 0, {}});
    for (std::int64_t x : speech_tokens) {
        seq.elements.push_back({ElementKind::speech_token, "", x, {}});
    }
    seq.elements.push_back({ElementKind::end_mark, "", 0, {}});
    return seq;
}

ParsedSequence parse_llm_sequence(const LlmInputSequence& sequence) {
    const auto& el = sequence.elements;
    auto malformed = [](const std::string& what) -> Error {
        return Error(ErrorCode::InvalidArgument, "malformed sequence: " + what);
    };
    if (el.size() < 4) throw malformed("shorter than the four markers");
    if (el.front().kind != ElementKind::start_mark) throw malformed("first element is not S");
    if (el[1].kind != ElementKind::speaker_vector) throw malformed("second element is not v");
    if (el.back().kind != ElementKind::end_mark) throw malformed("last element is not E");

    ParsedSequence parsed;
    parsed.speaker_vector = el[1].vector;

    std::size_t i = 2;
    while (i < el.size() && el[i].kind == ElementKind::text_token) {
        ++parsed.text_count;
        ++i;
    }
    if (i >= el.size() || el[i].kind != ElementKind::transition_mark) {
        throw malformed("text tokens not followed by T");
    }
    ++i;
    while (i < el.size() && el[i].kind == ElementKind::speech_token) {
        ++parsed.speech_count;
        ++i;
    }
    if (i != el.size() - 1) {
        throw malformed("unexpected element between speech tokens and E");
    }
    if (parsed.text_count == 0) {
        throw malformed("no text tokens");
    }
    return parsed;
}

}  // namespace stylerag::tts
