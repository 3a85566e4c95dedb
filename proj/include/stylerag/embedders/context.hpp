#pragma once

#include <cstdint>
#include <vector>

#include "stylerag/types.hpp"

namespace stylerag::embed {

inline constexpr std::uint32_t kDefaultContextWindow = 5;

// The dialogue window handed to the emotion embedder: up to window_size
// utterances strictly before center_index, in script order. Shorter only
// when the script start truncates it.
struct ContextWindow {
    std::size_t center_index = 0;
    std::uint32_t window_size = kDefaultContextWindow;
    std::vector<Utterance> utterances;
};

// Throws PositionOutOfRange when position >= script length and
// InvalidArgument when w < 1.
ContextWindow build_context_window(const Script& script, std::size_t position,
                                   std::uint32_t w = kDefaultContextWindow);

}  // namespace stylerag::embed
